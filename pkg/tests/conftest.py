import numpy as np
import pytest

from lcdopt import dataio

# Toy 4-sample logistic + L2 fixture (lam = 0.1). The frozen optimal value
# comes from a one-off 1e6-iteration fixed-stepsize gradient descent oracle
# with gamma = 1/L, run offline; the final gradient norm was 0.0.
TOY_A = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.5], [0.5, -1.0]])
TOY_B = np.array([1.0, 1.0, -1.0, -1.0])
TOY_LAM = 0.1
TOY_FSTAR = 0.5661774168504233


@pytest.fixture(scope="session")
def toy_logistic_data():
    return TOY_A.copy(), TOY_B.copy(), TOY_LAM, TOY_FSTAR


@pytest.fixture(scope="session")
def class_dataset():
    from importlib.resources import files
    path = files("lcdopt").joinpath("data/synth_class_600.libsvm")
    return dataio.parse_libsvm(path.read_text(), classification=True)


@pytest.fixture(scope="session")
def reg_dataset():
    from importlib.resources import files
    path = files("lcdopt").joinpath("data/synth_reg_500.libsvm")
    return dataio.parse_libsvm(path.read_text(), classification=False)
