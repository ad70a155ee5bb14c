import numpy as np

from lcdopt import curvature as cv
from lcdopt import objectives as obj_mod
from lcdopt import verification


def test_all_suites_pass_with_default_seed():
    results = verification.run_suites("all", samples=400, seed=0)
    assert results
    for res in results:
        assert res.passed, (res.name, res.worst)


def test_wrong_curvature_is_flagged():
    wrong = obj_mod.Objective(
        dim=1, f=lambda x: float(x[0] ** 2), grad=lambda x: 2.0 * x,
        model=cv.strong_convexity_model(10.0, 1), name="wrong-curvature",
    )
    results = verification.bound_suite([wrong], samples=300, seed=0)
    assert len(results) == 1
    assert not results[0].passed
    # deterministic probe pair with a hand-computed violation
    assert obj_mod.check_lower_bound(wrong, np.array([3.0]),
                                     np.array([0.0])) == 36.0


def test_zero_samples_vacuous():
    results = verification.bound_suite([obj_mod.huber_sq_objective(1.0, 2)],
                                       samples=0, seed=0)
    assert results[0].passed
    assert results[0].samples == 0
