"""Convex solvers with matrix-valued stepsizes from local curvature maps.

The three curvature methods generalize fixed-stepsize and Polyak-stepsize
gradient descent: the first minimizes a point-dependent quadratic upper
bound, the second projects onto the localization set carved out by the
matching lower bound, and the third projects in the metric of the
curvature matrix itself (closed form, no convergence guarantee).
"""

from ._backend import KERNEL_BACKEND
from .matrices import (
    CurvatureMatrix,
    Dense,
    Diagonal,
    EigenDecomposition,
    RankOne,
    ScaledIdentity,
    Zero,
)
from .curvature import CurvatureModel
from .objectives import (
    Objective,
    check_lower_bound,
    check_upper_bound,
    estimate_f_star,
    huber_sq_regression,
    least_squares,
    logistic_lp,
    pnorm_regression,
    ridge,
)
from .absconvex import AbsConvexFunction, check_absolute_convexity
from .projection import ProjectionInput, find_beta, lcd2_project, lcd3_project
from .solvers import SolverConfig, Trace, run, verify_rate_bounds
from .dataio import Dataset, RunRecord, parse_libsvm, write_trace_csv

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "CurvatureMatrix", "Zero", "ScaledIdentity", "Diagonal", "RankOne",
    "Dense", "EigenDecomposition", "CurvatureModel",
    "Objective", "check_lower_bound", "check_upper_bound", "estimate_f_star",
    "logistic_lp", "least_squares", "ridge", "pnorm_regression",
    "huber_sq_regression",
    "AbsConvexFunction", "check_absolute_convexity",
    "ProjectionInput", "find_beta", "lcd2_project", "lcd3_project",
    "SolverConfig", "Trace", "run", "verify_rate_bounds",
    "Dataset", "RunRecord", "parse_libsvm", "write_trace_csv",
]
