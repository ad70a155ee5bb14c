"""Absolutely convex functions and the sum-of-squares problem builder.

A function phi is absolutely convex when every linearization stays between
-phi and phi:

    |phi(y) + <subgrad(y), x - y>| <= phi(x)   for all x, y.

Such functions are nonnegative, convex, and have bounded subgradients.
Squaring the defining inequality shows f = phi^2 admits the curvature
mapping 2 * subgrad subgrad^T, which is what makes sums of squares of
these functions attractive: the curvature is read off the subgradients.
"""

from __future__ import annotations

import dataclasses
from typing import Callable, Optional

import numpy as np

from . import curvature as cv
from .errors import DimensionMismatch
from .matrices import Dense, RankOne
from .objectives import Objective


@dataclasses.dataclass(frozen=True)
class AbsConvexFunction:
    dim: int
    value: Callable[[np.ndarray], float]
    subgrad: Callable[[np.ndarray], np.ndarray]
    grad_bound: Optional[float] = None
    name: str = ""

    def __call__(self, x):
        return self.value(np.asarray(x, dtype=float))


def check_absolute_convexity(phi, x, y):
    """Violation max(0, |phi(y) + <g(y), x - y>| - phi(x))."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (phi.dim,) or y.shape != (phi.dim,):
        raise DimensionMismatch("x and y must match the function dimension")
    lin = phi.value(y) + float(phi.subgrad(y) @ (x - y))
    return max(0.0, abs(lin) - phi.value(x))


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------


def abs_affine(a, b=0.0):
    """|<a, x> + b| with the zero subgradient at the kink."""
    a = np.asarray(a, dtype=float)
    b = float(b)

    def value(x):
        return abs(float(a @ x) + b)

    def subgrad(x):
        return float(np.sign(float(a @ x) + b)) * a

    return AbsConvexFunction(a.shape[0], value, subgrad,
                             grad_bound=float(np.linalg.norm(a)),
                             name="abs_affine")


def pnorm_acv(p, d):
    """||x||_p for p >= 1 with the fixed subgradient selection
    x_i |x_i|^{p-2} / ||x||_p^{p-1} (zero at the origin)."""
    if p < 1:
        raise ValueError("p must be >= 1")
    p = float(p)

    def value(x):
        return float(np.sum(np.abs(x) ** p)) ** (1.0 / p)

    def subgrad(x):
        return cv.pnorm_gradient(x, p)

    # Euclidean bound on the dual-norm-unit subgradients, q = p/(p-1).
    inv_q = 1.0 - 1.0 / p
    bound = float(d) ** max(0.0, 0.5 - inv_q)
    return AbsConvexFunction(d, value, subgrad, grad_bound=bound,
                             name=f"pnorm(p={p:g})")


def huber_lifted(delta):
    """Huber loss lifted by delta^2/2, which makes it absolutely convex
    (it then dominates delta * |x| with slopes bounded by delta)."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    delta = float(delta)

    def value(x):
        t = float(x[0])
        if abs(t) <= delta:
            return 0.5 * t * t + 0.5 * delta * delta
        return delta * (abs(t) - 0.5 * delta) + 0.5 * delta * delta

    def subgrad(x):
        t = float(x[0])
        return np.array([np.clip(t, -delta, delta)])

    return AbsConvexFunction(1, value, subgrad, grad_bound=delta,
                             name=f"huber_lifted(delta={delta:g})")


def pseudo_huber(delta):
    """delta * sqrt(1 + x^2/delta^2); slopes bounded by 1."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    delta = float(delta)

    def value(x):
        t = float(x[0])
        return delta * float(np.sqrt(1.0 + (t / delta) ** 2))

    def subgrad(x):
        t = float(x[0])
        return np.array([t / (delta * float(np.sqrt(1.0 + (t / delta) ** 2)))])

    return AbsConvexFunction(1, value, subgrad, grad_bound=1.0,
                             name=f"pseudo_huber(delta={delta:g})")


def sqrt_quad(a, b):
    """sqrt(a x^2 + b) for a > 0, b >= 0; equals sqrt(a)|x| when b = 0."""
    if a <= 0 or b < 0:
        raise ValueError("need a > 0 and b >= 0")
    a = float(a)
    b = float(b)

    def value(x):
        t = float(x[0])
        return float(np.sqrt(a * t * t + b))

    def subgrad(x):
        t = float(x[0])
        if t == 0.0 and b == 0.0:
            return np.array([0.0])
        return np.array([a * t / float(np.sqrt(a * t * t + b))])

    return AbsConvexFunction(1, value, subgrad,
                             grad_bound=float(np.sqrt(a)),
                             name=f"sqrt_quad(a={a:g},b={b:g})")


# ---------------------------------------------------------------------------
# Calculus
# ---------------------------------------------------------------------------


def add_constant(phi, alpha):
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    return AbsConvexFunction(
        phi.dim, lambda x: phi.value(x) + alpha, phi.subgrad,
        grad_bound=phi.grad_bound, name=f"{phi.name}+{alpha:g}",
    )


def scale(phi, alpha):
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    return AbsConvexFunction(
        phi.dim, lambda x: alpha * phi.value(x),
        lambda x: alpha * phi.subgrad(x),
        grad_bound=None if phi.grad_bound is None else alpha * phi.grad_bound,
        name=f"{alpha:g}*{phi.name}",
    )


def add(phi1, phi2):
    if phi1.dim != phi2.dim:
        raise DimensionMismatch("dimension mismatch in sum")
    bound = None
    if phi1.grad_bound is not None and phi2.grad_bound is not None:
        bound = phi1.grad_bound + phi2.grad_bound
    return AbsConvexFunction(
        phi1.dim, lambda x: phi1.value(x) + phi2.value(x),
        lambda x: phi1.subgrad(x) + phi2.subgrad(x),
        grad_bound=bound, name=f"{phi1.name}+{phi2.name}",
    )


def precompose_affine(phi, A, b=None):
    """psi(x) = phi(A x + b)."""
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    if A.shape[0] != phi.dim:
        raise DimensionMismatch("A rows must match the inner dimension")
    if b is None:
        b = np.zeros(phi.dim)
    b = np.asarray(b, dtype=float).reshape(phi.dim)
    bound = None
    if phi.grad_bound is not None:
        bound = phi.grad_bound * float(np.sqrt(cv.spectral_norm_sq(A)))
    return AbsConvexFunction(
        A.shape[1],
        lambda x: phi.value(A @ x + b),
        lambda x: A.T @ phi.subgrad(A @ x + b),
        grad_bound=bound, name=f"{phi.name}@affine",
    )


def max_with_constant(phi, alpha):
    """max(phi, alpha) with subgradient zero on the flat region."""

    def value(x):
        return max(phi.value(x), alpha)

    def subgrad(x):
        if phi.value(x) > alpha:
            return phi.subgrad(x)
        return np.zeros(phi.dim)

    return AbsConvexFunction(phi.dim, value, subgrad,
                             grad_bound=phi.grad_bound,
                             name=f"max({phi.name},{alpha:g})")


# ---------------------------------------------------------------------------
# Sum of squares and the interval lift
# ---------------------------------------------------------------------------


def sum_of_squares_problem(phis, name="sum_of_squares", lower_bound=0.0):
    """Objective (1/n) sum phi_i^2 with curvature (2/n) sum g_i g_i^T.

    The single-term case keeps the rank-one structure (enabling the
    closed-form projection); larger sums collapse to a dense matrix.
    """
    if not phis:
        raise ValueError("need at least one function")
    d = phis[0].dim
    if any(phi.dim != d for phi in phis):
        raise DimensionMismatch("all functions must share one dimension")
    n = len(phis)

    def f(x):
        return sum(phi.value(x) ** 2 for phi in phis) / n

    def grad(x):
        g = np.zeros(d)
        for phi in phis:
            g += phi.value(x) * phi.subgrad(x)
        return (2.0 / n) * g

    if n == 1:
        def map_fn(x):
            return RankOne(2.0, phis[0].subgrad(x))
    else:
        def map_fn(x):
            m = np.zeros((d, d))
            for phi in phis:
                s = phi.subgrad(x)
                m += np.outer(s, s)
            return Dense((2.0 / n) * m)

    model = cv.CurvatureModel(map_fn, structure_tag="rank-one" if n == 1
                              else "dense")
    return Objective(dim=d, f=f, grad=grad, model=model, name=name,
                     meta={"n_terms": n, "lower_bound": lower_bound})


def lift_on_interval(f, fprime, a, b):
    """Smallest certified lift beta making f + beta absolutely convex on
    [a, b]: beta = alpha (b - a)/2 - (f(a) + f(b))/2 with alpha the larger
    endpoint slope magnitude."""
    if a >= b:
        raise ValueError("need a < b")
    alpha = max(abs(fprime(a)), abs(fprime(b)))
    return alpha * (b - a) / 2.0 - (f(a) + f(b)) / 2.0
