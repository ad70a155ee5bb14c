"""Curvature models: point -> PSD matrix maps with optional smoothness excess.

A model packages the mapping C(.) that strengthens convexity in the lower
bound

    f(x) >= f(y) + <grad f(y), x - y> + 1/2 ||x - y||^2_{C(y)}

together with the scalar excess L completing the matching upper bound with
metric C(y) + L*I, when such an L is claimed. This module provides the
calculus (sums, scaling, affine precomposition) and the catalog of concrete
mappings; the pairing with actual objective functions lives in
:mod:`lcdopt.objectives`.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch
from .matrices import Dense, Diagonal, RankOne, ScaledIdentity, Zero

# Points closer to the origin than this hit the 1/||x|| singularities of the
# norm-based maps; the mapping returns Zero there (the lower bound holds
# trivially with zero curvature).
ORIGIN_CUTOFF = 1e-300


class CurvatureModel:
    """A curvature mapping plus optional smoothness excess.

    constant=True marks maps that do not depend on the evaluation point
    (solvers may then pair them with quadratic objectives for one-step
    reference solves).
    """

    __slots__ = ("_map", "excess", "constant", "structure_tag")

    def __init__(self, map_fn, excess=None, constant=False, structure_tag=""):
        if excess is not None and excess < 0:
            raise ValueError("excess must be >= 0 when present")
        self._map = map_fn
        self.excess = excess
        self.constant = bool(constant)
        self.structure_tag = structure_tag

    def __call__(self, x):
        return self._map(np.asarray(x, dtype=float))


def zero_model(excess=None):
    return CurvatureModel(lambda x: Zero(x.shape[0]), excess=excess,
                          constant=True, structure_tag="zero")


def constant_model(mat, excess=None):
    return CurvatureModel(lambda x: mat, excess=excess, constant=True,
                          structure_tag=type(mat).__name__.lower())


def sum_models(m1, m2):
    """Pointwise sum; excesses add when both are known."""
    excess = None
    if m1.excess is not None and m2.excess is not None:
        excess = m1.excess + m2.excess
    return CurvatureModel(
        lambda x: m1(x).add(m2(x)),
        excess=excess,
        constant=m1.constant and m2.constant,
        structure_tag="sum",
    )


def scale_model(m, beta):
    if beta < 0:
        raise ValueError("beta must be >= 0")
    if beta == 0.0:
        return zero_model(excess=0.0 if m.excess is not None else None)
    return CurvatureModel(
        lambda x: m(x).scale(beta),
        excess=None if m.excess is None else beta * m.excess,
        constant=m.constant,
        structure_tag=m.structure_tag,
    )


def spectral_norm_sq(A):
    """Largest eigenvalue of A^T A (exact dense computation)."""
    A = np.asarray(A, dtype=float)
    return float(np.linalg.eigvalsh(A.T @ A)[-1])


def affine_precompose(m, A, b=None):
    """Model for y -> f(A y + b) given a model for f.

    The mapping becomes A^T C(A y + b) A; a known excess L propagates as
    L * lambda_max(A^T A) since ||A u||^2 <= lambda_max ||u||^2.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise DimensionMismatch("A must be a matrix")
    if b is None:
        b = np.zeros(A.shape[0])
    b = np.asarray(b, dtype=float)
    if b.shape != (A.shape[0],):
        raise DimensionMismatch("b must match the row count of A")
    excess = None
    if m.excess is not None:
        excess = m.excess * spectral_norm_sq(A)
    return CurvatureModel(
        lambda y: m(A @ y + b).congruent(A),
        excess=excess,
        constant=m.constant,
        structure_tag="precomposed",
    )


# ---------------------------------------------------------------------------
# Catalog. The 1-D building blocks are vectorized coordinatewise (Diagonal
# output) so separable sums can reuse them directly.
# ---------------------------------------------------------------------------


def huber_sq_model(delta):
    """Curvature of the squared Huber loss: x^2 inside the branch point,
    delta^2 outside, with excess 2*delta^2 (tighter than the 3*delta^2
    smoothness constant)."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    d2 = float(delta) ** 2

    def map_fn(x):
        return Diagonal(np.minimum(x * x, d2))

    return CurvatureModel(map_fn, excess=2.0 * d2, structure_tag="diagonal")


def pnorm_sq_diag_model(p, d):
    """Diagonal curvature of the squared p-norm, excess 2(p-1)."""
    if p < 2:
        raise ValueError("p must be >= 2")
    p = float(p)

    def map_fn(x):
        ax = np.abs(x)
        norm = float(np.sum(ax ** p)) ** (1.0 / p)
        if norm < ORIGIN_CUTOFF:
            return Zero(x.shape[0])
        return Diagonal(2.0 * (ax / norm) ** (p - 2.0))

    return CurvatureModel(map_fn, excess=2.0 * (p - 1.0),
                          structure_tag="diagonal")


def pnorm_gradient(x, p):
    """The subgradient selection x_i |x_i|^{p-2} / ||x||_p^{p-1} (zero at 0)."""
    ax = np.abs(x)
    norm = float(np.sum(ax ** p)) ** (1.0 / p)
    if norm < ORIGIN_CUTOFF:
        return np.zeros(x.shape[0])
    return np.sign(x) * (ax / norm) ** (p - 1.0)


def pnorm_sq_rank1_model(p, d):
    """Rank-one curvature 2 * grad ||x||_p grad^T of the squared p-norm.

    Valid for p >= 1 via absolute convexity of the norm; the excess
    2(p-1) is attached only for p >= 2 where the squared norm is smooth.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    p = float(p)

    def map_fn(x):
        if float(np.linalg.norm(x)) < ORIGIN_CUTOFF:
            return Zero(x.shape[0])
        return RankOne(2.0, pnorm_gradient(x, p))

    excess = 2.0 * (p - 1.0) if p >= 2 else None
    return CurvatureModel(map_fn, excess=excess, structure_tag="rank-one")


def lpp_model(p, d, variant="diag", f_value=None):
    """Lower-bound curvature for the p-th power of the p-norm.

    Two choices: the diagonal 1/(p-1) fraction of the Hessian, or the
    rank-one 1/(p f(x)) grad grad^T. No excess is attached (the function
    is not globally smooth for p > 2).
    """
    if p < 2:
        raise ValueError("p must be >= 2")
    p = float(p)
    if f_value is None:
        def f_value(x):
            return float(np.sum(np.abs(x) ** p))

    if variant == "diag":
        def map_fn(x):
            return Diagonal(p * np.abs(x) ** (p - 2.0))

        return CurvatureModel(map_fn, structure_tag="diagonal")
    if variant == "rank1":
        def map_fn(x):
            fx = f_value(x)
            if fx < ORIGIN_CUTOFF:
                return Zero(x.shape[0])
            grad = p * np.sign(x) * np.abs(x) ** (p - 1.0)
            return RankOne(1.0 / (p * fx), grad)

        return CurvatureModel(map_fn, structure_tag="rank-one")
    raise ValueError(f"unknown variant {variant!r}")


def two_norm_pow_model(p, variant="identity"):
    """Lower-bound curvature for ||x||_2^p: p||x||^{p-2} I or
    p||x||^{p-4} x x^T."""
    if p < 2:
        raise ValueError("p must be >= 2")
    p = float(p)

    if variant == "identity":
        def map_fn(x):
            nrm = float(np.linalg.norm(x))
            if nrm < ORIGIN_CUTOFF and p != 2.0:
                return Zero(x.shape[0])
            return ScaledIdentity(p * nrm ** (p - 2.0), x.shape[0])

        return CurvatureModel(map_fn, structure_tag="scaled-identity")
    if variant == "rank1":
        def map_fn(x):
            nrm = float(np.linalg.norm(x))
            if nrm < ORIGIN_CUTOFF:
                return Zero(x.shape[0])
            return RankOne(p * nrm ** (p - 4.0), x)

        return CurvatureModel(map_fn, structure_tag="rank-one")
    raise ValueError(f"unknown variant {variant!r}")


def quadratic_model(G):
    """Constant curvature 2G with zero excess for the G-metric square norm."""
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise DimensionMismatch("G must be square")
    sym = 0.5 * (G + G.T)
    vals = np.linalg.eigvalsh(sym)
    if vals[0] < -1e-12 * max(1.0, float(vals[-1])):
        raise ValueError("G is not positive semidefinite")
    if float(np.max(np.abs(sym))) == 0.0:
        return zero_model(excess=0.0)
    return constant_model(Dense(2.0 * sym), excess=0.0)


def strong_convexity_model(mu, d, excess=None):
    """Constant mu*I curvature from mu-strong convexity."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    return constant_model(ScaledIdentity(float(mu), d), excess=excess)


def sqrt_quartic_model(a, b):
    """Curvature 2 a x^2 / sqrt(a x^4 + b) with excess sqrt(8a),
    vectorized coordinatewise."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    a = float(a)
    b = float(b)

    def map_fn(x):
        return Diagonal(2.0 * a * x * x / np.sqrt(a * x ** 4 + b))

    return CurvatureModel(map_fn, excess=float(np.sqrt(8.0 * a)),
                          structure_tag="diagonal")
