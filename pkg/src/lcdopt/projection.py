"""Projections onto the localization set.

Given an iterate x with gradient g, curvature matrix C and optimality gap
delta, the localization set is

    { z : f(x) + <g, z - x> + 1/2 ||z - x||^2_C <= f_star }.

The Euclidean projection has the parametric form
x - beta [I + beta C]^{-1} g where beta > 0 solves the scalar equation
H(beta) = 0; H is convex, strictly decreasing, positive at zero, so Newton
from zero converges monotonically. Zero, scaled-identity and
gradient-aligned rank-one curvature admit closed forms and are dispatched
before the eigendecomposition path. The variable-metric (C-norm)
projection has a closed form for any invertible C.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from ._backend import eval_h as _eval_h_kernel
from ._backend import newton_beta as _newton_kernel
from .errors import ArgumentNegative, Degenerate, ZeroGradient
from .matrices import (
    EIG_ZERO_REL,
    NULL_COMPONENT_REL,
    CurvatureMatrix,
    Dense,
    Diagonal,
    RankOne,
    ScaledIdentity,
)

# Slack on the infinite-multiplier detection, relative to 1 + gap.
INFINITE_DETECT_REL = 1e-10
# Pre-clamp square-root arguments below this signal an invalid pairing.
ARG_HARD_FLOOR = -1e-6
DEFAULT_MAX_ITERS = 100


@dataclasses.dataclass(frozen=True)
class ProjectionInput:
    x: np.ndarray
    g: np.ndarray
    C: CurvatureMatrix
    gap: float


@dataclasses.dataclass(frozen=True)
class BetaSolution:
    beta: float  # math.inf when the constrained solution is the full step
    newton_iters: int
    residual: float


def eval_H(beta, gt, D, delta):
    """H(beta) and H'(beta) for eigenbasis gradient gt and eigenvalues D."""
    g2 = np.ascontiguousarray(np.asarray(gt, dtype=float) ** 2)
    D = np.ascontiguousarray(D, dtype=float)
    return _eval_h_kernel(float(beta), g2, D, float(delta))


def polyak_point(x, g, gap):
    """Projection onto the zero-curvature halfspace (the classical step)."""
    gn2 = float(g @ g)
    if gn2 == 0.0:
        if gap > 0.0:
            raise ZeroGradient("zero gradient with positive gap; the "
                               "optimal value looks wrong")
        return x
    return x - (gap / gn2) * g


def _infinite_tail(g2, D, delta):
    """Tail limit of H when the gradient lies in the positive eigenspace;
    None when a finite root must exist."""
    total = float(np.sum(g2))
    dmax = float(np.max(D)) if D.size else 0.0
    if dmax <= 0.0:
        return None
    active = D > EIG_ZERO_REL * dmax
    null_mass = float(np.sum(g2[~active]))
    if null_mass > (NULL_COMPONENT_REL ** 2) * total:
        return None
    return delta - 0.5 * float(np.sum(g2[active] / D[active]))


def find_beta(gt, D, delta, tol=None, max_iters=DEFAULT_MAX_ITERS):
    """Positive root of H, or the infinite-multiplier solution.

    Newton from zero increases monotonically (H is convex and
    decreasing); if it stalls short of the tolerance, a doubling bracket
    plus bisection finishes the job.
    """
    gt = np.asarray(gt, dtype=float)
    D = np.ascontiguousarray(D, dtype=float)
    if delta <= 0.0:
        raise Degenerate("the iterate already lies in the localization set")
    g2 = np.ascontiguousarray(gt * gt)
    if float(np.sum(g2)) == 0.0:
        raise ZeroGradient("zero gradient with positive gap")
    if tol is None:
        tol = 1e-12 * max(1.0, delta)
    tail = _infinite_tail(g2, D, delta)
    if tail is not None and tail >= -INFINITE_DETECT_REL * (1.0 + delta):
        return BetaSolution(math.inf, 0, tail)
    beta, iters, resid = _newton_kernel(g2, D, float(delta), float(tol),
                                        int(max_iters))
    if abs(resid) > tol:
        beta, extra, resid = _bisect_beta(g2, D, delta, tol, beta)
        iters += extra
    return BetaSolution(float(beta), int(iters), float(resid))


def _bisect_beta(g2, D, delta, tol, lo):
    """Bracketed bisection refinement; lo must satisfy H(lo) >= 0."""
    h_lo, _ = _eval_h_kernel(lo, g2, D, delta)
    if h_lo < 0.0:
        lo = 0.0
    hi = max(1.0, 2.0 * lo)
    for _ in range(300):
        h_hi, _ = _eval_h_kernel(hi, g2, D, delta)
        if h_hi < 0.0:
            break
        hi *= 2.0
    else:
        raise RuntimeError("failed to bracket the root of H")
    steps = 0
    mid = 0.5 * (lo + hi)
    h_mid = delta
    for steps in range(1, 201):
        mid = 0.5 * (lo + hi)
        h_mid, _ = _eval_h_kernel(mid, g2, D, delta)
        if abs(h_mid) <= tol or (hi - lo) <= 1e-15 * (1.0 + hi):
            break
        if h_mid > 0.0:
            lo = mid
        else:
            hi = mid
    return mid, steps, h_mid


def _effectively_zero(C):
    if C.is_zero:
        return True
    if isinstance(C, ScaledIdentity):
        return C.c == 0.0
    if isinstance(C, Diagonal):
        return not np.any(C.d > 0.0)
    if isinstance(C, RankOne):
        return C.w * float(C.v @ C.v) == 0.0
    if isinstance(C, Dense):
        return not np.any(C.m)
    return False


def lcd2_project(inp, tol=None):
    """Euclidean projection onto the localization set.

    Returns (projected point, inner Newton iterations). Dispatch order:
    degenerate gap, zero curvature (classical step), scaled identity and
    gradient-aligned rank-one closed forms, then the eigendecomposition
    plus root-finding path.
    """
    x = np.asarray(inp.x, dtype=float)
    g = np.asarray(inp.g, dtype=float)
    if inp.gap <= 0.0:
        return x, 0
    C = inp.C
    if _effectively_zero(C):
        return polyak_point(x, g, inp.gap), 0
    if isinstance(C, ScaledIdentity):
        return _project_scaled_identity(x, g, C.c, inp.gap), 0
    if isinstance(C, RankOne):
        aligned = _aligned_rank_one(C, g)
        if aligned is not None:
            return _project_rank_one(x, g, aligned, inp.gap), 0
    return _project_general(x, g, C, inp.gap, tol)


def _project_scaled_identity(x, g, c, gap):
    gn2 = float(g @ g)
    if gn2 == 0.0:
        raise ZeroGradient("zero gradient with positive gap")
    # ||g||^2_{C^{-1}} = ||g||^2 / c; the infinite-multiplier branch is the
    # plain inverse-curvature step.
    if gap - 0.5 * gn2 / c >= -INFINITE_DETECT_REL * (1.0 + gap):
        return x - g / c
    arg = 1.0 - 2.0 * c * gap / gn2
    gamma = (1.0 - math.sqrt(arg)) / c
    return x - gamma * g


def _aligned_rank_one(C, g):
    """Top eigenvalue of C when its direction is parallel to g, else None."""
    vn2 = float(C.v @ C.v)
    lam = C.w * vn2
    if lam <= 0.0:
        return None
    gn = float(np.linalg.norm(g))
    vn = math.sqrt(vn2)
    if gn == 0.0:
        raise ZeroGradient("zero gradient with positive gap")
    if abs(float(C.v @ g)) < (1.0 - 1e-12) * vn * gn:
        return None
    return lam


def _project_rank_one(x, g, lam, gap):
    # With curvature lam along the gradient direction the constraint is a
    # quadratic in the multiplier; writing f_eff = ||g||^2 / (2 lam) the
    # step matches the sum-of-squares closed form
    # x - 2 (f - sqrt(f f_star)) / ||g||^2 * g.
    gn2 = float(g @ g)
    f_eff = 0.5 * gn2 / lam
    if gap - f_eff >= -INFINITE_DETECT_REL * (1.0 + gap):
        return x - g / lam
    fstar_eff = max(f_eff - gap, 0.0)
    gamma = 2.0 * (f_eff - math.sqrt(f_eff * fstar_eff)) / gn2
    return x - gamma * g


def _project_general(x, g, C, gap, tol):
    eig = C.eigendecompose()
    gt = eig.Q.T @ g
    sol = find_beta(gt, eig.D, gap, tol=tol)
    if math.isinf(sol.beta):
        dmax = float(np.max(eig.D))
        keep = eig.D > EIG_ZERO_REL * dmax
        u = np.zeros_like(gt)
        u[keep] = gt[keep] / eig.D[keep]
        return x - eig.Q @ u, sol.newton_iters
    step = sol.beta * (eig.Q @ (gt / (1.0 + sol.beta * eig.D)))
    return x - step, sol.newton_iters


def lcd3_project(inp):
    """Projection in the metric of the curvature matrix itself.

    Closed form: step gamma * C^{-1} g with
    gamma = 1 - sqrt(1 - 2 gap / ||g||^2_{C^{-1}}). Co-coercivity keeps
    the square-root argument nonnegative for any valid pairing, so
    arguments below -1e-6 are rejected rather than clamped.
    """
    x = np.asarray(inp.x, dtype=float)
    g = np.asarray(inp.g, dtype=float)
    if inp.gap <= 0.0:
        return x, 0
    gn = float(np.linalg.norm(g))
    if gn == 0.0:
        raise ZeroGradient("zero gradient with positive gap")
    s = inp.C.inv_quad_form(g)  # raises SingularAlongGradient when stuck
    if s == 0.0:
        # the inverse-metric norm underflowed; the iterate is numerically
        # stationary in this metric
        return x, 0
    arg = 1.0 - 2.0 * inp.gap / s
    if arg < ARG_HARD_FLOOR:
        raise ArgumentNegative(
            f"square-root argument {arg:.3e}; either the curvature mapping "
            "does not lower-bound this objective, or the supplied optimal "
            "value sits below the reachable precision (set f_tol to stop "
            "at the reference accuracy)"
        )
    gamma = 1.0 - math.sqrt(min(max(arg, 0.0), 1.0))
    return x - gamma * inp.C.pinv_apply(g), 0
