"""NumPy fallback for the projection root-finding kernels.

Same contract as the compiled extension: ``eval_h`` evaluates the scalar
constraint function and its derivative at one multiplier value, and
``newton_beta`` runs the damped-free Newton iteration from zero. Selected
by :mod:`lcdopt._backend` when the compiled module is unavailable or
explicitly disabled.
"""

import numpy as np

BACKEND = "python"


def eval_h(beta, g2, dvals, delta):
    """Constraint function H and derivative H' at multiplier beta.

    g2 holds the squared eigenbasis gradient components, dvals the
    (nonnegative) eigenvalues.
    """
    q = 1.0 + beta * dvals
    h = 0.5 * beta * beta * float(np.sum(g2 * dvals / (q * q)))
    h -= beta * float(np.sum(g2 / q))
    h += delta
    hp = -float(np.sum(g2 / (q * q * q)))
    return h, hp


def newton_beta(g2, dvals, delta, tol, max_iters):
    """Newton iteration for the positive root of H, started at beta = 0.

    H is convex and strictly decreasing with H(0) = delta > 0, so the
    iterates increase monotonically towards the root. Returns
    (beta, iterations, residual); a residual above tol means the
    iteration stalled and the caller should fall back to bisection.
    """
    beta = 0.0
    h = delta
    for it in range(1, max_iters + 1):
        h, hp = eval_h(beta, g2, dvals, delta)
        if abs(h) <= tol:
            return beta, it - 1, h
        if hp >= 0.0:
            break
        new_beta = beta - h / hp
        if not np.isfinite(new_beta) or abs(new_beta - beta) < 1e-16:
            break
        beta = new_beta
    h, _ = eval_h(beta, g2, dvals, delta)
    return beta, max_iters, h
