# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the projection root-finding inner loop.

The Newton iteration on the scalar constraint function runs a handful of
times per solver step and each evaluation is an O(d) reduction, so this is
the one loop worth compiling. The numpy fallback in
``_projection_kernels_py`` implements the identical contract.
"""

from libc.math cimport fabs, isfinite

BACKEND = "cython"


cdef inline void _eval_h_c(double beta, const double[::1] g2,
                           const double[::1] dvals, double delta,
                           double* h_out, double* hp_out) noexcept nogil:
    cdef Py_ssize_t i, n = g2.shape[0]
    cdef double q, s_curv = 0.0, s_lin = 0.0, s_der = 0.0
    for i in range(n):
        q = 1.0 + beta * dvals[i]
        s_curv += g2[i] * dvals[i] / (q * q)
        s_lin += g2[i] / q
        s_der += g2[i] / (q * q * q)
    h_out[0] = 0.5 * beta * beta * s_curv - beta * s_lin + delta
    hp_out[0] = -s_der


def eval_h(double beta, const double[::1] g2, const double[::1] dvals,
           double delta):
    """Constraint function H and derivative H' at multiplier beta."""
    cdef double h, hp
    _eval_h_c(beta, g2, dvals, delta, &h, &hp)
    return h, hp


def newton_beta(const double[::1] g2, const double[::1] dvals, double delta,
                double tol, int max_iters):
    """Newton iteration for the positive root of H, started at beta = 0.

    Returns (beta, iterations, residual); a residual above tol means the
    iteration stalled and the caller should fall back to bisection.
    """
    cdef double beta = 0.0, h = delta, hp = 0.0, new_beta
    cdef int it
    for it in range(1, max_iters + 1):
        _eval_h_c(beta, g2, dvals, delta, &h, &hp)
        if fabs(h) <= tol:
            return beta, it - 1, h
        if hp >= 0.0:
            break
        new_beta = beta - h / hp
        if not isfinite(new_beta) or fabs(new_beta - beta) < 1e-16:
            break
        beta = new_beta
    _eval_h_c(beta, g2, dvals, delta, &h, &hp)
    return beta, max_iters, h
