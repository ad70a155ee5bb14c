"""Structured symmetric PSD matrices used as per-iterate curvature.

Five variants are supported: zero, scaled identity, diagonal, rank-one
(w * v v^T) and dense symmetric. Every solver step only needs quadratic
forms, shifted solves (M + s*I)^{-1} g, inverse-metric quadratic forms and
eigendecompositions, so that is the whole interface. Non-dense variants
run in O(d).

All matrices are immutable after construction; operations are pure.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    DimensionMismatch,
    NotPositiveSemidefinite,
    SingularAlongGradient,
    SingularSystem,
)

# Relative threshold below which an eigenvalue counts as zero.
EIG_ZERO_REL = 1e-12
# Relative norm of a null-space component above which a solve is refused.
NULL_COMPONENT_REL = 1e-8


class EigenDecomposition:
    """Orthogonal Q and nonnegative eigenvalues D with M = Q diag(D) Q^T."""

    __slots__ = ("Q", "D")

    def __init__(self, Q, D):
        self.Q = Q
        self.D = D


def _as_vector(v, dim=None):
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise DimensionMismatch(f"expected a vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {v.shape[0]}")
    return v


class CurvatureMatrix:
    """Base class; concrete variants implement the structured fast paths."""

    dim: int

    def _check_dim(self, v):
        return _as_vector(v, self.dim)

    # -- interface -------------------------------------------------------

    def quad_form(self, v):
        """<M v, v>."""
        raise NotImplementedError

    def matvec(self, v):
        raise NotImplementedError

    def shifted_solve(self, s, g):
        """Solve (M + s*I) u = g.

        Requires s > 0, or M positive definite along g when s == 0.
        """
        raise NotImplementedError

    def inv_quad_form(self, g):
        """<M^{-1} g, g> with eigenvalues below the zero threshold treated
        as exact zeros; raises SingularAlongGradient when g has a
        significant null-space component."""
        raise NotImplementedError

    def pinv_apply(self, g):
        """M^+ g restricted to the range of M; raises SingularAlongGradient
        when g has a significant null-space component."""
        raise NotImplementedError

    def eigendecompose(self):
        raise NotImplementedError

    def dense(self):
        """Materialize the represented matrix (oracle / slow path)."""
        raise NotImplementedError

    def add(self, other):
        """Structured sum; collapses to the tightest common variant."""
        raise NotImplementedError

    def scale(self, beta):
        if beta < 0:
            raise ValueError("scale factor must be nonnegative")
        if beta == 0.0:
            return Zero(self.dim)
        return self._scale_positive(beta)

    def _scale_positive(self, beta):
        raise NotImplementedError

    def congruent(self, A):
        """A^T M A for an (dim x m) matrix A, preserving structure when
        possible."""
        raise NotImplementedError

    @property
    def is_zero(self):
        return False

    # -- shared helpers ---------------------------------------------------

    def _null_checked_components(self, g):
        """Split g into eigenbasis components, verifying it lies in the
        range of M. Returns (Q, D, g_tilde, keep_mask)."""
        eig = self.eigendecompose()
        gt = eig.Q.T @ g
        dmax = float(np.max(eig.D)) if eig.D.size else 0.0
        keep = eig.D > EIG_ZERO_REL * dmax if dmax > 0 else np.zeros(self.dim, bool)
        gnorm = float(np.linalg.norm(g))
        if gnorm > 0:
            null_norm = float(np.linalg.norm(gt[~keep]))
            if null_norm > NULL_COMPONENT_REL * gnorm:
                raise SingularAlongGradient(
                    f"gradient has a null-space component of relative size "
                    f"{null_norm / gnorm:.3e}"
                )
        return eig.Q, eig.D, gt, keep


class Zero(CurvatureMatrix):
    __slots__ = ("dim",)

    def __init__(self, dim):
        if dim < 1:
            raise DimensionMismatch("dim must be >= 1")
        self.dim = int(dim)

    def quad_form(self, v):
        self._check_dim(v)
        return 0.0

    def matvec(self, v):
        self._check_dim(v)
        return np.zeros(self.dim)

    def shifted_solve(self, s, g):
        g = self._check_dim(g)
        if s <= 0:
            raise SingularSystem("zero matrix with zero shift is singular")
        return g / s

    def inv_quad_form(self, g):
        g = self._check_dim(g)
        if float(np.linalg.norm(g)) == 0.0:
            return 0.0
        raise SingularAlongGradient("zero matrix has empty range")

    def pinv_apply(self, g):
        g = self._check_dim(g)
        if float(np.linalg.norm(g)) == 0.0:
            return np.zeros(self.dim)
        raise SingularAlongGradient("zero matrix has empty range")

    def eigendecompose(self):
        return EigenDecomposition(np.eye(self.dim), np.zeros(self.dim))

    def dense(self):
        return np.zeros((self.dim, self.dim))

    def add(self, other):
        if other.dim != self.dim:
            raise DimensionMismatch("dimension mismatch in matrix sum")
        return other

    def _scale_positive(self, beta):
        return self

    def congruent(self, A):
        A = np.asarray(A, dtype=float)
        return Zero(A.shape[1])

    @property
    def is_zero(self):
        return True


class ScaledIdentity(CurvatureMatrix):
    __slots__ = ("dim", "c")

    def __init__(self, c, dim):
        if c < 0:
            raise NotPositiveSemidefinite("scaled identity needs c >= 0")
        self.c = float(c)
        self.dim = int(dim)

    def quad_form(self, v):
        v = self._check_dim(v)
        return self.c * float(v @ v)

    def matvec(self, v):
        v = self._check_dim(v)
        return self.c * v

    def shifted_solve(self, s, g):
        g = self._check_dim(g)
        if self.c + s <= 0:
            raise SingularSystem("c + s must be positive")
        return g / (self.c + s)

    def inv_quad_form(self, g):
        g = self._check_dim(g)
        if self.c == 0.0:
            return Zero(self.dim).inv_quad_form(g)
        return float(g @ g) / self.c

    def pinv_apply(self, g):
        g = self._check_dim(g)
        if self.c == 0.0:
            return Zero(self.dim).pinv_apply(g)
        return g / self.c

    def eigendecompose(self):
        return EigenDecomposition(np.eye(self.dim), np.full(self.dim, self.c))

    def dense(self):
        return self.c * np.eye(self.dim)

    def add(self, other):
        if other.dim != self.dim:
            raise DimensionMismatch("dimension mismatch in matrix sum")
        if other.is_zero:
            return self
        if isinstance(other, ScaledIdentity):
            return ScaledIdentity(self.c + other.c, self.dim)
        if isinstance(other, Diagonal):
            return Diagonal(self.c + other.d)
        return Dense(self.dense() + other.dense())

    def _scale_positive(self, beta):
        return ScaledIdentity(beta * self.c, self.dim)

    def congruent(self, A):
        A = np.asarray(A, dtype=float)
        if A.shape == (1, 1):
            return ScaledIdentity(self.c * A[0, 0] ** 2, 1)
        return Dense(self.c * (A.T @ A))


class Diagonal(CurvatureMatrix):
    __slots__ = ("dim", "d")

    def __init__(self, d):
        d = _as_vector(d)
        if np.any(d < 0):
            raise NotPositiveSemidefinite("diagonal entries must be >= 0")
        self.d = d
        self.dim = d.shape[0]

    def quad_form(self, v):
        v = self._check_dim(v)
        return float(np.sum(self.d * v * v))

    def matvec(self, v):
        v = self._check_dim(v)
        return self.d * v

    def shifted_solve(self, s, g):
        g = self._check_dim(g)
        denom = self.d + s
        if np.any(denom <= 0):
            raise SingularSystem("diagonal shift leaves zero pivots")
        return g / denom

    def inv_quad_form(self, g):
        g = self._check_dim(g)
        dmax = float(np.max(self.d)) if self.dim else 0.0
        keep = self.d > EIG_ZERO_REL * dmax if dmax > 0 else np.zeros(self.dim, bool)
        gnorm = float(np.linalg.norm(g))
        if gnorm > 0:
            null_norm = float(np.linalg.norm(g[~keep]))
            if null_norm > NULL_COMPONENT_REL * gnorm:
                raise SingularAlongGradient(
                    "gradient lies partly outside the diagonal range"
                )
        return float(np.sum(g[keep] ** 2 / self.d[keep]))

    def pinv_apply(self, g):
        g = self._check_dim(g)
        dmax = float(np.max(self.d)) if self.dim else 0.0
        keep = self.d > EIG_ZERO_REL * dmax if dmax > 0 else np.zeros(self.dim, bool)
        gnorm = float(np.linalg.norm(g))
        if gnorm > 0:
            null_norm = float(np.linalg.norm(g[~keep]))
            if null_norm > NULL_COMPONENT_REL * gnorm:
                raise SingularAlongGradient(
                    "gradient lies partly outside the diagonal range"
                )
        u = np.zeros(self.dim)
        u[keep] = g[keep] / self.d[keep]
        return u

    def eigendecompose(self):
        return EigenDecomposition(np.eye(self.dim), self.d.copy())

    def dense(self):
        return np.diag(self.d)

    def add(self, other):
        if other.dim != self.dim:
            raise DimensionMismatch("dimension mismatch in matrix sum")
        if other.is_zero:
            return self
        if isinstance(other, ScaledIdentity):
            return Diagonal(self.d + other.c)
        if isinstance(other, Diagonal):
            return Diagonal(self.d + other.d)
        return Dense(self.dense() + other.dense())

    def _scale_positive(self, beta):
        return Diagonal(beta * self.d)

    def congruent(self, A):
        A = np.asarray(A, dtype=float)
        if A.ndim == 2 and A.shape[0] == A.shape[1] and np.count_nonzero(
            A - np.diag(np.diagonal(A))
        ) == 0:
            return Diagonal(np.diagonal(A) ** 2 * self.d)
        return Dense(A.T @ self.dense() @ A)


class RankOne(CurvatureMatrix):
    """w * v v^T with w >= 0."""

    __slots__ = ("dim", "w", "v")

    def __init__(self, w, v):
        if w < 0:
            raise NotPositiveSemidefinite("rank-one weight must be >= 0")
        self.w = float(w)
        self.v = _as_vector(v)
        self.dim = self.v.shape[0]

    def quad_form(self, v):
        v = self._check_dim(v)
        return self.w * float(self.v @ v) ** 2

    def matvec(self, v):
        v = self._check_dim(v)
        return self.w * float(self.v @ v) * self.v

    def shifted_solve(self, s, g):
        # Rank-one update identity: (s*I + w v v^T)^{-1} g
        #   = g/s - w (v^T g) v / (s (s + w ||v||^2)).
        g = self._check_dim(g)
        if s <= 0:
            return self._solve_unshifted(g)
        vn2 = float(self.v @ self.v)
        return g / s - (self.w * float(self.v @ g) / (s * (s + self.w * vn2))) * self.v

    def _solve_unshifted(self, g):
        vn2 = float(self.v @ self.v)
        lam = self.w * vn2
        gnorm = float(np.linalg.norm(g))
        if lam == 0.0:
            if gnorm == 0.0:
                return np.zeros(self.dim)
            raise SingularSystem("rank-one matrix with zero weight")
        coef = float(self.v @ g) / vn2
        resid = g - coef * self.v
        if gnorm > 0 and float(np.linalg.norm(resid)) > NULL_COMPONENT_REL * gnorm:
            raise SingularSystem("right-hand side outside the rank-one range")
        return (coef / lam) * self.v

    def inv_quad_form(self, g):
        g = self._check_dim(g)
        vn2 = float(self.v @ self.v)
        lam = self.w * vn2
        gnorm = float(np.linalg.norm(g))
        if gnorm == 0.0:
            return 0.0
        if lam == 0.0:
            raise SingularAlongGradient("rank-one matrix has empty range")
        coef = float(self.v @ g) / vn2
        resid = g - coef * self.v
        if float(np.linalg.norm(resid)) > NULL_COMPONENT_REL * gnorm:
            raise SingularAlongGradient(
                "gradient has a component orthogonal to the rank-one range"
            )
        return float(self.v @ g) ** 2 / (self.w * vn2 * vn2)

    def pinv_apply(self, g):
        g = self._check_dim(g)
        vn2 = float(self.v @ self.v)
        lam = self.w * vn2
        gnorm = float(np.linalg.norm(g))
        if gnorm == 0.0:
            return np.zeros(self.dim)
        if lam == 0.0:
            raise SingularAlongGradient("rank-one matrix has empty range")
        coef = float(self.v @ g) / vn2
        resid = g - coef * self.v
        if float(np.linalg.norm(resid)) > NULL_COMPONENT_REL * gnorm:
            raise SingularAlongGradient(
                "gradient has a component orthogonal to the rank-one range"
            )
        return (coef / lam) * self.v

    def eigendecompose(self):
        vn = float(np.linalg.norm(self.v))
        if vn == 0.0 or self.w == 0.0:
            return EigenDecomposition(np.eye(self.dim), np.zeros(self.dim))
        # Householder reflection mapping e1 to v/||v|| gives an orthonormal
        # basis whose first column is the eigenvector.
        u = self.v / vn
        Q = _householder_basis(u)
        D = np.zeros(self.dim)
        D[0] = self.w * vn * vn
        return EigenDecomposition(Q, D)

    def dense(self):
        return self.w * np.outer(self.v, self.v)

    def add(self, other):
        if other.dim != self.dim:
            raise DimensionMismatch("dimension mismatch in matrix sum")
        if other.is_zero:
            return self
        return Dense(self.dense() + other.dense())

    def _scale_positive(self, beta):
        return RankOne(beta * self.w, self.v)

    def congruent(self, A):
        A = np.asarray(A, dtype=float)
        return RankOne(self.w, A.T @ self.v)


def _householder_basis(u):
    """Orthogonal matrix whose first column is the unit vector u."""
    d = u.shape[0]
    sign = 1.0 if u[0] >= 0 else -1.0
    w = u.copy()
    w[0] += sign
    wn2 = float(w @ w)
    if wn2 == 0.0:
        return np.eye(d)
    # The reflection maps e1 to -sign * u, so flip the first column.
    H = np.eye(d) - 2.0 * np.outer(w, w) / wn2
    H[:, 0] *= -sign
    return H


class Dense(CurvatureMatrix):
    """Dense symmetric PSD matrix; symmetrized on construction."""

    __slots__ = ("dim", "m")

    def __init__(self, m):
        m = np.asarray(m, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"expected a square matrix, got {m.shape}")
        self.m = 0.5 * (m + m.T)
        self.dim = m.shape[0]

    def quad_form(self, v):
        v = self._check_dim(v)
        return float(v @ (self.m @ v))

    def matvec(self, v):
        v = self._check_dim(v)
        return self.m @ v

    def shifted_solve(self, s, g):
        g = self._check_dim(g)
        if s > 0:
            return np.linalg.solve(self.m + s * np.eye(self.dim), g)
        Q, D, gt, keep = self._null_checked_components_solve(g)
        u = np.zeros(self.dim)
        u[keep] = gt[keep] / D[keep]
        return Q @ u

    def _null_checked_components_solve(self, g):
        try:
            return self._null_checked_components(g)
        except SingularAlongGradient as exc:
            raise SingularSystem(str(exc)) from exc

    def inv_quad_form(self, g):
        g = self._check_dim(g)
        Q, D, gt, keep = self._null_checked_components(g)
        return float(np.sum(gt[keep] ** 2 / D[keep]))

    def pinv_apply(self, g):
        g = self._check_dim(g)
        Q, D, gt, keep = self._null_checked_components(g)
        u = np.zeros(self.dim)
        u[keep] = gt[keep] / D[keep]
        return Q @ u

    def eigendecompose(self):
        try:
            vals, vecs = np.linalg.eigh(self.m)
        except np.linalg.LinAlgError as exc:
            raise RuntimeError(f"eigensolver failed to converge: {exc}") from exc
        vals = vals[::-1].copy()
        vecs = vecs[:, ::-1].copy()
        vmax = float(np.max(np.abs(vals))) if vals.size else 0.0
        if vals.size and vals[-1] < -EIG_ZERO_REL * vmax:
            raise NotPositiveSemidefinite(
                f"eigenvalue {vals[-1]:.3e} below the PSD tolerance"
            )
        np.maximum(vals, 0.0, out=vals)
        return EigenDecomposition(vecs, vals)

    def dense(self):
        return self.m.copy()

    def add(self, other):
        if other.dim != self.dim:
            raise DimensionMismatch("dimension mismatch in matrix sum")
        if other.is_zero:
            return self
        return Dense(self.m + other.dense())

    def _scale_positive(self, beta):
        return Dense(beta * self.m)

    def congruent(self, A):
        A = np.asarray(A, dtype=float)
        return Dense(A.T @ self.m @ A)
