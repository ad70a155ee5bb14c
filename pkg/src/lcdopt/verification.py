"""Batch verification suites behind ``lcd verify``.

Each suite samples one family of inequalities (curvature bounds, absolute
convexity, root-finder properties, closed-form agreement, solver
reductions) and reports the worst violation against its tolerance. The
acceptance tests re-derive the same quantities independently; these suites
are the product's own self-check.
"""

from __future__ import annotations

import dataclasses
import io
import math

import numpy as np

from . import absconvex as acv
from . import curvature as cv
from . import dataio
from . import objectives as obj_mod
from .matrices import Dense, Diagonal, RankOne, ScaledIdentity, Zero
from .projection import (
    ProjectionInput,
    _project_general,
    eval_H,
    find_beta,
    lcd2_project,
    polyak_point,
)
from .solvers import SolverConfig, run


@dataclasses.dataclass
class SuiteResult:
    name: str
    worst: float
    tol: float
    samples: int
    detail: str = ""

    @property
    def passed(self):
        return self.samples == 0 or self.worst <= self.tol


def _random_matrix(rng, d):
    kind = rng.integers(0, 5)
    if kind == 0:
        return Zero(d)
    if kind == 1:
        return ScaledIdentity(float(rng.uniform(0, 3)), d)
    if kind == 2:
        return Diagonal(rng.uniform(0, 3, size=d))
    if kind == 3:
        return RankOne(float(rng.uniform(0, 3)), rng.standard_normal(d))
    m = rng.standard_normal((d, d))
    return Dense(m @ m.T / d)


def matrix_suite(samples=1000, seed=0):
    """Structured operations against the dense oracle."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        d = int(rng.integers(1, 8))
        M = _random_matrix(rng, d)
        dense = M.dense()
        v = rng.standard_normal(d)
        qf = M.quad_form(v)
        ref = float(v @ (dense @ v))
        worst = max(worst, abs(qf - ref) / (1.0 + abs(ref)))
        s = float(rng.uniform(0.1, 2.0))
        g = rng.standard_normal(d)
        u = M.shifted_solve(s, g)
        resid = float(np.linalg.norm(dense @ u + s * u - g))
        worst = max(worst, resid / (1.0 + float(np.linalg.norm(g))))
        eig = M.eigendecompose()
        worst = max(worst, float(np.max(np.abs(eig.Q.T @ eig.Q - np.eye(d)))))
        recon = eig.Q @ (eig.D[:, None] * eig.Q.T)
        scale = 1.0 + (float(np.max(eig.D)) if d else 0.0)
        worst = max(worst, float(np.max(np.abs(recon - dense))) / scale)
    return SuiteResult("matrix-core", worst, 1e-8, samples)


def curvature_psd_suite(samples=1000, seed=0):
    """Every catalog mapping stays PSD at random points."""
    rng = np.random.default_rng(seed)
    models = [
        ("huber_sq", cv.huber_sq_model(1.0), 3),
        ("pnorm_sq_diag", cv.pnorm_sq_diag_model(3.0, 3), 3),
        ("pnorm_sq_rank1", cv.pnorm_sq_rank1_model(3.0, 3), 3),
        ("lpp_diag", cv.lpp_model(3.0, 3, "diag"), 3),
        ("lpp_rank1", cv.lpp_model(3.0, 3, "rank1"), 3),
        ("two_norm_pow", cv.two_norm_pow_model(4.0, "rank1"), 3),
        ("sqrt_quartic", cv.sqrt_quartic_model(1.0, 1.0), 2),
        ("strong_convexity", cv.strong_convexity_model(0.5, 3), 3),
    ]
    worst = 0.0
    per_model = max(1, samples // len(models)) if samples else 0
    for _, model, d in models:
        for _ in range(per_model):
            x = rng.uniform(-5, 5, size=d)
            z = rng.standard_normal(d)
            q = model(x).quad_form(z)
            worst = max(worst, -q / (1e-12 + float(z @ z)))
    return SuiteResult("curvature-maps", worst, 1e-12, samples)


def bound_suite(objectives, samples=2000, seed=0, tol=1e-9):
    """Both curvature inequalities on sampled pairs, normalized by
    1 + |f(x)|. Returns one result per objective."""
    results = []
    for objective in objectives:
        rng = np.random.default_rng(seed)
        lo, hi = objective.sample_box
        worst = 0.0
        detail = ""
        for _ in range(samples):
            x = rng.uniform(lo, hi, size=objective.dim)
            y = rng.uniform(lo, hi, size=objective.dim)
            scale = 1.0 + abs(objective.f(x))
            v = obj_mod.check_lower_bound(objective, x, y) / scale
            if objective.model.excess is not None:
                v = max(v, obj_mod.check_upper_bound(objective, x, y) / scale)
            if v > worst:
                worst = v
                detail = f"worst pair x={x.round(3)}, y={y.round(3)}"
        results.append(SuiteResult(f"assumption-1[{objective.name}]", worst,
                                   tol, samples, detail))
    return results


def cocoercivity_suite(samples=2000, seed=0):
    """0.5 ||grad f(x) - grad f(y)||^2_{C(x)^-1} >= D_f(x, y) for the
    invertible-curvature catalog entries."""
    rng = np.random.default_rng(seed)
    entries = [
        obj_mod.huber_sq_objective(1.0, 3),
        obj_mod.pnorm_sq_objective(3.0, 3, "diag"),
        obj_mod.lpp_objective(3.0, 3, "diag"),
        obj_mod.gnorm_objective(np.eye(3) * 0.7),
        obj_mod.strongly_convex_objective(0.5, 3),
    ]
    worst = 0.0
    per = max(1, samples // len(entries)) if samples else 0
    for objective in entries:
        lo, hi = objective.sample_box
        for _ in range(per):
            # keep coordinates away from zero where the maps lose rank
            x = rng.uniform(0.2, hi, size=objective.dim) * rng.choice(
                [-1.0, 1.0], size=objective.dim)
            y = rng.uniform(0.2, hi, size=objective.dim) * rng.choice(
                [-1.0, 1.0], size=objective.dim)
            gx, gy = objective.grad(x), objective.grad(y)
            lhs = 0.5 * objective.model(x).inv_quad_form(gx - gy)
            bregman = objective.f(x) - objective.f(y) - float(gy @ (x - y))
            worst = max(worst, (bregman - lhs) / (1.0 + abs(bregman)))
    return SuiteResult("co-coercivity", worst, 1e-9, samples)


def bregman_symmetry_suite(samples=2000, seed=0):
    """<grad f(x) - grad f(y), x - y> >= 0.5 ||x - y||^2_{C(x) + C(y)}."""
    rng = np.random.default_rng(seed)
    entries = [
        obj_mod.huber_sq_objective(1.0, 3),
        obj_mod.pnorm_sq_objective(3.0, 3, "diag"),
        obj_mod.two_norm_pow_objective(4.0, 3, "identity"),
        obj_mod.gnorm_objective(np.eye(3) * 0.7),
    ]
    worst = 0.0
    per = max(1, samples // len(entries)) if samples else 0
    for objective in entries:
        lo, hi = objective.sample_box
        for _ in range(per):
            x = rng.uniform(lo, hi, size=objective.dim)
            y = rng.uniform(lo, hi, size=objective.dim)
            lhs = float((objective.grad(x) - objective.grad(y)) @ (x - y))
            rhs = 0.5 * (objective.model(x).quad_form(x - y)
                         + objective.model(y).quad_form(x - y))
            worst = max(worst, (rhs - lhs) / (1.0 + abs(lhs)))
    return SuiteResult("bregman-symmetrization", worst, 1e-9, samples)


def _absconv_catalog(rng):
    a = rng.standard_normal(3)
    A = rng.standard_normal((3, 3))
    entries = [
        acv.abs_affine(a, 0.7),
        acv.pnorm_acv(1.0, 3),
        acv.pnorm_acv(2.0, 3),
        acv.pnorm_acv(3.0, 3),
        acv.huber_lifted(1.0),
        acv.pseudo_huber(1.0),
        acv.sqrt_quad(2.0, 0.5),
        acv.add(acv.pnorm_acv(2.0, 3), acv.abs_affine(a, 0.0)),
        acv.scale(acv.pnorm_acv(1.0, 3), 2.5),
        acv.add_constant(acv.pnorm_acv(2.0, 3), 1.5),
        acv.precompose_affine(acv.pnorm_acv(2.0, 3), A),
        acv.max_with_constant(acv.pnorm_acv(2.0, 3), 0.8),
    ]
    return entries


def absconv_suite(samples=2000, seed=0):
    """Defining inequality plus bounded subgradients on the catalog."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    entries = _absconv_catalog(rng)
    per = max(1, samples // len(entries)) if samples else 0
    for phi in entries:
        for _ in range(per):
            x = rng.uniform(-10, 10, size=phi.dim)
            y = rng.uniform(-10, 10, size=phi.dim)
            worst = max(worst, acv.check_absolute_convexity(phi, x, y))
            if phi.grad_bound is not None:
                gn = float(np.linalg.norm(phi.subgrad(x)))
                worst = max(worst, gn - phi.grad_bound)
    return SuiteResult("abs-convex", worst, 1e-9, samples)


def hprops_suite(samples=1000, seed=0):
    """Root-finder sanity: H(0) = gap, H decreasing/convex, Newton matches
    bisection."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        d = int(rng.integers(1, 9))
        D = rng.uniform(0, 4, size=d)
        D[rng.random(d) < 0.3] = 0.0
        gt = rng.standard_normal(d)
        if not np.any(gt):
            gt[0] = 1.0
        g2 = gt * gt
        cap = np.inf
        pos = D > 0
        if np.all(pos):
            cap = 0.5 * float(np.sum(g2 / D))
        delta = float(rng.uniform(0.05, 0.95)) * min(cap, 2.0 * float(np.sum(g2)))
        h0, hp0 = eval_H(0.0, gt, D, delta)
        worst = max(worst, abs(h0 - delta), hp0 + float(np.sum(g2)))
        beta_probe = float(rng.uniform(0, 5))
        h, hp = eval_H(beta_probe, gt, D, delta)
        worst = max(worst, hp)  # must stay negative
        h2 = 3.0 * float(np.sum(g2 * D / (1.0 + beta_probe * D) ** 4))
        worst = max(worst, -h2)
        sol = find_beta(gt, D, delta)
        if math.isfinite(sol.beta):
            worst = max(worst, abs(sol.residual) / max(1.0, delta) - 1e-11)
    return SuiteResult("projection-H", worst, 1e-9, samples)


def closed_form_suite(samples=500, seed=0):
    """Scaled-identity and aligned rank-one fast paths against the
    eigendecomposition path."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(samples):
        d = int(rng.integers(2, 9))
        x = rng.standard_normal(d)
        g = rng.standard_normal(d)
        if i % 2 == 0:
            C = ScaledIdentity(float(rng.uniform(0.1, 3.0)), d)
        else:
            f_eff = float(rng.uniform(0.5, 3.0))
            C = RankOne(0.5 / f_eff, g / float(np.linalg.norm(g)))
        cap = 0.5 * C.inv_quad_form(g)
        gap = float(rng.uniform(0.05, 0.999)) * cap
        inp = ProjectionInput(x=x, g=g, C=C, gap=gap)
        fast, _ = lcd2_project(inp)
        general, _ = _project_general(x, g, C, gap, None)
        worst = max(worst, float(np.linalg.norm(fast - general))
                    / (1.0 + float(np.linalg.norm(general))))
    return SuiteResult("closed-form-agreement", worst, 1e-8, samples)


def membership_suite(samples=500, seed=0):
    """Projected points stay in the localization set, the constraint is
    tight for finite multipliers, and the step dominates the classical
    one in distance to a known optimum."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        d = int(rng.integers(2, 7))
        m = rng.standard_normal((d, d))
        H = Dense(m @ m.T / d + 0.05 * np.eye(d))
        x_star = rng.standard_normal(d)
        x = x_star + rng.standard_normal(d)
        g = H.matvec(x - x_star)
        gap = 0.5 * H.quad_form(x - x_star)
        if gap <= 0:
            continue
        alpha = float(rng.uniform(0.1, 1.0))
        C = H.scale(alpha)
        x_new, _ = lcd2_project(ProjectionInput(x=x, g=g, C=C, gap=gap))
        slack = float(g @ (x_new - x)) + 0.5 * C.quad_form(x_new - x) + gap
        worst = max(worst, slack / (1.0 + gap))  # membership: slack <= 0
        p = polyak_point(x, g, gap)
        worst = max(worst, float(np.linalg.norm(x_new - x_star))
                    - float(np.linalg.norm(p - x_star)))
    return SuiteResult("localization-membership", worst, 1e-8, samples)


def solver_reduction_suite(samples=50, seed=0):
    """Zero curvature turns the curvature methods into their classical
    counterparts, and exact quadratic curvature solves in one step."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(max(1, samples // 10)):
        A = rng.standard_normal((12, 4))
        b = rng.standard_normal(12)
        ls = obj_mod.least_squares(A, b)
        est = obj_mod.estimate_f_star(ls)
        ls = obj_mod.with_f_star(ls, est.value)
        x0 = rng.standard_normal(4)
        for method in ("lcd1", "lcd2", "lcd3"):
            trace = run(ls, SolverConfig(method=method, max_iters=1), x0=x0)
            worst = max(worst, trace.final_f_gap / (1.0 + abs(est.value)))
        lam = 0.3
        logistic = obj_mod.logistic_lp(A, np.sign(b), lam)
        L = obj_mod.logistic_smoothness(A) + 2 * lam
        zero_l = obj_mod.with_model(logistic, cv.zero_model(excess=L))
        t_gd = run(logistic, SolverConfig("gd", gamma=1.0 / L, max_iters=25), x0=x0)
        t_lcd1 = run(zero_l, SolverConfig("lcd1", max_iters=25), x0=x0)
        worst = max(worst, abs(t_gd.records[-1].grad_norm
                               - t_lcd1.records[-1].grad_norm))
    return SuiteResult("solver-reductions", worst, 1e-10, samples)


def dataio_suite(samples=10, seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(max(1, samples)):
        n, d = int(rng.integers(2, 8)), int(rng.integers(2, 6))
        rows = np.round(rng.standard_normal((n, d)), 6)
        rows[:, -1] += 1.0  # keep the last column populated
        labels = rng.choice([-1.0, 1.0], size=n)
        ds = dataio.Dataset(rows=rows, labels=labels)
        text = dataio.serialize_libsvm(ds)
        back = dataio.parse_libsvm(io.StringIO(text), classification=False)
        worst = max(worst, float(np.max(np.abs(back.rows - rows))))
        worst = max(worst, float(np.max(np.abs(back.labels - labels))))
    return SuiteResult("data-io-roundtrip", worst, 0.0, samples)


SCOPES = {
    "matrix-core": lambda s, seed: [matrix_suite(s, seed)],
    "curvature-maps": lambda s, seed: [curvature_psd_suite(s, seed)],
    "objectives": lambda s, seed: (
        bound_suite(obj_mod.catalog(), min(s, 2000), seed)
        + [cocoercivity_suite(s, seed), bregman_symmetry_suite(s, seed)]
    ),
    "abs-convex": lambda s, seed: [absconv_suite(s, seed)],
    "projection-engine": lambda s, seed: [
        hprops_suite(s, seed),
        closed_form_suite(min(s, 500), seed),
        membership_suite(min(s, 500), seed),
    ],
    "lcd-solvers": lambda s, seed: [solver_reduction_suite(min(s, 50), seed)],
    "data-io": lambda s, seed: [dataio_suite(min(s, 20), seed)],
}


def run_suites(scope="all", samples=2000, seed=0):
    if scope == "all":
        names = list(SCOPES)
    elif scope in SCOPES:
        names = [scope]
    else:
        raise ValueError(f"unknown scope {scope!r}; pick one of "
                         f"{['all', *SCOPES]}")
    results = []
    for name in names:
        results.extend(SCOPES[name](samples, seed))
    return results
