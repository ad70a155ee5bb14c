import numpy as np
import pytest

from lcdopt import curvature as cv
from lcdopt import objectives as obj_mod
from lcdopt.errors import NoExcess, ZeroGradient
from lcdopt.solvers import (
    SolverConfig,
    find_excess_by_doubling,
    lcd1_step,
    polyak_step,
    run,
    verify_rate_bounds,
)


def quadratic_1d():
    return obj_mod.Objective(
        dim=1, f=lambda x: float(x[0] ** 2), grad=lambda x: 2.0 * x,
        model=cv.quadratic_model(np.array([[1.0]])), f_star=0.0,
        quadratic_hessian=np.array([[2.0]]),
    )


class TestSteps:
    def test_polyak_parabola(self):
        out = polyak_step(quadratic_1d(), np.array([1.0]))
        assert out[0] == pytest.approx(0.5)

    def test_polyak_at_optimum(self):
        out = polyak_step(quadratic_1d(), np.array([0.0]))
        assert out[0] == 0.0

    def test_polyak_zero_gradient_error(self):
        obj = obj_mod.Objective(
            dim=1, f=lambda x: 1.0, grad=lambda x: np.zeros(1),
            model=cv.zero_model(), f_star=0.0)
        with pytest.raises(ZeroGradient):
            polyak_step(obj, np.array([1.0]))

    def test_polyak_stepsize_lower_bound(self):
        # gamma_k >= 1/(2L) along a smooth strongly convex run
        rng = np.random.default_rng(0)
        A = rng.standard_normal((12, 3))
        b = np.sign(rng.standard_normal(12))
        lam = 0.05
        obj = obj_mod.logistic_lp(A, b, lam)
        est = obj_mod.estimate_f_star(obj, budget=200000, tol=1e-11)
        obj = obj_mod.with_f_star(obj, est.value)
        L = obj_mod.logistic_smoothness(A) + 2 * lam
        x = rng.standard_normal(3)
        for _ in range(200):
            g = obj.grad(x)
            gap = obj.f(x) - obj.f_star
            gamma = gap / float(g @ g)
            assert gamma >= 1.0 / (2 * L) - 1e-9
            x = x - gamma * g

    def test_lcd1_newton_on_quadratic(self):
        out = lcd1_step(quadratic_1d(), np.array([1.0]))
        assert out[0] == pytest.approx(0.0, abs=1e-14)

    def test_lcd1_zero_model_is_fixed_step(self):
        obj = obj_mod.Objective(
            dim=1, f=lambda x: float(x[0] ** 2), grad=lambda x: 2.0 * x,
            model=cv.zero_model(excess=4.0))
        out = lcd1_step(obj, np.array([1.0]))
        assert out[0] == pytest.approx(1.0 - 2.0 / 4.0)

    def test_lcd1_huber_branch(self):
        obj = obj_mod.huber_sq_objective(1.0, 1)
        out = lcd1_step(obj, np.array([0.5]))
        assert out[0] == pytest.approx(0.5 - 0.125 / 2.25)

    def test_lcd1_needs_excess(self):
        obj = obj_mod.lpp_objective(3.0, 2, "diag")
        with pytest.raises(NoExcess):
            lcd1_step(obj, np.ones(2))


class TestRunLoop:
    def test_zero_iterations(self):
        trace = run(quadratic_1d(), SolverConfig("polyak", max_iters=0),
                    x0=np.array([1.0]))
        assert trace.records == []
        assert trace.status == "max_iters"

    def test_one_step_convergence_least_squares(self):
        rng = np.random.default_rng(1)
        A = rng.standard_normal((20, 5))
        b = rng.standard_normal(20)
        ls = obj_mod.least_squares(A, b)
        # independent oracle for the optimal value
        x_hat, *_ = np.linalg.lstsq(A, b, rcond=None)
        f_star = float(np.sum((A @ x_hat - b) ** 2)) / 20
        ls = obj_mod.with_f_star(ls, f_star)
        x0 = rng.standard_normal(5)
        for method in ("lcd1", "lcd2", "lcd3"):
            trace = run(ls, SolverConfig(method, max_iters=1), x0=x0)
            assert len(trace.records) == 1
            assert trace.final_f_gap <= 1e-12 * (1 + abs(f_star))

    def test_divergence_guard(self):
        # gd with a destructive stepsize must be flagged
        obj = quadratic_1d()
        trace = run(obj, SolverConfig("gd", gamma=10.0, max_iters=200),
                    x0=np.array([1.0]))
        assert trace.status == "diverged"
        assert trace.records[-1].f_gap > 1e6

    def test_stops_on_f_tol(self):
        obj = quadratic_1d()
        trace = run(obj, SolverConfig("polyak", max_iters=100, f_tol=1e-6),
                    x0=np.array([1.0]))
        assert trace.status == "converged"
        assert trace.final_f_gap <= 1e-6
        assert len(trace.records) < 100

    def test_stops_on_g_tol(self):
        obj = quadratic_1d()
        trace = run(obj, SolverConfig("lcd1", max_iters=100, g_tol=1e-8),
                    x0=np.array([1.0]))
        assert trace.status == "converged"

    def test_methods_needing_fstar(self):
        obj = obj_mod.Objective(dim=1, f=lambda x: float(x[0] ** 2),
                                grad=lambda x: 2.0 * x,
                                model=cv.zero_model())
        with pytest.raises(ValueError):
            run(obj, SolverConfig("polyak", max_iters=10))

    def test_gd_needs_gamma(self):
        with pytest.raises(ValueError):
            SolverConfig("gd", max_iters=10)
        with pytest.raises(ValueError):
            SolverConfig("nope", max_iters=10)

    def test_step_error_recorded(self):
        # lcd3 with rank-one curvature dies once the gradient leaves the range
        from lcdopt.matrices import RankOne

        rng = np.random.default_rng(2)
        A = rng.standard_normal((6, 3))
        b = rng.standard_normal(6)
        obj = obj_mod.least_squares(A, b)
        obj = obj_mod.with_model(
            obj_mod.with_f_star(obj, obj_mod.estimate_f_star(obj).value),
            cv.CurvatureModel(lambda x: RankOne(1.0, np.array([1.0, 0.0, 0.0]))))
        trace = run(obj, SolverConfig("lcd3", max_iters=5), x0=np.ones(3))
        assert trace.status == "diverged"
        assert "SingularAlongGradient" in trace.error

    def test_determinism(self, toy_logistic_data):
        A, b, lam, fstar = toy_logistic_data
        obj = obj_mod.with_f_star(obj_mod.logistic_lp(A, b, lam), fstar)
        cfg = SolverConfig("lcd2", max_iters=50, seed=7)
        t1 = run(obj, cfg, x0=np.array([0.3, -0.2]))
        t2 = run(obj, cfg, x0=np.array([0.3, -0.2]))
        for r1, r2 in zip(t1.records, t2.records):
            assert (r1.k, r1.f_gap, r1.grad_norm, r1.step_norm,
                    r1.newton_iters) == (r2.k, r2.f_gap, r2.grad_norm,
                                         r2.step_norm, r2.newton_iters)


class TestReductions:
    def test_lcd1_matches_gd(self, toy_logistic_data):
        A, b, lam, fstar = toy_logistic_data
        obj = obj_mod.logistic_lp(A, b, lam)
        L = obj_mod.logistic_smoothness(A) + 2 * lam
        zeroed = obj_mod.with_model(obj, cv.zero_model(excess=L))
        x0 = np.array([0.5, -0.5])
        t_gd = run(obj, SolverConfig("gd", gamma=1.0 / L, max_iters=100,
                                     record_iterates=True), x0=x0)
        t_l1 = run(zeroed, SolverConfig("lcd1", max_iters=100,
                                        record_iterates=True), x0=x0)
        for a, c in zip(t_gd.iterates, t_l1.iterates):
            assert np.linalg.norm(a - c) <= 1e-12

    def test_lcd2_matches_polyak(self, toy_logistic_data):
        A, b, lam, fstar = toy_logistic_data
        obj = obj_mod.with_f_star(obj_mod.logistic_lp(A, b, lam), fstar)
        zeroed = obj_mod.with_model(obj, cv.zero_model())
        x0 = np.array([0.5, -0.5])
        t_p = run(obj, SolverConfig("polyak", max_iters=100,
                                    record_iterates=True), x0=x0)
        t_l2 = run(zeroed, SolverConfig("lcd2", max_iters=100,
                                        record_iterates=True), x0=x0)
        for a, c in zip(t_p.iterates, t_l2.iterates):
            assert np.array_equal(a, c)  # same arithmetic, bit-identical

    def test_lcd1_monotone_descent(self, toy_logistic_data):
        A, b, lam, _ = toy_logistic_data
        obj = obj_mod.logistic_lp(A, b, lam)
        trace = run(obj, SolverConfig("lcd1", max_iters=200,
                                      record_iterates=True),
                    x0=np.array([2.0, -1.0]))
        fs = [obj.f(x) for x in trace.iterates]
        assert all(fs[i + 1] <= fs[i] + 1e-9 for i in range(len(fs) - 1))


class TestRateBounds:
    def test_lcd1_theorem_on_huber(self):
        rng = np.random.default_rng(3)
        A = rng.standard_normal((15, 4))
        b = rng.standard_normal(15)
        obj = obj_mod.huber_sq_regression(A, b, 1.0)
        est = obj_mod.estimate_f_star(obj, budget=300000, tol=1e-10)
        obj = obj_mod.with_f_star(obj, est.value)
        x0 = rng.standard_normal(4)
        trace = run(obj, SolverConfig("lcd1", max_iters=300,
                                      record_iterates=True), x0=x0)
        x_star = _final_point(obj, x0)
        report = verify_rate_bounds(trace, obj, x_star)
        assert report.ok, report.violations[:3]

    def test_lcd2_contraction_and_rate(self):
        # consistent residuals: the optimal value is exactly zero and the
        # minimizer is known, so no estimation margin enters the check
        rng = np.random.default_rng(4)
        A = rng.standard_normal((15, 4))
        x_star = rng.standard_normal(4)
        obj = obj_mod.with_f_star(
            obj_mod.huber_sq_regression(A, A @ x_star, 1.0), 0.0)
        x0 = x_star + rng.standard_normal(4)
        trace = run(obj, SolverConfig("lcd2", max_iters=300,
                                      record_iterates=True), x0=x0)
        report = verify_rate_bounds(trace, obj, x_star)
        assert report.ok, report.violations[:3]

    def test_polyak_specialization(self, toy_logistic_data):
        A, b, lam, fstar = toy_logistic_data
        L = obj_mod.logistic_smoothness(A) + 2 * lam
        obj = obj_mod.with_model(
            obj_mod.with_f_star(obj_mod.logistic_lp(A, b, lam), fstar),
            cv.zero_model(excess=L))
        x0 = np.array([1.0, -1.0])
        x_star = _final_point(obj, x0)
        trace = run(obj, SolverConfig("polyak", max_iters=300,
                                      record_iterates=True), x0=x0)
        report = verify_rate_bounds(trace, obj, x_star)
        assert report.ok, report.violations[:3]

    def test_one_step_quadratic_boundary(self):
        obj = quadratic_1d()
        trace = run(obj, SolverConfig("lcd1", max_iters=1,
                                      record_iterates=True),
                    x0=np.array([2.0]))
        report = verify_rate_bounds(trace, obj, np.zeros(1))
        assert report.ok  # L = 0: bound is zero and so is the gap


class TestExcessDoubling:
    def test_tuned_excess_descends(self):
        rng = np.random.default_rng(11)
        A = rng.standard_normal((30, 4))
        b = np.sign(rng.standard_normal(30))
        obj = obj_mod.logistic_lp(A, b, 0.05, 3.0)  # lower bound only
        assert obj.model.excess is None
        lc = find_excess_by_doubling(obj)
        tuned = obj_mod.with_model(obj, cv.CurvatureModel(
            obj.model._map, excess=lc))
        trace = run(tuned, SolverConfig("lcd1", max_iters=200,
                                        record_iterates=True))
        fs = [tuned.f(x) for x in trace.iterates]
        assert all(fs[i + 1] <= fs[i] + 1e-9 for i in range(len(fs) - 1))

    def test_budget_exhaustion(self):
        # stiff quadratic with no curvature info: needs trial >= ~1e6
        obj = obj_mod.Objective(
            dim=1, f=lambda x: 5e5 * float(x[0] ** 2),
            grad=lambda x: 1e6 * x, model=cv.zero_model())
        with pytest.raises(ValueError):
            find_excess_by_doubling(obj, x0=np.array([1.0]),
                                    start=1e-3, max_doublings=5)

    def test_trace_gap_invariant(self, toy_logistic_data):
        A, b, lam, fstar = toy_logistic_data
        obj = obj_mod.with_f_star(obj_mod.logistic_lp(A, b, lam), fstar)
        for method in ("polyak", "lcd2"):
            trace = run(obj, SolverConfig(method, max_iters=200),
                        x0=np.array([1.0, -1.0]))
            assert all(r.f_gap >= -1e-12 * (1 + abs(fstar))
                       for r in trace.records)
            assert [r.k for r in trace.records] == list(
                range(1, len(trace.records) + 1))


def _final_point(obj, x0, iters=300000, g_tol=1e-14):
    """Reference minimizer: iterate the upper-bound step until the gradient
    is at rounding level (the rate checks need x_star to ~1e-12)."""
    x = np.asarray(x0, dtype=float)
    best = x
    best_g = np.inf
    for _ in range(iters):
        g = obj.grad(x)
        gn = np.linalg.norm(g)
        if gn < best_g:
            best, best_g = x, gn
        if gn <= g_tol:
            break
        x = x - obj.model(x).shifted_solve(obj.model.excess, g)
    return best
