import math

import numpy as np
import pytest

from lcdopt.errors import ArgumentNegative, Degenerate, SingularAlongGradient, ZeroGradient
from lcdopt.matrices import Dense, RankOne, ScaledIdentity, Zero
from lcdopt.projection import (
    ProjectionInput,
    _project_general,
    eval_H,
    find_beta,
    lcd2_project,
    lcd3_project,
    polyak_point,
)


def h_value(beta, gt, D, delta):
    """Direct formula, independent of the kernel implementations."""
    q = 1.0 + beta * D
    return (0.5 * beta * beta * np.sum(gt**2 * D / q**2)
            - beta * np.sum(gt**2 / q) + delta)


def bisect_oracle(gt, D, delta, tol=1e-14):
    """Plain doubling bracket + bisection on the direct formula."""
    hi = 1.0
    for _ in range(300):
        if h_value(hi, gt, D, delta) < 0:
            break
        hi *= 2.0
    else:
        return math.inf
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if h_value(mid, gt, D, delta) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * (1.0 + hi):
            break
    return 0.5 * (lo + hi)


def random_h_instance(rng, feasible=True):
    d = int(rng.integers(1, 9))
    D = rng.uniform(0, 4, size=d)
    D[rng.random(d) < 0.3] = 0.0
    gt = rng.standard_normal(d)
    if not np.any(gt):
        gt[0] = 1.0
    cap = np.inf
    if np.all(D > 0):
        cap = 0.5 * float(np.sum(gt**2 / D))
    delta = float(rng.uniform(0.05, 0.95)) * min(cap, 2.0 * float(gt @ gt))
    return gt, D, delta


class TestEvalH:
    def test_at_zero(self):
        gt = np.array([1.0, 2.0])
        D = np.array([0.5, 1.5])
        h, hp = eval_H(0.0, gt, D, 0.7)
        assert h == pytest.approx(0.7)
        assert hp == pytest.approx(-5.0)

    def test_symbolic_root(self):
        # d=1, D=1, gt=2, delta=1: H(beta) = 0 at beta = sqrt(2) - 1
        h, _ = eval_H(math.sqrt(2.0) - 1.0, np.array([2.0]), np.array([1.0]), 1.0)
        assert abs(h) <= 1e-12

    def test_zero_curvature_linear(self):
        gt = np.array([1.0, 1.0])
        D = np.zeros(2)
        for beta in (0.0, 0.5, 2.0):
            h, hp = eval_H(beta, gt, D, 1.0)
            assert h == pytest.approx(-beta * 2.0 + 1.0)
            assert hp == pytest.approx(-2.0)

    def test_matches_direct_formula(self):
        rng = np.random.default_rng(0)
        for _ in range(300):
            gt, D, delta = random_h_instance(rng)
            beta = float(rng.uniform(0, 5))
            h, hp = eval_H(beta, gt, D, delta)
            assert h == pytest.approx(h_value(beta, gt, D, delta),
                                      rel=1e-12, abs=1e-12)


class TestHProperties:
    def test_decreasing_and_convex(self):
        rng = np.random.default_rng(1)
        for _ in range(1000):
            gt, D, delta = random_h_instance(rng)
            assert eval_H(0.0, gt, D, delta)[0] == pytest.approx(delta)
            beta = float(rng.uniform(0, 10))
            _, hp = eval_H(beta, gt, D, delta)
            assert hp < 0
            h2 = 3.0 * np.sum(gt**2 * D / (1 + beta * D) ** 4)
            assert h2 >= 0


class TestFindBeta:
    def test_linear_case_one_step(self):
        gt = np.array([1.0, 2.0])
        sol = find_beta(gt, np.zeros(2), 1.0)
        assert sol.beta == pytest.approx(1.0 / 5.0)
        assert sol.newton_iters == 1

    def test_symbolic(self):
        sol = find_beta(np.array([2.0]), np.array([1.0]), 1.0)
        assert abs(sol.beta - (math.sqrt(2.0) - 1.0)) <= 1e-12

    def test_infinite_on_tight_quadratic(self):
        # delta exactly half the inverse-metric norm: no finite root
        gt = np.array([1.0, 2.0])
        D = np.array([2.0, 1.0])
        delta = 0.5 * float(np.sum(gt**2 / D))
        sol = find_beta(gt, D, delta)
        assert math.isinf(sol.beta)

    def test_degenerate(self):
        with pytest.raises(Degenerate):
            find_beta(np.array([1.0]), np.array([1.0]), 0.0)

    def test_zero_gradient(self):
        with pytest.raises(ZeroGradient):
            find_beta(np.zeros(2), np.ones(2), 1.0)

    def test_against_bisection_oracle(self):
        rng = np.random.default_rng(2)
        iters = []
        for _ in range(1000):
            gt, D, delta = random_h_instance(rng)
            sol = find_beta(gt, D, delta)
            ref = bisect_oracle(gt, D, delta)
            assert abs(sol.beta - ref) <= 1e-8 * (1.0 + sol.beta)
            iters.append(sol.newton_iters)
        assert max(iters) <= 20
        assert np.median(iters) <= 6


class TestLcd2Project:
    def test_zero_gap_returns_point(self):
        x = np.array([1.0, 2.0])
        out, _ = lcd2_project(ProjectionInput(x, np.ones(2), Zero(2), 0.0))
        np.testing.assert_array_equal(out, x)

    def test_zero_curvature_is_classical_step(self):
        x = np.array([1.0])
        g = np.array([2.0])
        out, _ = lcd2_project(ProjectionInput(x, g, Zero(1), 1.0))
        assert out[0] == pytest.approx(0.5)
        np.testing.assert_array_equal(out, polyak_point(x, g, 1.0))

    def test_scaled_identity_closed_form(self):
        # f = x^2, C = 1, x0 = 1: new point at sqrt(2) - 1
        out, _ = lcd2_project(ProjectionInput(
            np.array([1.0]), np.array([2.0]), ScaledIdentity(1.0, 1), 1.0))
        assert out[0] == pytest.approx(math.sqrt(2.0) - 1.0, abs=1e-12)

    def test_hessian_curvature_newton_step(self):
        # f = x^2 with C = 2 (the Hessian): one-step to the optimum
        out, _ = lcd2_project(ProjectionInput(
            np.array([1.0]), np.array([2.0]), ScaledIdentity(2.0, 1), 1.0))
        assert out[0] == pytest.approx(0.0, abs=1e-12)

    def test_matches_general_path_scaled_identity(self):
        rng = np.random.default_rng(3)
        for _ in range(250):
            d = int(rng.integers(2, 9))
            x = rng.standard_normal(d)
            g = rng.standard_normal(d)
            C = ScaledIdentity(float(rng.uniform(0.1, 3.0)), d)
            gap = float(rng.uniform(0.05, 0.999)) * 0.5 * C.inv_quad_form(g)
            fast, _ = lcd2_project(ProjectionInput(x, g, C, gap))
            general, _ = _project_general(x, g, C, gap, None)
            assert np.linalg.norm(fast - general) <= 1e-8 * (
                1 + np.linalg.norm(general))

    def test_matches_general_path_rank_one(self):
        rng = np.random.default_rng(4)
        for _ in range(250):
            d = int(rng.integers(2, 9))
            x = rng.standard_normal(d)
            g = rng.standard_normal(d)
            f_eff = float(rng.uniform(0.5, 3.0))
            # curvature aligned with the gradient, as produced by squared
            # absolutely convex sums
            C = RankOne(0.5 / f_eff, g / np.linalg.norm(g))
            gap = float(rng.uniform(0.05, 0.999)) * 0.5 * C.inv_quad_form(g)
            fast, _ = lcd2_project(ProjectionInput(x, g, C, gap))
            general, _ = _project_general(x, g, C, gap, None)
            assert np.linalg.norm(fast - general) <= 1e-8 * (
                1 + np.linalg.norm(general))

    def test_sum_of_squares_closed_form_expression(self):
        # the rank-one fast path reproduces
        # x - 2 (f - sqrt(f f_star)) / ||g||^2 * g
        rng = np.random.default_rng(5)
        for _ in range(200):
            d = int(rng.integers(1, 6))
            x = rng.standard_normal(d)
            g = rng.standard_normal(d)
            f_val = float(rng.uniform(0.5, 4.0))
            f_star = float(rng.uniform(0.0, 1.0)) * f_val
            gap = f_val - f_star
            C = RankOne(0.5 / f_val, g)
            out, _ = lcd2_project(ProjectionInput(x, g, C, gap))
            gamma = 2.0 * (f_val - math.sqrt(f_val * f_star)) / float(g @ g)
            np.testing.assert_allclose(out, x - gamma * g, atol=1e-10)

    def test_membership_and_tightness(self):
        rng = np.random.default_rng(6)
        for _ in range(400):
            d = int(rng.integers(2, 7))
            m = rng.standard_normal((d, d))
            H = Dense(m @ m.T / d + 0.05 * np.eye(d))
            x_star = rng.standard_normal(d)
            x = x_star + rng.standard_normal(d)
            g = H.matvec(x - x_star)
            gap = 0.5 * H.quad_form(x - x_star)
            alpha = float(rng.uniform(0.1, 0.95))
            C = H.scale(alpha)
            out, _ = lcd2_project(ProjectionInput(x, g, C, gap))
            slack = float(g @ (out - x)) + 0.5 * C.quad_form(out - x) + gap
            # membership in the localization set, with tightness
            assert slack <= 1e-8 * (1 + gap)
            assert abs(slack) <= 1e-8 * (1 + gap)

    def test_improves_on_classical_step(self):
        rng = np.random.default_rng(7)
        for _ in range(400):
            d = int(rng.integers(2, 7))
            m = rng.standard_normal((d, d))
            H = Dense(m @ m.T / d + 0.05 * np.eye(d))
            x_star = rng.standard_normal(d)
            x = x_star + rng.standard_normal(d)
            g = H.matvec(x - x_star)
            gap = 0.5 * H.quad_form(x - x_star)
            C = H.scale(float(rng.uniform(0.1, 1.0)))
            out, _ = lcd2_project(ProjectionInput(x, g, C, gap))
            p = polyak_point(x, g, gap)
            assert (np.linalg.norm(out - x_star)
                    <= np.linalg.norm(p - x_star) + 1e-10)


class TestLcd3Project:
    def test_zero_gap(self):
        x = np.array([1.0])
        out, _ = lcd3_project(ProjectionInput(x, np.array([2.0]),
                                              ScaledIdentity(1.0, 1), 0.0))
        np.testing.assert_array_equal(out, x)

    def test_scalar_example(self):
        # f = x^2, C = 1, x = 1: gamma = 1 - sqrt(1/2), x' = sqrt(2) - 1
        out, _ = lcd3_project(ProjectionInput(
            np.array([1.0]), np.array([2.0]), ScaledIdentity(1.0, 1), 1.0))
        assert out[0] == pytest.approx(math.sqrt(2.0) - 1.0, abs=1e-12)

    def test_agrees_with_lcd2_on_scaled_identity(self):
        rng = np.random.default_rng(8)
        for _ in range(300):
            d = int(rng.integers(1, 6))
            x = rng.standard_normal(d)
            g = rng.standard_normal(d)
            C = ScaledIdentity(float(rng.uniform(0.2, 2.0)), d)
            gap = float(rng.uniform(0.05, 0.95)) * 0.5 * C.inv_quad_form(g)
            a, _ = lcd2_project(ProjectionInput(x, g, C, gap))
            b, _ = lcd3_project(ProjectionInput(x, g, C, gap))
            np.testing.assert_allclose(a, b, atol=1e-10)

    def test_newton_direction_on_quadratics(self):
        rng = np.random.default_rng(9)
        m = rng.standard_normal((4, 4))
        H = Dense(m @ m.T / 4 + 0.1 * np.eye(4))
        x_star = rng.standard_normal(4)
        x = x_star + rng.standard_normal(4)
        g = H.matvec(x - x_star)
        gap = 0.5 * H.quad_form(x - x_star)
        out, _ = lcd3_project(ProjectionInput(x, g, H, gap))
        np.testing.assert_allclose(out, x_star, atol=1e-8)

    def test_singular_along_gradient(self):
        with pytest.raises(SingularAlongGradient):
            lcd3_project(ProjectionInput(
                np.zeros(2), np.array([0.0, 1.0]),
                RankOne(1.0, np.array([1.0, 0.0])), 1.0))

    def test_argument_negative(self):
        # claiming curvature far above the Hessian makes the argument
        # negative beyond roundoff
        with pytest.raises(ArgumentNegative):
            lcd3_project(ProjectionInput(
                np.array([1.0]), np.array([2.0]),
                ScaledIdentity(50.0, 1), 1.0))
