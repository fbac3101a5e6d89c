"""Beta specialization: constants, solutions, bound suite, rate bounds."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steinpairs import beta as bs
from steinpairs import framework as fw
from steinpairs import polya
from steinpairs.fixtures import beta_spec, named_test_function
from steinpairs.quadrature import integrate
from steinpairs.special import BetaParams, beta_function, beta_pdf, log_gamma

PARAM_GRID = [0.3, 1.0, 2.5, 7.0]


class TestContextBridge:
    @pytest.mark.parametrize("a,b", [(0.5, 2.0), (2.0, 3.0), (3.7, 3.7)])
    def test_quadrature_eta_matches_closed_form(self, a, b):
        ctx = bs.make_context(BetaParams(a, b))
        for x in np.linspace(0.02, 0.98, 25):
            assert fw.compute_eta(ctx.spec, float(x)) == pytest.approx(
                x * (1.0 - x), abs=1e-9
            )

    def test_mean(self):
        ctx = bs.make_context(BetaParams(2.0, 3.0))
        assert ctx.spec.mean == pytest.approx(0.4, abs=1e-12)
        assert ctx.mean == pytest.approx(0.4, rel=1e-15)


class TestDerivativeBoundConstant:
    def test_symmetric_below_one(self):
        assert bs.derivative_bound_constant(BetaParams(0.5, 0.5)) == 4.0

    def test_symmetric_at_one_continuous(self):
        # 2a sqrt(pi) Gamma(a)/Gamma(a+1/2) at a = 1 equals 4
        assert bs.derivative_bound_constant(BetaParams(1.0, 1.0)) == pytest.approx(4.0, rel=1e-13)

    def test_asymmetric_small_large(self):
        # a <= 1 < b branch: 2(a+b)/a
        assert bs.derivative_bound_constant(BetaParams(0.5, 2.0)) == pytest.approx(10.0, rel=1e-13)
        assert bs.derivative_bound_constant(BetaParams(2.0, 0.5)) == pytest.approx(10.0, rel=1e-13)

    def test_both_small(self):
        p = BetaParams(0.4, 0.8)
        expected = 2.0 * 1.2 * beta_function(p)
        assert bs.derivative_bound_constant(p) == pytest.approx(expected, rel=1e-13)

    def test_both_large(self):
        p = BetaParams(2.0, 3.0)
        expected = 2.0 * 5.0 / (2.0 * 3.0 * beta_function(p))
        assert bs.derivative_bound_constant(p) == pytest.approx(expected, rel=1e-13)

    def test_intended_discontinuity_at_equal_shapes(self):
        # the symmetric branch is sharper: for a < 1 the generic a<=1, b<=1
        # branch tends to 4a B(a,a) as b -> a, which differs from 4 by design
        a = 0.5
        generic_limit = 2.0 * (2.0 * a) * beta_function(BetaParams(a, a))
        assert generic_limit == pytest.approx(2.0 * math.pi, rel=1e-12)
        assert bs.derivative_bound_constant(BetaParams(a, a)) == 4.0
        near = bs.derivative_bound_constant(BetaParams(a, a + 1e-9))
        assert near == pytest.approx(generic_limit, rel=1e-6)
        assert abs(near - 4.0) > 2.0


class TestSolve:
    def test_linear_h_constant_solution(self):
        for a, b in [(0.5, 2.0), (2.0, 3.0)]:
            ctx = bs.make_context(BetaParams(a, b))
            sol = bs.solve(ctx, named_test_function("x"))
            xs = ctx.spec.interior_grid(512)
            np.testing.assert_allclose(sol.value_grid(xs), -1.0 / (a + b), atol=1e-12)

    def test_constant_h_zero_solution(self):
        ctx = bs.make_context(BetaParams(2.0, 3.0))
        sol = bs.solve(ctx, fw.TestFunction.polynomial((0.4,), name="const"))
        xs = ctx.spec.interior_grid(64)
        np.testing.assert_allclose(sol.value_grid(xs), 0.0, atol=1e-13)

    def test_boundary_plug_in(self):
        ctx = bs.make_context(BetaParams(2.0, 3.0))
        h = named_test_function("smoothstep")
        sol = bs.solve(ctx, h)
        g0 = (h.lower_limit - sol.expectation) / 2.0
        assert sol.value(0.0) == pytest.approx(g0, rel=1e-12)

    def test_boundary_plug_in_frozen_value(self):
        # h(x) = 1 - 1.5 x^2 on Beta(2,3): Eh = 1 - 1.5 E[Z^2] = 0.7,
        # h(0+) = 1, a = 2, so g(0) = (1 - 0.7)/2 = 0.15
        ctx = bs.make_context(BetaParams(2.0, 3.0))
        h = fw.TestFunction.polynomial((1.0, 0.0, -1.5), name="one-minus")
        sol = bs.solve(ctx, h)
        assert sol.expectation == pytest.approx(0.7, rel=1e-13)
        assert sol.value(0.0) == pytest.approx(0.15, rel=1e-12)
        assert sol.value(1.0) == pytest.approx((1.0 - 1.5 - 0.7) / (-3.0), rel=1e-12)

    def test_quadratic_exact_affine_solution(self):
        # matching coefficients: g(x) = -(x + c)/(1 + a + b) solves h = x^2
        a, b = 2.0, 3.0
        ctx = bs.make_context(BetaParams(a, b))
        sol = bs.solve(ctx, named_test_function("x2"))
        xs = ctx.spec.interior_grid(512)
        expected = -(xs / 6.0 + 0.1)
        np.testing.assert_allclose(sol.value_grid(xs), expected, atol=1e-12)
        np.testing.assert_allclose(sol.derivative_grid(xs), -1.0 / 6.0, atol=1e-10)

    @pytest.mark.parametrize("a,b", [(0.5, 2.0), (2.0, 3.0)])
    def test_polynomial_path_agrees_with_quadrature_path(self, a, b):
        ctx = bs.make_context(BetaParams(a, b))
        h = named_test_function("x3")
        analytic = bs.solve(ctx, h)
        generic = fw.standard_solution(ctx.spec, h)
        assert isinstance(analytic, bs._PolynomialBetaSolution)
        xs = ctx.spec.interior_grid(101)
        np.testing.assert_allclose(
            analytic.value_grid(xs), generic.value_grid(xs), atol=5e-10
        )
        assert analytic.expectation == pytest.approx(generic.expectation, rel=1e-11)

    def test_smoothstep_uses_quadrature_path(self):
        ctx = bs.make_context(BetaParams(2.0, 3.0))
        sol = bs.solve(ctx, named_test_function("smoothstep"))
        assert not isinstance(sol, bs._PolynomialBetaSolution)

    def test_boundary_limit_sequence(self):
        # interior values converge to the closed boundary value as x -> 0
        ctx = bs.make_context(BetaParams(0.5, 2.0))
        h = named_test_function("x2")
        sol = bs.solve(ctx, h)
        g0 = sol.value(0.0)
        diffs = [abs(sol.value(2.0**-k) - g0) for k in range(10, 31, 5)]
        assert diffs[-1] <= 1e-6
        assert diffs[0] > diffs[-1]


class TestEtaIdentity:
    @pytest.mark.parametrize("a", PARAM_GRID)
    @pytest.mark.parametrize("b", PARAM_GRID)
    def test_density_weighted_identity(self, a, b):
        # p(x) x(1-x) = int_0^x (a - (a+b) t) p(t) dt on a 50-point grid
        params = BetaParams(a, b)
        spec = beta_spec(a, b)
        for x in np.linspace(0.02, 0.98, 50):
            lhs = beta_pdf(float(x), params) * x * (1.0 - x)
            rhs = fw.compute_I(spec, float(x))
            assert lhs == pytest.approx(rhs, abs=1e-9)


class TestBoundSuite:
    def test_lipschitz_value_report(self):
        ctx = bs.make_context(BetaParams(2.0, 3.0))
        h = named_test_function("x2")
        reports = bs.bound_suite(ctx, h, order=1)
        assert reports[0].bound == pytest.approx(h.norm(1) / 5.0, rel=1e-13)
        assert reports[1].bound == pytest.approx(
            bs.derivative_bound_constant(BetaParams(2, 3)) * h.norm(1), rel=1e-13
        )
        assert all(r.satisfied for r in reports)

    def test_second_order_recursion_equals_formula(self):
        h = named_test_function("x3")
        for a in [0.5, 1.0, 2.0, 3.7]:
            for b in [0.5, 2.0, 3.7]:
                params = BetaParams(a, b)
                via_recursion = bs.order_m_bound(params, h, 2)
                via_formula = bs.second_derivative_bound(params, h.norm(1), h.norm(2))
                assert via_recursion == pytest.approx(via_formula, rel=1e-12)

    def test_symmetric_small_shape_uses_four(self):
        # C(a, a) = 4 below one enters the derivative bound directly
        ctx = bs.make_context(BetaParams(0.5, 0.5))
        h = named_test_function("x2")
        reports = bs.bound_suite(ctx, h, order=2)
        assert reports[1].bound == pytest.approx(4.0 * h.norm(1), rel=1e-13)
        assert all(r.satisfied for r in reports)

    def test_high_order_bounds_are_finite_and_grow(self):
        h = named_test_function("x3")
        params = BetaParams(2.0, 3.0)
        values = [bs.order_m_bound(params, h, m) for m in (1, 2, 3)]
        assert all(math.isfinite(v) and v > 0 for v in values)
        assert values[2] > values[1] > values[0]

    def test_log_space_products_high_order(self):
        h = fw.TestFunction.polynomial(tuple([0.0] * 9 + [1.0]), name="x9")
        value = bs.order_m_bound(BetaParams(2.0, 3.0), h, 9)
        assert math.isfinite(value) and value > 1e10

    def test_smoothness_mismatch_raises(self):
        h = fw.TestFunction(
            fn=np.cos, smoothness=fw.Smoothness.LIPSCHITZ, norms={1: 1.0}, name="bare"
        )
        with pytest.raises(fw.FrameworkError):
            bs.order_m_bound(BetaParams(2.0, 3.0), h, 2)

    def test_bounded_only_test_function_uses_median_bound(self):
        from steinpairs.special import beta_median

        ctx = bs.make_context(BetaParams(2.0, 5.0))
        h = fw.TestFunction(
            fn=lambda x: np.cos(6.0 * np.asarray(x, dtype=float)),
            smoothness=fw.Smoothness.BOUNDED_MEASURABLE,
            norms={0: 2.0},
            name="wiggle",
        )
        reports = bs.bound_suite(ctx, h, order=0)
        m = beta_median(BetaParams(2.0, 5.0))
        expected = 2.0 / (2.0 * m * (1.0 - m) * beta_pdf(m, BetaParams(2.0, 5.0)))
        assert reports[0].bound == pytest.approx(expected, rel=1e-12)
        assert reports[0].satisfied


class TestDerivativeLiftConsistency:
    @pytest.mark.parametrize("a,b", [(2.0, 3.0), (0.5, 2.0)])
    def test_derivative_solves_lifted_equation(self, a, b):
        ctx = bs.make_context(BetaParams(a, b))
        h = named_test_function("x3")
        sol = bs.solve(ctx, h)
        g_fn, gp_fn = fw.solution_interpolants(sol, ctx.spec, margin_frac=1e-6)
        lifted_ctx = bs.make_context(BetaParams(a + 1.0, b + 1.0))
        h2 = fw.lift_test_function(ctx.spec, h, g_fn, gp_fn)
        lifted_sol = fw.standard_solution(lifted_ctx.spec, h2)
        xs = np.linspace(0.05, 0.95, 19)
        direct = sol.derivative_grid(xs)
        via_lift = lifted_sol.value_grid(xs)
        np.testing.assert_allclose(direct, via_lift, atol=1e-7)


class TestHigherOrderMeasurement:
    def test_third_order_through_double_lift(self):
        # h = x^3 has an exact quadratic solution, so g''' vanishes; the
        # double-lift measurement must see that, and order-3 bounds hold
        params = BetaParams(2.0, 3.0)
        ctx = bs.make_context(params)
        h = named_test_function("x3")
        est3 = bs.derivative_norm_estimate(ctx, h, 3)
        assert est3.value <= 1e-5
        assert est3.value <= bs.order_m_bound(params, h, 3)
        reports = bs.bound_suite(ctx, h, order=3, measure_up_to=3)
        assert all(r.satisfied is not False for r in reports)
        assert reports[3].measured is not None


class TestSProfile:
    def test_small_symmetric_sup_is_inverse_shape(self):
        # the sup is a boundary limit, so push the grid into the endpoint
        a = 0.5
        ctx = bs.make_context(BetaParams(a, a))
        tail = np.geomspace(1e-14, 1e-2, 60)
        xs = np.sort(np.concatenate([ctx.spec.interior_grid(2049), tail, 1.0 - tail]))
        est = fw.estimate_sup_norm(bs.s_profile(ctx, xs), xs)
        assert est.value == pytest.approx(1.0 / a, rel=1e-6)

    def test_large_symmetric_sup_is_inverse_midpoint_density(self):
        a = 2.0
        ctx = bs.make_context(BetaParams(a, a))
        xs = np.sort(np.append(ctx.spec.interior_grid(4097), 0.5))
        est = fw.estimate_sup_norm(bs.s_profile(ctx, xs), xs)
        assert est.value == pytest.approx(1.0 / beta_pdf(0.5, BetaParams(a, a)), rel=1e-6)
        assert est.value == pytest.approx(2.0 / 3.0, rel=1e-6)


class TestBRatioProfile:
    def test_endpoint_limits(self):
        ctx = bs.make_context(BetaParams(2.0, 3.0))
        xs = np.asarray([1e-7, 1.0 - 1e-7])
        vals = bs.b_ratio_profile(ctx, xs)
        assert vals[0] == pytest.approx(2.0 / 3.0, rel=1e-4)  # 2/(a+1)
        assert vals[1] == pytest.approx(2.0 / 4.0, rel=1e-4)  # 2/(b+1)

    def test_profile_is_finite_inside(self):
        ctx = bs.make_context(BetaParams(0.5, 2.0))
        xs = np.linspace(0.01, 0.99, 99)
        vals = bs.b_ratio_profile(ctx, xs)
        assert np.all(np.isfinite(vals)) and np.all(vals > 0.0)


class TestRateBound:
    def test_zero_norms_give_zero(self):
        assert bs.polya_rate_bound(25, BetaParams(2.0, 3.0), 0.0, 0.0) == 0.0

    def test_decreasing_in_n(self):
        params = BetaParams(2.0, 3.0)
        values = [bs.polya_rate_bound(n, params, 1.0, 1.0) for n in (5, 10, 20, 50, 100)]
        assert all(x > y for x, y in zip(values, values[1:]))

    @pytest.mark.parametrize("n", [2, 10, 100])
    def test_small_shape_limit(self, n):
        ours = bs.polya_rate_bound(n, BetaParams(1e-8, 1e-8), 1.0, 1.0)
        limit = (2.0 / (3.0 * n)) * (1.0 - 1.0 / n)
        assert ours == pytest.approx(limit, abs=1e-4)
        assert ours < 9.0 / (2.0 * n)


class TestPairPluginBound:
    def test_zero_moments(self):
        assert bs.pair_plugin_bound(0.5, 0.0, 0.0, 0.0, BetaParams(1, 2), 1.0, 1.0) == 0.0

    @given(
        n=st.integers(min_value=1, max_value=400),
        a=st.floats(0.1, 8.0),
        b=st.floats(0.1, 8.0),
        n1=st.floats(0.0, 4.0),
        n2=st.floats(0.0, 4.0),
    )
    @settings(max_examples=40, deadline=None)
    def test_reproduces_rate_bound_with_urn_moments(self, n, a, b, n1, n2):
        # urn inputs: no first remainder, E|S| = ab/((a+b) n), |W'-W| <= 1/n
        params = BetaParams(a, b)
        lam = 1.0 / (n * (a + b + n - 1.0))
        via_plugin = bs.pair_plugin_bound(
            lam, 0.0, a * b / ((a + b) * n), n**-3.0, params, n1, n2
        )
        via_rate = bs.polya_rate_bound(n, params, n1, n2)
        assert via_plugin == pytest.approx(via_rate, rel=1e-12)

    def test_cube_scaling_invariance(self):
        params = BetaParams(2.0, 3.0)
        one = bs.pair_plugin_bound(1.0, 0.0, 0.0, 1.0, params, 1.0, 1.0)
        two = bs.pair_plugin_bound(2.0, 0.0, 0.0, 2.0, params, 1.0, 1.0)
        assert one == pytest.approx(two, rel=1e-14)


class TestCharacterizationCheck:
    def test_beta_measure_annihilates(self):
        ctx = bs.make_context(BetaParams(3.0, 1.0))
        residual = bs.characterization_check(ctx, named_test_function("x3"), ctx.spec)
        assert abs(residual) <= 1e-9

    def test_constant_function_recovers_mean_identity(self):
        ctx = bs.make_context(BetaParams(2.0, 3.0))
        f = fw.TestFunction.polynomial((1.0,), name="one")
        assert abs(bs.characterization_check(ctx, f, ctx.spec)) <= 1e-10

    def test_uniform_against_symmetric_beta(self):
        # E_U[x(1-x) + 4(1/2 - x) x] = int_0^1 (3x - 5x^2) dx = -1/6
        ctx = bs.make_context(BetaParams(2.0, 2.0))
        uniform = fw.DistributionSpec(
            support=fw.SupportInterval(0.0, 1.0),
            p=lambda x: np.ones_like(np.asarray(x, dtype=float)),
            gamma=lambda x: 0.5 - np.asarray(x, dtype=float),
        )
        residual = bs.characterization_check(ctx, named_test_function("x"), uniform)
        assert residual == pytest.approx(-1.0 / 6.0, abs=1e-10)

    def test_polya_measure_matches_module_cross_check(self):
        model = polya.PolyaModel(2.0, 3.0, 80)
        dist = polya.pmf(model)
        ctx = bs.make_context(BetaParams(2.0, 3.0))
        measure = fw.DiscreteMeasure(dist.support(), dist.probs())
        residual = bs.characterization_check(ctx, named_test_function("x"), measure)
        assert residual == pytest.approx(-6.0 / (5.0 * 80.0), rel=1e-10)


class TestNormMeasurements:
    @pytest.mark.parametrize("a,b", [(0.5, 0.5), (2.0, 3.0), (3.7, 1.0)])
    @pytest.mark.parametrize("name", ["x2", "smoothstep"])
    def test_measured_norms_within_bounds(self, a, b, name):
        params = BetaParams(a, b)
        ctx = bs.make_context(params)
        h = named_test_function(name)
        est0 = bs.derivative_norm_estimate(ctx, h, 0)
        est1 = bs.derivative_norm_estimate(ctx, h, 1)
        assert est0.value <= h.norm(1) / (a + b) * (1.0 + 1e-9)
        assert est1.value <= bs.derivative_bound_constant(params) * h.norm(1) * (1.0 + 1e-9)
