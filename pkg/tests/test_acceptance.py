"""Acceptance suite: every criterion at its stated tolerance.

Each test prints one `criterion N (<slug>): PASS|FAIL` line; a FAIL line
is followed by the assertion listing the collected violations.  Run with
`pytest tests/test_acceptance.py -v -s` to see all ten lines.
"""

import math

import numpy as np
import pytest

from steinpairs import beta as bs
from steinpairs import experiments as ex
from steinpairs import framework as fw
from steinpairs import polya
from steinpairs.fixtures import (
    beta_spec,
    exponential_spec,
    gamma2_density,
    named_test_function,
    normal_spec,
)
from steinpairs.quadrature import integrate
from steinpairs.special import BetaParams, beta_pdf

PARAM_GRID = [(a, b) for a in (0.5, 1.0, 2.0, 3.7) for b in (0.5, 1.0, 2.0, 3.7)]
N_GRID = (5, 10, 20, 50, 100, 200, 500)
SMOOTH_FIXTURES = ("x2", "x3", "smoothstep")


def report(number: int, slug: str, violations) -> None:
    status = "PASS" if not violations else "FAIL"
    print(f"criterion {number} ({slug}): {status}")
    assert not violations, f"criterion {number} ({slug}): {violations[:8]}"


def test_criterion_01_exact_regression_identities():
    violations = []
    for a, b in PARAM_GRID:
        for n in (2, 10, 100, 500):
            model = polya.PolyaModel(a, b, n)
            for k in range(n + 1):
                first = polya.regression_first(model, k)
                second = polya.regression_second(model, k)
                d1 = abs(first.conditional - first.closed_form)
                d2 = abs(second.conditional - second.closed_form)
                d3 = abs(second.conditional - second.half_lambda_form)
                if max(d1, d2, d3) > 1e-13:
                    violations.append((a, b, n, k, d1, d2, d3))
    report(1, "exact-regression-identities", violations)


def test_criterion_02_rate_bound_validity_and_slope():
    violations = []
    for a, b in PARAM_GRID:
        params = BetaParams(a, b)
        for name in SMOOTH_FIXTURES:
            h = named_test_function(name)
            result = ex.rate_study(params, h, N_GRID)
            for n, d, bound in zip(result.n_values, result.distances, result.bounds):
                if d > bound + 1e-12:
                    violations.append(("bound", a, b, name, n, d, bound))
            usable = sum(
                1 for n, deg in zip(result.n_values, result.degenerate)
                if n >= result.slope_n_min and not deg
            )
            if usable >= 3 and not (-1.15 <= result.loglog_slope <= -0.85):
                violations.append(("slope", a, b, name, result.loglog_slope))
    report(2, "rate-bound-and-slope", violations)


def test_criterion_03_eta_reconstruction():
    violations = []
    grid = np.linspace(0.01, 0.99, 99)
    for a, b in ((2.0, 3.0), (0.5, 2.0)):
        spec = beta_spec(a, b)
        err = max(abs(fw.compute_eta(spec, float(x)) - x * (1.0 - x)) for x in grid)
        if err > 1e-9:
            violations.append(("beta", a, b, err))
    normal = normal_spec()
    err = max(abs(fw.compute_eta(normal, float(x)) - 1.0) for x in np.linspace(-4.0, 4.0, 41))
    if err > 1e-9:
        violations.append(("normal", err))
    report(3, "eta-reconstruction", violations)


def test_criterion_04_density_round_trip():
    violations = []

    cases = [
        (
            "beta(2,3)",
            dict(
                gamma=lambda x: 2.0 - 5.0 * np.asarray(x, dtype=float),
                eta=lambda x: np.asarray(x, dtype=float) * (1.0 - np.asarray(x, dtype=float)),
                support=fw.SupportInterval(0.0, 1.0),
                x0_hint=0.4,
            ),
            lambda t: beta_pdf(t, BetaParams(2.0, 3.0)),
            (0.0, 1.0),
        ),
        (
            "exponential(1)",
            dict(
                gamma=lambda x: 1.0 - np.asarray(x, dtype=float),
                eta=lambda x: np.asarray(x, dtype=float),
                support=fw.SupportInterval(0.0, math.inf),
                x0_hint=1.0,
            ),
            lambda t: math.exp(-t),
            (0.0, math.inf),
        ),
        (
            "normal",
            dict(
                gamma=lambda x: -np.asarray(x, dtype=float),
                eta=lambda x: np.ones_like(np.asarray(x, dtype=float)),
                support=fw.SupportInterval(-math.inf, math.inf),
                x0_hint=0.0,
            ),
            lambda t: math.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi),
            (-math.inf, math.inf),
        ),
    ]
    for label, kwargs, reference, (lo, hi) in cases:
        spec = fw.density_from_coefficients(**kwargs)
        l1 = integrate(lambda t: abs(spec._p_scalar(t) - reference(t)), lo, hi, abs_tol=1e-11)
        if l1 > 1e-8:
            violations.append((label, l1))
    report(4, "density-round-trip", violations)


def residual_scan(spec, solution, n_points=41, step=1e-6):
    xs = spec.interior_grid(n_points, margin=1e-3 * (spec.grid_upper - spec.grid_lower))
    kinks = getattr(solution.h, "kinks", ())
    if kinks:
        keep = np.ones(xs.shape, dtype=bool)
        for kink in kinks:
            keep &= np.abs(xs - kink) > 1e-3
        xs = xs[keep]
    delta = step * (spec.grid_upper - spec.grid_lower)
    stacked = np.concatenate([xs - delta, xs, xs + delta])
    order = np.argsort(stacked)
    values = np.empty_like(stacked)
    values[order] = solution.value_grid(stacked[order])
    m = len(xs)
    deriv = (values[2 * m :] - values[:m]) / (2.0 * delta)
    eta_vals = np.asarray(spec.eta(xs), dtype=float)
    gamma_vals = np.asarray(spec.gamma(xs), dtype=float)
    h_tilde = np.asarray(solution.h(xs), dtype=float) - solution.expectation
    return float(np.abs(eta_vals * deriv + gamma_vals * values[m : 2 * m] - h_tilde).max())


def test_criterion_05_stein_equation_residuals_and_boundary():
    violations = []
    beta_cases = [
        ((2.0, 3.0), "x2"),
        ((2.0, 3.0), "smoothstep"),
        ((0.5, 2.0), "x2"),
        ((3.7, 3.7), "x3"),
    ]
    for (a, b), name in beta_cases:
        ctx = bs.make_context(BetaParams(a, b))
        h = named_test_function(name)
        sol = bs.solve(ctx, h)
        resid = residual_scan(ctx.spec, sol)
        if resid > 1e-8:
            violations.append(("residual", a, b, name, resid))
        g0, g1 = sol.value(0.0), sol.value(1.0)
        eps = 2.0**-30
        d0 = abs(sol.value(eps) - g0)
        d1 = abs(sol.value(1.0 - eps) - g1)
        if max(d0, d1) > 1e-6:
            violations.append(("boundary", a, b, name, d0, d1))
        coarse = abs(sol.value(2.0**-10) - g0)
        if not coarse >= d0 * 0.5 - 1e-12:  # differences contract along the dyadic sequence
            violations.append(("boundary-trend", a, b, name, coarse, d0))
    for spec, name in ((normal_spec(), "x2"), (exponential_spec(1.0), "sin"),
                       (exponential_spec(1.0), "xexp")):
        sol = fw.standard_solution(spec, named_test_function(name))
        resid = residual_scan(spec, sol)
        if resid > 1e-8:
            violations.append(("residual", spec.name, name, resid))
    report(5, "stein-equation-residual", violations)


def test_criterion_06_bound_suite():
    violations = []
    for a, b in PARAM_GRID:
        params = BetaParams(a, b)
        ctx = bs.make_context(params)
        c_const = bs.derivative_bound_constant(params)
        for name in SMOOTH_FIXTURES:
            h = named_test_function(name)
            est0 = bs.derivative_norm_estimate(ctx, h, 0)
            est1 = bs.derivative_norm_estimate(ctx, h, 1)
            bound0 = h.norm(1) / (a + b)
            bound1 = c_const * h.norm(1)
            if est0.value > bound0 * (1.0 + 1e-9):
                violations.append(("value", a, b, name, est0.value, bound0))
            if est1.value > bound1 * (1.0 + 1e-9):
                violations.append(("derivative", a, b, name, est1.value, bound1))
        h3 = named_test_function("x3")
        via_recursion = bs.order_m_bound(params, h3, 2)
        via_formula = bs.second_derivative_bound(params, h3.norm(1), h3.norm(2))
        if abs(via_recursion - via_formula) > 1e-12 * via_formula:
            violations.append(("recursion", a, b, via_recursion, via_formula))
    report(6, "bound-suite", violations)


def test_criterion_07_intro_comparison():
    violations = []
    for n in (2, 10, 100):
        ours, theirs = ex.intro_comparison(n)
        limit = (2.0 / (3.0 * n)) * (1.0 - 1.0 / n)
        if abs(ours - limit) > 1e-4:
            violations.append(("limit", n, ours, limit))
        if not ours < theirs:
            violations.append(("comparison", n, ours, theirs))
        if abs(theirs - 9.0 / (2.0 * n)) > 1e-15:
            violations.append(("reference", n, theirs))
    report(7, "small-shape-comparison", violations)


def test_criterion_08_exponential_bounds_and_lift():
    violations = []
    for name in ("x", "sin", "xexp"):
        rep = ex.exponential_check(1.0, named_test_function(name))
        for bound_report in rep.reports:
            if not bound_report.satisfied:
                violations.append((name, bound_report.kind, bound_report.measured,
                                   bound_report.bound))
        if rep.lift_l1_error > 1e-8:
            violations.append((name, "lift-l1", rep.lift_l1_error))
    lifted = fw.derivative_lift(exponential_spec(1.0))
    gamma2 = gamma2_density(1.0)
    l1 = integrate(
        lambda t: abs(lifted._p_scalar(t) - float(gamma2(t))) if t > 0 else 0.0,
        0.0,
        math.inf,
        abs_tol=1e-11,
    )
    if l1 > 1e-8:
        violations.append(("direct-lift-l1", l1))
    report(8, "exponential-fixture", violations)


def test_criterion_09_mills_counterexample():
    violations = []
    rep = ex.mills_counterexample(10)
    for j, ratio in enumerate(rep.ratios, start=1):
        if ratio < 0.499:
            violations.append(("ratio", j, ratio))
    if not rep.density_decreases:
        violations.append(("density-not-decreasing", rep.node_densities))
    if rep.node_densities[-1] > 1e-10:
        violations.append(("density-not-vanishing", rep.node_densities[-1]))
    if rep.mass_residual > 1e-10:
        violations.append(("mass", rep.mass_residual))
    report(9, "mills-counterexample", violations)


def test_criterion_10_monte_carlo_consistency(tmp_path):
    violations = []
    reps = 1_000_000
    for n in (10, 100):
        model = polya.PolyaModel(2.0, 3.0, n)
        batch = polya.simulate_pair(model, reps, seed=987654321)
        counts = np.bincount(np.rint(batch.w * n).astype(int), minlength=n + 1)
        empirical = counts / reps
        exact = polya.pmf(model).probs()
        tv = 0.5 * float(np.abs(empirical - exact).sum())
        threshold = 4.0 * math.sqrt((n + 1) / reps)
        if tv > threshold:
            violations.append(("tv", n, tv, threshold))
        paths = []
        for tag in ("one", "two"):
            again = polya.simulate_pair(model, 10_000, seed=13)
            counts_again = np.bincount(np.rint(again.w * n).astype(int), minlength=n + 1)
            artifact = ex.ReportArtifact(
                "regression_check",
                {
                    "columns": ["k", "count"],
                    "rows": [[k, int(c)] for k, c in enumerate(counts_again)],
                },
                "csv",
            )
            path = tmp_path / f"mc-{n}-{tag}.csv"
            ex.emit_report(artifact, path)
            paths.append(path)
        if paths[0].read_bytes() != paths[1].read_bytes():
            violations.append(("determinism", n))
    report(10, "monte-carlo-consistency", violations)
