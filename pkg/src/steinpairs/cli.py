"""Command-line surface: solve equations, print constants, run checks and studies.

Exit codes: 0 on success, 1 when a numerical check fails, 2 on usage
errors.  All floating output uses fixed %.12e formatting, so identical
invocations produce byte-identical stdout and report files.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import beta as beta_mod
from . import experiments as exp_mod
from . import polya as polya_mod
from .fixtures import (
    TEST_FUNCTION_NAMES,
    beta_spec,
    exponential_spec,
    named_test_function,
    normal_spec,
)
from .framework import SupportInterval, TestFunction, density_from_coefficients
from .quadrature import integrate
from .special import BetaParams

CHECK_FAILED = 1
USAGE_ERROR = 2


def _fmt(x: float) -> str:
    return "%.12e" % float(x)


def _env_workers() -> int:
    try:
        return max(1, int(os.environ.get("STEINPAIRS_WORKERS", "1")))
    except ValueError:
        return 1


def _test_function_from_args(args) -> TestFunction:
    if getattr(args, "poly", None):
        coeffs = [float(c) for c in args.poly.split(",")]
        return TestFunction.polynomial(coeffs, name="poly")
    return named_test_function(args.h)


def _add_beta_params(parser):
    parser.add_argument("--a", type=float, required=True, help="first shape parameter")
    parser.add_argument("--b", type=float, required=True, help="second shape parameter")


def _add_test_function(parser, default="x2"):
    parser.add_argument(
        "--h",
        default=default,
        choices=TEST_FUNCTION_NAMES,
        help="named test function",
    )
    parser.add_argument(
        "--poly",
        default=None,
        help="polynomial coefficients c0,c1,... (overrides --h)",
    )


def _cmd_solve(args) -> int:
    params = BetaParams(args.a, args.b)
    ctx = beta_mod.make_context(params)
    h = _test_function_from_args(args)
    solution = beta_mod.solve(ctx, h)
    xs = np.linspace(0.0, 1.0, args.grid_size)
    inner = xs[1:-1]
    g_vals = solution.value_grid(inner)
    gp_vals = solution.derivative_grid(inner)
    rows = [[0.0, solution.value(0.0), float("nan")]]
    rows += [[float(x), float(g), float(gp)] for x, g, gp in zip(inner, g_vals, gp_vals)]
    rows.append([1.0, solution.value(1.0), float("nan")])
    print(f"# g_h for beta(a={args.a}, b={args.b}), h={h.name}, Eh={_fmt(solution.expectation)}")
    print("x,g,g_prime")
    for row in rows:
        print(",".join(_fmt(v) for v in row))
    if args.out:
        artifact = exp_mod.ReportArtifact(
            "bound_suite", {"columns": ["x", "g", "g_prime"], "rows": rows}, "csv"
        )
        exp_mod.emit_report(artifact, args.out)
    return 0


def _cmd_constants(args) -> int:
    params = BetaParams(args.a, args.b)
    print("%.12g" % beta_mod.derivative_bound_constant(params))
    if args.max_shift > 0:
        for k in range(1, args.max_shift + 1):
            shifted = BetaParams(args.a + k, args.b + k)
            print("%.12g" % beta_mod.derivative_bound_constant(shifted))
    return 0


def _cmd_bounds(args) -> int:
    params = BetaParams(args.a, args.b)
    ctx = beta_mod.make_context(params)
    h = _test_function_from_args(args)
    reports = beta_mod.bound_suite(ctx, h, args.order)
    failed = False
    print(f"# bound suite for beta(a={args.a}, b={args.b}), h={h.name}, order={args.order}")
    print("order,kind,bound,measured,satisfied")
    for rep in reports:
        measured = _fmt(rep.measured) if rep.measured is not None else "-"
        ok = rep.satisfied
        if ok is False:
            failed = True
        print(f"{rep.order},{rep.kind},{_fmt(rep.bound)},{measured},{ok}")
    return CHECK_FAILED if failed else 0


def _cmd_polya_check(args) -> int:
    model = polya_mod.PolyaModel(args.a, args.b, args.n)
    worst_first = worst_second = 0.0
    for k in range(model.n + 1):
        first = polya_mod.regression_first(model, k)
        second = polya_mod.regression_second(model, k)
        worst_first = max(worst_first, abs(first.conditional - first.closed_form))
        worst_second = max(
            worst_second,
            abs(second.conditional - second.closed_form),
            abs(second.conditional - second.half_lambda_form),
        )
    print(f"# regression identities for polya(a={args.a}, b={args.b}, n={args.n})")
    print(f"first_moment_residual,{_fmt(worst_first)}")
    print(f"second_moment_residual,{_fmt(worst_second)}")
    ok = worst_first <= args.tol and worst_second <= args.tol
    print(f"within_tolerance,{ok}")
    return 0 if ok else CHECK_FAILED


def _cmd_polya_simulate(args) -> int:
    model = polya_mod.PolyaModel(args.a, args.b, args.n)
    workers = args.workers if args.workers else _env_workers()
    batch = polya_mod.simulate_pair(model, args.reps, args.seed, workers=workers)
    dist = polya_mod.pmf(model)
    counts = np.bincount(np.rint(batch.w * model.n).astype(int), minlength=model.n + 1)
    empirical = counts / len(batch)
    tv = 0.5 * float(np.abs(empirical - dist.probs()).sum())
    print(f"# simulation for polya(a={args.a}, b={args.b}, n={args.n}), "
          f"reps={args.reps}, seed={args.seed}, workers={workers}")
    print(f"mean_w,{_fmt(batch.w.mean())}")
    print(f"mean_w_prime,{_fmt(batch.w_prime.mean())}")
    print(f"total_variation,{_fmt(tv)}")
    print(f"max_move,{_fmt(float(np.abs(batch.w - batch.w_prime).max()))}")
    if args.out:
        rows = [[int(k), float(empirical[k]), float(dist.probs()[k])] for k in range(model.n + 1)]
        artifact = exp_mod.ReportArtifact(
            "regression_check",
            {"columns": ["k", "empirical", "exact"], "rows": rows},
            "csv",
        )
        exp_mod.emit_report(artifact, args.out)
    threshold = 4.0 * float(np.sqrt((model.n + 1) / args.reps))
    return 0 if tv <= threshold else CHECK_FAILED


def _cmd_rate_study(args) -> int:
    params = BetaParams(args.a, args.b)
    h = _test_function_from_args(args)
    n_values = [int(v) for v in args.n.split(",")]
    result = exp_mod.rate_study(params, h, n_values)
    print(f"# rate study for beta(a={args.a}, b={args.b}), h={h.name}")
    print("n,distance,bound,degenerate")
    for n, d, b, deg in zip(result.n_values, result.distances, result.bounds, result.degenerate):
        print(f"{n},{_fmt(d)},{_fmt(b)},{deg}")
    print(f"loglog_slope,{_fmt(result.loglog_slope)}")
    print(f"slope_stderr,{_fmt(result.slope_stderr)}")
    if args.out:
        exp_mod.emit_report(exp_mod.rate_study_artifact(result, args.format), args.out)
    violations = [d > b + 1e-12 for d, b in zip(result.distances, result.bounds)]
    return CHECK_FAILED if any(violations) else 0


_DENSITY_FIXTURES = ("beta", "normal", "exponential")


def _cmd_framework_density(args) -> int:
    import math

    if args.fixture == "beta":
        a, b = args.a, args.b
        spec = density_from_coefficients(
            gamma=lambda x: a - (a + b) * np.asarray(x, dtype=float),
            eta=lambda x: np.asarray(x, dtype=float) * (1.0 - np.asarray(x, dtype=float)),
            support=SupportInterval(0.0, 1.0),
            x0_hint=a / (a + b),
            name="beta-reconstructed",
        )
        reference = beta_spec(a, b)
        lo, hi = 0.0, 1.0
    elif args.fixture == "normal":
        spec = density_from_coefficients(
            gamma=lambda x: -np.asarray(x, dtype=float),
            eta=lambda x: np.ones_like(np.asarray(x, dtype=float)),
            support=SupportInterval(-math.inf, math.inf),
            x0_hint=0.0,
            name="normal-reconstructed",
        )
        reference = normal_spec()
        lo, hi = -math.inf, math.inf
    else:
        alpha = args.alpha
        spec = density_from_coefficients(
            gamma=lambda x: 1.0 - alpha * np.asarray(x, dtype=float),
            eta=lambda x: np.asarray(x, dtype=float),
            support=SupportInterval(0.0, math.inf),
            x0_hint=1.0 / alpha,
            name="exponential-reconstructed",
        )
        reference = exponential_spec(alpha)
        lo, hi = 0.0, math.inf
    l1 = integrate(
        lambda t: abs(spec._p_scalar(t) - reference._p_scalar(t)), lo, hi, abs_tol=1e-11
    )
    print(f"# density reconstruction for fixture {args.fixture}")
    print(f"l1_error,{_fmt(l1)}")
    print(f"x0,{_fmt(spec.x0)}")
    return 0 if l1 <= args.tol else CHECK_FAILED


def _cmd_mills_check(args) -> int:
    report = exp_mod.mills_counterexample(args.levels)
    print(f"# Mills-ratio counterexample, levels={args.levels}")
    print("j,x,ratio,density")
    for j, (x, r, d) in enumerate(
        zip(report.even_nodes, report.ratios, report.node_densities), start=1
    ):
        print(f"{j},{_fmt(x)},{_fmt(r)},{_fmt(d)}")
    verdict = report.framework_estimate.verdict.value if report.framework_estimate else "n/a"
    print(f"framework_verdict,{verdict}")
    ok = report.ratios_stay_up and report.density_decreases and report.mass_residual < 1e-10
    print(f"counterexample_holds,{ok}")
    return 0 if ok else CHECK_FAILED


def _cmd_exp_check(args) -> int:
    h = _test_function_from_args(args)
    report = exp_mod.exponential_check(args.alpha, h)
    print(f"# exponential bound check, alpha={args.alpha}, h={h.name}")
    print("order,bound,measured,satisfied")
    for rep in report.reports:
        print(f"{rep.order},{_fmt(rep.bound)},{_fmt(rep.measured)},{rep.satisfied}")
    print(f"lift_l1_error,{_fmt(report.lift_l1_error)}")
    print(f"truncation_warning,{report.truncation_warning}")
    return 0 if report.all_satisfied and report.lift_l1_error <= 1e-8 else CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="steinpairs",
        description="First-order Stein operators, Beta targets and Polya urn checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="evaluate the Beta standard solution on a grid")
    _add_beta_params(p)
    _add_test_function(p)
    p.add_argument("--grid-size", type=int, default=21)
    p.add_argument("--out", default=None, help="optional CSV output path")
    p.set_defaults(handler=_cmd_solve)

    p = sub.add_parser("constants", help="print the derivative-bound constant C(a, b)")
    _add_beta_params(p)
    p.add_argument("--max-shift", type=int, default=0,
                   help="also print C(a+k, b+k) for k = 1..max-shift")
    p.set_defaults(handler=_cmd_constants)

    p = sub.add_parser("bounds", help="run the Beta bound suite")
    _add_beta_params(p)
    _add_test_function(p)
    p.add_argument("--order", type=int, default=2)
    p.set_defaults(handler=_cmd_bounds)

    polya = sub.add_parser("polya", help="urn model checks and simulation")
    polya_sub = polya.add_subparsers(dest="polya_command", required=True)

    p = polya_sub.add_parser("check", help="verify the exact regression identities")
    _add_beta_params(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-13)
    p.set_defaults(handler=_cmd_polya_check)

    p = polya_sub.add_parser("simulate", help="seeded simulation of the urn pair")
    _add_beta_params(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reps", type=int, default=100000)
    p.add_argument("--seed", type=int, default=20240801)
    p.add_argument("--workers", type=int, default=0,
                   help="worker streams (default: STEINPAIRS_WORKERS or 1)")
    p.add_argument("--out", default=None, help="optional CSV output path")
    p.set_defaults(handler=_cmd_polya_simulate)

    p = sub.add_parser("rate-study", help="exact urn-vs-limit distances over n")
    _add_beta_params(p)
    _add_test_function(p)
    p.add_argument("--n", default="10,20,50,100,200", help="comma-separated draw counts")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(handler=_cmd_rate_study)

    framework = sub.add_parser("framework", help="general-framework operations")
    framework_sub = framework.add_subparsers(dest="framework_command", required=True)

    p = framework_sub.add_parser("density", help="reconstruct a density from (gamma, eta)")
    p.add_argument("--fixture", choices=_DENSITY_FIXTURES, required=True)
    p.add_argument("--a", type=float, default=2.0)
    p.add_argument("--b", type=float, default=3.0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(handler=_cmd_framework_density)

    p = sub.add_parser("mills-check", help="Mills-ratio counterexample table")
    p.add_argument("--levels", type=int, default=10)
    p.set_defaults(handler=_cmd_mills_check)

    p = sub.add_parser("exp-check", help="exponential-distribution bound checks")
    p.add_argument("--alpha", type=float, default=1.0)
    _add_test_function(p, default="sin")
    p.set_defaults(handler=_cmd_exp_check)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help and 2 for usage errors
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


def main(argv=None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
