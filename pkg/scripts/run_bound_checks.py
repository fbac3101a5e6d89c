#!/usr/bin/env python3
"""Run the full bound-verification battery and emit a JSON report.

Covers the Beta bound suite over a parameter grid, the exponential
three-bound check with its lift comparison, and the Mills-ratio
counterexample table.
"""

import argparse
import pathlib

from steinpairs.beta import bound_suite, make_context
from steinpairs.experiments import (
    ReportArtifact,
    emit_report,
    exponential_check,
    mills_counterexample,
)
from steinpairs.fixtures import named_test_function
from steinpairs.special import BetaParams


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/bound_checks.json", type=pathlib.Path)
    parser.add_argument("--shapes", default="0.5,1,2,3.7")
    parser.add_argument("--order", type=int, default=2)
    args = parser.parse_args()

    shapes = [float(s) for s in args.shapes.split(",")]
    payload = {"beta": {}, "exponential": {}, "mills": {}}
    all_ok = True
    for a in shapes:
        for b in shapes:
            ctx = make_context(BetaParams(a, b))
            for name in ("x2", "x3", "smoothstep"):
                reports = bound_suite(ctx, named_test_function(name), args.order)
                key = f"a{a}_b{b}_{name}"
                payload["beta"][key] = [
                    {
                        "order": r.order,
                        "bound": r.bound,
                        "measured": r.measured,
                        "satisfied": r.satisfied,
                    }
                    for r in reports
                ]
                all_ok &= all(r.satisfied is not False for r in reports)
    for name in ("x", "sin", "xexp"):
        rep = exponential_check(1.0, named_test_function(name))
        payload["exponential"][name] = {
            "bounds": [[r.bound, r.measured, r.satisfied] for r in rep.reports],
            "lift_l1_error": rep.lift_l1_error,
            "truncation_warning": rep.truncation_warning,
        }
        all_ok &= rep.all_satisfied and rep.lift_l1_error <= 1e-8
    mills = mills_counterexample(10)
    payload["mills"] = {
        "ratios": list(mills.ratios),
        "node_densities": list(mills.node_densities),
        "holds": mills.ratios_stay_up and mills.density_decreases,
    }
    all_ok &= payload["mills"]["holds"]

    args.out.parent.mkdir(parents=True, exist_ok=True)
    emit_report(ReportArtifact("bound_suite", payload, "json"), args.out)
    print(f"all checks satisfied: {all_ok}; report at {args.out}")
    return 0 if all_ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
