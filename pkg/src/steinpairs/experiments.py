"""Reproduction studies: rate verification, bound comparisons, counterexamples.

Each study returns a plain dataclass; emit_report serializes artifacts
deterministically (JSON with sorted keys, or CSV with %.12e floats).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .beta import make_context, polya_rate_bound
from .fixtures import exponential_spec, gamma2_density
from .framework import (
    BoundReport,
    DistributionSpec,
    MillsEstimate,
    SupportInterval,
    TestFunction,
    derivative_lift,
    estimate_sup_norm,
    lift_test_function,
    mills_limit_estimate,
    solution_interpolants,
    standard_solution,
)
from .polya import PolyaModel, exact_expectation, pmf
from .quadrature import integrate
from .special import BetaParams

__all__ = [
    "ExponentialCheckReport",
    "MillsCounterexampleReport",
    "RateStudyResult",
    "ReportArtifact",
    "ReportError",
    "emit_report",
    "exponential_check",
    "intro_comparison",
    "mills_counterexample",
    "rate_study",
    "rate_study_artifact",
    "sawtooth_density",
]

DEGENERATE_DISTANCE = 1e-14


@dataclass(frozen=True)
class RateStudyResult:
    """Exact urn-vs-limit distances next to the theoretical O(1/n) bound."""

    params: BetaParams
    h_name: str
    n_values: tuple[int, ...]
    distances: tuple[float, ...]
    bounds: tuple[float, ...]
    degenerate: tuple[bool, ...]
    loglog_slope: float
    slope_stderr: float
    slope_n_min: int


def rate_study(
    params: BetaParams,
    h: TestFunction,
    n_values,
    *,
    slope_n_min: int = 20,
) -> RateStudyResult:
    """Exact |E h(W_n) - E h(Z)| over n, with the explicit bound and a log-log slope.

    Distances come from the exact pmf summation minus the quadrature
    value of E[h(Z)].  Distances below 1e-14 are flagged degenerate and
    excluded from the slope fit, as are n below `slope_n_min` (small-n
    transients contaminate the asymptotic rate).
    """
    norm_h1, norm_h2 = h.norm(1), h.norm(2)
    if norm_h1 is None or norm_h2 is None:
        raise ValueError("rate_study needs declared first- and second-derivative norms")
    ctx = make_context(params)
    target_expectation = integrate(
        lambda t: float(h(t)) * ctx.spec._p_scalar(t), 0.0, 1.0, points=list(h.kinks) or None
    )
    n_values = tuple(int(n) for n in n_values)
    distances, bounds, degenerate = [], [], []
    for n in n_values:
        model = PolyaModel(params.a, params.b, n)
        d = abs(exact_expectation(model, h) - target_expectation)
        distances.append(d)
        bounds.append(polya_rate_bound(n, params, norm_h1, norm_h2))
        degenerate.append(d < DEGENERATE_DISTANCE)
    xs, ys = [], []
    for n, d, deg in zip(n_values, distances, degenerate):
        if not deg and n >= slope_n_min:
            xs.append(math.log(n))
            ys.append(math.log(d))
    if len(xs) >= 2:
        xs_arr, ys_arr = np.asarray(xs), np.asarray(ys)
        slope, intercept = np.polyfit(xs_arr, ys_arr, 1)
        resid = ys_arr - (slope * xs_arr + intercept)
        dof = max(len(xs) - 2, 1)
        denom = float(np.sum((xs_arr - xs_arr.mean()) ** 2))
        stderr = math.sqrt(float(resid @ resid) / dof / denom) if denom > 0 else math.nan
    else:
        slope, stderr = math.nan, math.nan
    return RateStudyResult(
        params=params,
        h_name=h.name,
        n_values=n_values,
        distances=tuple(distances),
        bounds=tuple(bounds),
        degenerate=tuple(degenerate),
        loglog_slope=float(slope),
        slope_stderr=float(stderr),
        slope_n_min=slope_n_min,
    )


def intro_comparison(n: int) -> tuple[float, float]:
    """Small-shape limit of the urn rate bound against the reference 9/(2n).

    Evaluates the bound at a = b = 1e-8 with unit derivative norms; the
    limit value is (2/(3n))(1 - 1/n), strictly below 9/(2n).
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    ours = polya_rate_bound(n, BetaParams(1e-8, 1e-8), 1.0, 1.0)
    theirs = 9.0 / (2.0 * n)
    if not ours < theirs:
        raise RuntimeError(f"expected bound {ours} to be below the reference {theirs}")
    return ours, theirs


# ---------------------------------------------------------------------------
# exponential-distribution bound checks


@dataclass(frozen=True)
class ExponentialCheckReport:
    alpha: float
    h_name: str
    reports: tuple[BoundReport, ...]
    lift_l1_error: float
    truncation_warning: bool

    @property
    def all_satisfied(self) -> bool:
        return all(r.satisfied for r in self.reports)


def exponential_check(alpha: float, h: TestFunction, *, grid_size: int = 2049) -> ExponentialCheckReport:
    """Solve the Exponential(alpha) equation x g' + (1 - alpha x) g = h - Eh
    and compare grid norms of g, g', g'' against

        ||g|| <= ||h'||/alpha,  ||g'|| <= ||h'||,
        ||g''|| <= (2 alpha/3)||h'|| + (2/3)||h''||.

    The second derivative is measured through the lift, whose target is
    the shape-2 Gamma law; the lifted density is also compared to that
    closed form in L1.
    """
    norm_h1, norm_h2 = h.norm(1), h.norm(2)
    if norm_h1 is None or norm_h2 is None:
        raise ValueError("exponential_check needs first- and second-derivative norms")
    spec = exponential_spec(alpha)
    sol = standard_solution(spec, h)
    span = spec.grid_upper - spec.grid_lower
    xs_value = spec.interior_grid(grid_size)
    est_value = estimate_sup_norm(sol.value_grid(xs_value), xs_value, pointwise=sol.value)
    xs_deriv = spec.interior_grid(grid_size, margin=1e-6 * span)
    est_deriv = estimate_sup_norm(sol.derivative_grid(xs_deriv), xs_deriv)

    lifted = derivative_lift(spec)
    g_fn, gp_fn = solution_interpolants(sol, spec)
    h2 = lift_test_function(spec, h, g_fn, gp_fn)
    sol2 = standard_solution(lifted, h2)
    xs2 = lifted.interior_grid(min(grid_size, 1025), margin=1e-4 * span)
    est_second = estimate_sup_norm(sol2.derivative_grid(xs2), xs2)

    gamma2 = gamma2_density(alpha)
    l1 = integrate(
        lambda t: abs(float(lifted.p(t)) - float(gamma2(t))) if t > 0 else 0.0, 0.0, math.inf
    )
    reports = (
        BoundReport("value", 0, norm_h1 / alpha, est_value.value, est_value.argmax),
        BoundReport("derivative_1", 1, norm_h1, est_deriv.value, est_deriv.argmax),
        BoundReport(
            "derivative_2",
            2,
            2.0 * alpha / 3.0 * norm_h1 + 2.0 / 3.0 * norm_h2,
            est_second.value,
            est_second.argmax,
        ),
    )
    # only the upper grid edge is a truncation cutoff on (0, inf)
    truncated = est_value.at_upper_edge or est_deriv.at_upper_edge or est_second.at_upper_edge
    return ExponentialCheckReport(alpha, h.name, reports, l1, truncated)


# ---------------------------------------------------------------------------
# the Mills-ratio counterexample density


def sawtooth_density(levels: int = 40):
    """Piecewise-linear density whose Mills ratio does not vanish at zero.

    With weights 2^-m, the breakpoints are x_m = 2^(1-m) and the node
    values alternate between squared and plain weights along even/odd
    indices, so the density tends to zero at the origin while
    F(x_{2j})/p(x_{2j}) stays at 1/2 or above.  Returns
    (pdf callable on (0, 1], even breakpoints x_{2j}, exact ratios,
    node densities p(x_{2j}), normalization constant).
    """
    if not 1 <= levels <= 40:
        raise ValueError("levels must lie in 1..40")
    m_max = 150  # node values underflow well before this depth
    m_idx = np.arange(1, m_max + 1)
    # node values at x_m = 2^(1-m): squared weight at even m, the
    # preceding weight at odd m, and weight itself at x_1 = 1
    v = np.empty(m_max + 2)
    v[1] = 0.5
    for m in range(2, m_max + 2):
        v[m] = 2.0 ** (-2.0 * m) if m % 2 == 0 else 2.0 ** (-(m - 1))
    # interval I_m = [x_{m+1}, x_m] has width 2^-m and trapezoid mass
    widths = 2.0 ** (-m_idx.astype(float))
    masses = widths * (v[1 : m_max + 1] + v[2 : m_max + 2]) / 2.0
    total = float(masses.sum())
    suffix = np.concatenate([np.cumsum(masses[::-1])[::-1], [0.0]])

    def q(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        inside = (t > 0.0) & (t <= 1.0)
        ti = t[inside]
        # x in I_m iff 1 - log2(x) in [m, m+1); the shared node values agree
        m = np.clip(np.floor(1.0 - np.log2(ti)).astype(int), 1, m_max)
        x_m = 2.0 ** (1.0 - m)
        x_m1 = 2.0 ** (-m.astype(float))
        frac = (ti - x_m1) / (x_m - x_m1)
        out[inside] = v[m + 1] + frac * (v[m] - v[m + 1])
        return out

    def pdf(t):
        return q(t) / total

    j = np.arange(1, levels + 1)
    even_nodes = 2.0 ** (1.0 - 2.0 * j)  # x_{2j}
    ratios = suffix[2 * j - 1] / v[2 * j]  # F(x_{2j}) / p(x_{2j}), normalization cancels
    node_density = v[2 * j] / total
    return pdf, even_nodes, ratios, node_density, total


@dataclass(frozen=True)
class MillsCounterexampleReport:
    levels: int
    even_nodes: tuple[float, ...]
    ratios: tuple[float, ...]
    node_densities: tuple[float, ...]
    mass_residual: float
    framework_estimate: MillsEstimate | None = None

    @property
    def ratios_stay_up(self) -> bool:
        return all(r >= 0.5 for r in self.ratios)

    @property
    def density_decreases(self) -> bool:
        nd = self.node_densities
        return all(nd[i + 1] < nd[i] for i in range(len(nd) - 1))


def mills_counterexample(levels: int = 10, *, probe_spec: bool = True) -> MillsCounterexampleReport:
    """Evaluate the sawtooth Mills ratios along the even breakpoints.

    The ratios stay at or above 1/2 while the node densities decrease to
    zero.  When probe_spec is set, the general framework's Mills probe is
    also run on the first few nodes (it must not report "plausible").
    """
    pdf, nodes, ratios, node_density, total = sawtooth_density(levels)
    mass = integrate(lambda t: float(pdf(t)) if 0.0 < t < 1.0 else 0.0, 0.0, 1.0, abs_tol=1e-12)
    estimate = None
    if probe_spec:
        mean = integrate(lambda t: t * float(pdf(t)) if 0.0 < t < 1.0 else 0.0, 0.0, 1.0)
        spec = DistributionSpec(
            support=SupportInterval(0.0, 1.0),
            p=pdf,
            gamma=lambda x: mean - np.asarray(x, dtype=float),
            name="sawtooth",
        )
        probe_levels = min(levels, 6)  # deeper nodes carry sub-1e-12 mass
        estimate = mills_limit_estimate(spec, "lower", points=nodes[:probe_levels])
    return MillsCounterexampleReport(
        levels=levels,
        even_nodes=tuple(float(x) for x in nodes),
        ratios=tuple(float(r) for r in ratios),
        node_densities=tuple(float(d) for d in node_density),
        mass_residual=abs(mass - 1.0),
        framework_estimate=estimate,
    )


# ---------------------------------------------------------------------------
# report emission


class ReportError(RuntimeError):
    """Report serialization or I/O failure."""


_REPORT_KINDS = ("rate_study", "bound_suite", "regression_check", "mills_check", "exp_check")


@dataclass(frozen=True)
class ReportArtifact:
    """Structured study output: a payload tree plus the target format.

    JSON payloads round-trip losslessly (floats keep full precision);
    CSV is the plot-ready tabular export with %.12e floats and requires
    'columns' and 'rows' entries in the payload.
    """

    kind: str
    payload: dict
    fmt: str = "json"

    def __post_init__(self):
        if self.kind not in _REPORT_KINDS:
            raise ValueError(f"unknown report kind {self.kind!r}; expected one of {_REPORT_KINDS}")
        if self.fmt not in ("json", "csv"):
            raise ValueError(f"format must be 'json' or 'csv', got {self.fmt!r}")


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.12e" % float(value)
    return str(value)


def render_report(artifact: ReportArtifact) -> str:
    """Deterministic text rendering of an artifact."""
    if artifact.fmt == "csv":
        try:
            columns = artifact.payload["columns"]
            rows = artifact.payload["rows"]
        except KeyError as exc:
            raise ReportError(f"CSV artifact payload needs {exc.args[0]!r}")
        lines = [",".join(str(c) for c in columns)]
        lines += [",".join(_format_cell(v) for v in row) for row in rows]
        return "\n".join(lines) + "\n"
    return json.dumps(artifact.payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def emit_report(artifact: ReportArtifact, path) -> None:
    """Write the artifact to `path`; identical artifacts give identical bytes."""
    text = render_report(artifact)
    try:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    except OSError as exc:
        raise ReportError(f"cannot write report to {path!r}: {exc}") from exc


def rate_study_artifact(result: RateStudyResult, fmt: str = "csv") -> ReportArtifact:
    if fmt == "csv":
        payload = {
            "columns": ["n", "distance", "bound"],
            "rows": [
                [n, d, b] for n, d, b in zip(result.n_values, result.distances, result.bounds)
            ],
        }
        return ReportArtifact("rate_study", payload, "csv")
    payload = {
        "a": result.params.a,
        "b": result.params.b,
        "h": result.h_name,
        "n": list(result.n_values),
        "distance": list(result.distances),
        "bound": list(result.bounds),
        "degenerate": list(result.degenerate),
        "loglog_slope": result.loglog_slope,
        "slope_stderr": result.slope_stderr,
    }
    return ReportArtifact("rate_study", payload, "json")
