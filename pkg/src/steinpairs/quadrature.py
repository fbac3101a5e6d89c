"""Integration plumbing shared by the distribution framework.

Adaptive work is delegated to scipy's QUADPACK wrappers (adaptive
Gauss-Kronrod panels; the epsilon-algorithm extrapolation resolves
integrable endpoint singularities, and the semi-infinite transformation
covers unbounded supports).  On top of that this module provides a
fixed-order Gauss-Legendre cumulative integrator for running integrals
over dense grids; a panel touching an endpoint where the integrand has a
fractional-power factor (t - a)**(s - 1) is refined geometrically toward
the endpoint, with an exact power-law closure for the innermost sliver.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate as _integrate

__all__ = [
    "DEFAULT_ABS_TOL",
    "DEFAULT_REL_TOL",
    "QuadratureError",
    "cumulative_integral",
    "integrate",
    "integrate_with_error",
]

DEFAULT_ABS_TOL = 1e-12
DEFAULT_REL_TOL = 1e-10


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested accuracy."""

    def __init__(self, message: str, estimate: float | None = None, error: float | None = None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


def integrate_with_error(
    f,
    lo: float,
    hi: float,
    *,
    abs_tol: float = DEFAULT_ABS_TOL,
    rel_tol: float = DEFAULT_REL_TOL,
    points=None,
) -> tuple[float, float]:
    """Integral of f over (lo, hi) together with an error estimate.

    `points` marks interior breakpoints (kinks, jumps).  Raises
    QuadratureError, carrying the achieved error estimate, when the
    QUADPACK routine gives up and its reported error is far above the
    requested tolerance.
    """
    if lo == hi:
        return 0.0, 0.0
    if lo > hi:
        value, err = integrate_with_error(f, hi, lo, abs_tol=abs_tol, rel_tol=rel_tol, points=points)
        return -value, err
    kwargs = dict(epsabs=abs_tol, epsrel=rel_tol, limit=200, full_output=1)
    if points is not None and math.isfinite(lo) and math.isfinite(hi):
        interior = [p for p in points if lo < p < hi]
        if interior:
            kwargs["points"] = interior
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _integrate.IntegrationWarning)
        result = _integrate.quad(f, lo, hi, **kwargs)
    value, err = result[0], result[1]
    # QUADPACK's reported error is conservative on short singular panels;
    # raise only for genuinely hopeless integrals (divergent or far off)
    hopeless = not math.isfinite(value) or err > 1e-6 * max(1.0, abs(value))
    if len(result) > 3 and hopeless:
        raise QuadratureError(
            f"quadrature on [{lo}, {hi}] did not converge "
            f"(estimate {value:.6e}, error estimate {err:.2e})",
            estimate=value,
            error=err,
        )
    return value, err


def integrate(f, lo: float, hi: float, **kwargs) -> float:
    """Convenience wrapper around integrate_with_error returning the value."""
    return integrate_with_error(f, lo, hi, **kwargs)[0]


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def _panel_values(f, edges_lo, edges_hi):
    """Fixed 24-point Gauss-Legendre on each panel [edges_lo[i], edges_hi[i]]."""
    half = 0.5 * (edges_hi - edges_lo)
    mid = 0.5 * (edges_hi + edges_lo)
    nodes = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    vals = f(nodes.ravel()).reshape(nodes.shape)
    return half * (vals @ _GL_WEIGHTS)


_DYADIC_LEVELS = 44


def _graded_panel(f, endpoint, d_lo, d_hi, exponent, lower_side):
    """Integral over the distance range [d_lo, d_hi] from a fractional-power
    endpoint, with geometrically graded sub-panels.

    Grading keeps each sub-panel's width comparable to its distance, which
    restores fixed-rule accuracy for a d**(s-1) factor.  When d_lo is zero
    the innermost sliver (below float resolution of further grading) is
    closed with the local power law: its integral is
    f(d_hat) d_hat**(1-s) d_min**s / s evaluated at d_hat = d_min/2.
    """
    closure = 0.0
    sign = 1.0 if lower_side else -1.0
    if d_lo == 0.0:
        d_min = d_hi * 2.0**-_DYADIC_LEVELS
        if endpoint != 0.0:
            d_min = max(d_min, 8.0 * np.spacing(abs(endpoint)))
        t_hat = endpoint + sign * 0.5 * d_min
        d_hat = abs(t_hat - endpoint)  # exact distance of the rounded point
        closure = float(f(t_hat)) * d_hat ** (1.0 - exponent) * d_min**exponent / exponent
        d_lo = d_min
    n_levels = max(1, int(math.ceil(math.log2(d_hi / d_lo))))
    edges = d_lo * (d_hi / d_lo) ** (np.arange(n_levels + 1) / n_levels)
    edges[0], edges[-1] = d_lo, d_hi
    halves = 0.5 * np.diff(edges)
    mids = 0.5 * (edges[:-1] + edges[1:])
    d_nodes = (mids[:, None] + halves[:, None] * _GL_NODES[None, :]).ravel()
    t = endpoint + sign * d_nodes
    # near a nonzero endpoint t rounds to the double grid; weight f with the
    # exact distance of the rounded point so its power factor stays coherent
    d_exact = np.abs(t - endpoint)
    vals = f(t) * (d_nodes / d_exact) ** (exponent - 1.0)
    return closure + float(np.dot(halves, vals.reshape(mids.size, -1) @ _GL_WEIGHTS))


def cumulative_integral(
    f,
    nodes: np.ndarray,
    *,
    lower_exponent: float | None = None,
    upper_exponent: float | None = None,
) -> np.ndarray:
    """Per-panel integrals of f between consecutive nodes.

    Returns the length len(nodes)-1 array of integrals over
    [nodes[i], nodes[i+1]]; callers prefix- or suffix-sum them for
    running integrals from either end.  f must accept ndarray input.
    lower_exponent (resp. upper_exponent) s declares a fractional-power
    factor (t - a)**(s-1) of f at nodes[0] (resp. (b - t)**(s-1) at
    nodes[-1]); the touching panel is then refined dyadically so the
    fixed rule keeps full accuracy.
    """
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1 or nodes.size < 2:
        raise ValueError("cumulative_integral needs at least two nodes")
    if np.any(np.diff(nodes) < 0.0):
        raise ValueError("nodes must be nondecreasing")
    panels = np.zeros(nodes.size - 1)
    lo, hi = nodes[0], nodes[-1]

    def fractional(exponent):
        return exponent is not None and exponent != round(exponent)

    # a panel needs grading when it is wide relative to its distance from a
    # fractional-power endpoint; well-graded (Chebyshev-like) grids only
    # trigger this for the touching panel
    refine = np.zeros(nodes.size - 1, dtype=bool)
    widths = np.diff(nodes)
    if fractional(lower_exponent):
        refine |= (nodes[:-1] - lo) < 4.0 * widths
    if fractional(upper_exponent):
        refine |= (hi - nodes[1:]) < 4.0 * widths
    refine &= widths > 0.0

    plain = ~refine & (widths > 0.0)
    if plain.any():
        panels[plain] = _panel_values(f, nodes[:-1][plain], nodes[1:][plain])
    for i in np.nonzero(refine)[0]:
        left, right = nodes[i], nodes[i + 1]
        lower_side = fractional(lower_exponent) and (
            not fractional(upper_exponent) or left - lo <= hi - right
        )
        if lower_side:
            panels[i] = _graded_panel(f, lo, left - lo, right - lo, lower_exponent, True)
        else:
            panels[i] = _graded_panel(f, hi, hi - right, hi - left, upper_exponent, False)
    return panels
