"""Integration plumbing: singular endpoints, infinite ranges, cumulative grids."""

import math

import numpy as np
import pytest

from steinpairs.quadrature import QuadratureError, cumulative_integral, integrate
from steinpairs.special import BetaParams, log_beta_function


def beta_density(a, b):
    log_norm = log_beta_function(BetaParams(a, b))

    def p(t):
        t = np.asarray(t, dtype=float)
        return np.exp((a - 1.0) * np.log(t) + (b - 1.0) * np.log1p(-t) - log_norm)

    return p


def test_inverse_sqrt_singularity():
    val = integrate(lambda t: t**-0.5 if t > 0 else 0.0, 0.0, 1.0)
    assert val == pytest.approx(2.0, abs=1e-12)


def test_orientation():
    assert integrate(lambda t: t, 1.0, 0.0) == pytest.approx(-0.5, abs=1e-13)


@pytest.mark.parametrize("a,b", [(0.3, 0.3), (0.5, 2.0), (2.0, 3.0)])
def test_singular_beta_mass(a, b):
    p = beta_density(a, b)
    val = integrate(lambda t: float(p(t)) if 0.0 < t < 1.0 else 0.0, 0.0, 1.0)
    assert val == pytest.approx(1.0, abs=5e-12)


def test_infinite_ranges():
    phi = lambda t: math.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)
    assert integrate(phi, -math.inf, math.inf) == pytest.approx(1.0, abs=1e-12)
    assert integrate(lambda t: abs(t) * phi(t), -math.inf, math.inf) == pytest.approx(
        math.sqrt(2.0 / math.pi), abs=1e-12
    )


def test_breakpoint_hint():
    f = lambda t: 1.0 if t < 0.377 else 0.0
    assert integrate(f, 0.0, 1.0, points=[0.377]) == pytest.approx(0.377, abs=1e-13)


def test_divergent_integral_reports_error():
    with pytest.raises(QuadratureError) as info:
        integrate(lambda t: 1.0 / t if t > 0 else 0.0, 0.0, 1.0)
    assert info.value.error is not None


class TestCumulative:
    def test_matches_adaptive_on_singular_density(self):
        a, b = 0.5, 2.0
        p = beta_density(a, b)
        k = np.arange(1, 257)
        cheb = 0.5 * (1.0 - np.cos(np.pi * (2 * k - 1) / 512))
        nodes = np.concatenate([[0.0], cheb, [1.0]])
        panels = cumulative_integral(p, nodes, lower_exponent=a)
        prefix = np.cumsum(panels)
        for i in [0, 3, 60, 200, 255]:
            ref = integrate(
                lambda t: float(p(t)) if 0.0 < t < 1.0 else 0.0, 0.0, float(nodes[i + 1])
            )
            assert prefix[i] == pytest.approx(ref, abs=2e-13)

    def test_suffix_side_accuracy(self):
        # reference from a 40-digit evaluation: the substituted fixed-order
        # panels must beat the adaptive routine on this short singular tail
        import mpmath

        mpmath.mp.dps = 40
        a, b = 2.0, 0.5
        p = beta_density(a, b)
        nodes = np.concatenate([np.linspace(0.0, 0.9999, 400), [1.0]])
        panels = cumulative_integral(p, nodes, upper_exponent=b)
        ref = float(mpmath.betainc(a, b, 0.9999, 1, regularized=True))
        assert panels[-1] == pytest.approx(ref, rel=1e-13)

    def test_rejects_bad_nodes(self):
        with pytest.raises(ValueError):
            cumulative_integral(lambda t: t, np.asarray([0.5, 0.2]))
