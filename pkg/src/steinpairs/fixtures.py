"""Named distribution specs and test functions shared by tests, CLI and studies."""

from __future__ import annotations

import math

import numpy as np

from .framework import DistributionSpec, Smoothness, SupportInterval, TestFunction
from .special import BetaParams, log_beta_function

__all__ = [
    "beta_spec",
    "exponential_spec",
    "gamma2_density",
    "named_test_function",
    "normal_spec",
    "smoothstep_test_function",
    "uniform_increasing_gamma_spec",
    "TEST_FUNCTION_NAMES",
]

_SQRT_TWO_PI = math.sqrt(2.0 * math.pi)


def beta_spec(a: float, b: float) -> DistributionSpec:
    """Beta(a, b) target with its linear coefficient (a+b)(a/(a+b) - x).

    The matching diffusion coefficient is eta(x) = x(1 - x).
    """
    params = BetaParams(a, b)
    log_norm = log_beta_function(params)

    def p(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.exp((a - 1.0) * np.log(x) + (b - 1.0) * np.log1p(-x) - log_norm)
        return out

    def log_p(x):
        x = np.asarray(x, dtype=float)
        return (a - 1.0) * np.log(x) + (b - 1.0) * np.log1p(-x) - log_norm

    return DistributionSpec(
        support=SupportInterval(0.0, 1.0),
        p=p,
        log_p=log_p,
        psi=lambda x: (a - 1.0 - (a + b - 2.0) * np.asarray(x)) / (np.asarray(x) * (1.0 - np.asarray(x))),
        gamma=lambda x: a - (a + b) * np.asarray(x, dtype=float),
        gamma_prime=lambda x: np.full_like(np.asarray(x, dtype=float), -(a + b)),
        eta=lambda x: np.asarray(x, dtype=float) * (1.0 - np.asarray(x, dtype=float)),
        eta_prime=lambda x: 1.0 - 2.0 * np.asarray(x, dtype=float),
        lower_exponent=a,
        upper_exponent=b,
        name=f"beta({a},{b})",
    )


def normal_spec() -> DistributionSpec:
    """Standard normal target with gamma(x) = -x (so eta is identically one)."""

    def p(x):
        x = np.asarray(x, dtype=float)
        return np.exp(-0.5 * x * x) / _SQRT_TWO_PI

    return DistributionSpec(
        support=SupportInterval(-math.inf, math.inf),
        p=p,
        log_p=lambda x: -0.5 * np.asarray(x) ** 2 - math.log(_SQRT_TWO_PI),
        psi=lambda x: -np.asarray(x, dtype=float),
        gamma=lambda x: -np.asarray(x, dtype=float),
        gamma_prime=lambda x: np.full_like(np.asarray(x, dtype=float), -1.0),
        eta=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        eta_prime=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        name="normal",
    )


def exponential_spec(alpha: float = 1.0) -> DistributionSpec:
    """Exponential with rate alpha; gamma(x) = 1 - alpha x pairs with eta(x) = x."""
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")

    def p(x):
        x = np.asarray(x, dtype=float)
        return alpha * np.exp(-alpha * x)

    return DistributionSpec(
        support=SupportInterval(0.0, math.inf),
        p=p,
        log_p=lambda x: math.log(alpha) - alpha * np.asarray(x, dtype=float),
        psi=lambda x: np.full_like(np.asarray(x, dtype=float), -alpha),
        gamma=lambda x: 1.0 - alpha * np.asarray(x, dtype=float),
        gamma_prime=lambda x: np.full_like(np.asarray(x, dtype=float), -alpha),
        eta=lambda x: np.asarray(x, dtype=float),
        eta_prime=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        name=f"exponential({alpha})",
    )


def gamma2_density(alpha: float):
    """Density of the shape-2 Gamma law alpha^2 x e^(-alpha x) (the lifted exponential)."""

    def p(x):
        x = np.asarray(x, dtype=float)
        return alpha * alpha * x * np.exp(-alpha * x)

    return p


def uniform_increasing_gamma_spec() -> DistributionSpec:
    """Uniform density on (0, 1) paired with the increasing gamma(x) = x.

    Deliberately violates the monotonicity/mean-zero conditions; used to
    exercise validation failure paths.
    """
    return DistributionSpec(
        support=SupportInterval(0.0, 1.0),
        p=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        gamma=lambda x: np.asarray(x, dtype=float) - 0.5,  # sign change so x0 exists
        name="uniform-increasing-gamma",
    )


def smoothstep_test_function(left: float = 0.3, right: float = 0.65) -> TestFunction:
    """Cubic ramp from 0 to 1 on [left, right]; C^1 with Lipschitz derivative.

    ||h'|| = 1.5/w and ||h''|| = 6/w^2 with w = right - left; the second
    derivative jumps at the two joints, which are listed as kinks.
    """
    w = right - left

    def fn(x):
        u = np.clip((np.asarray(x, dtype=float) - left) / w, 0.0, 1.0)
        return u * u * (3.0 - 2.0 * u)

    def d1(x):
        x = np.asarray(x, dtype=float)
        u = (x - left) / w
        inside = (u > 0.0) & (u < 1.0)
        return np.where(inside, 6.0 * u * (1.0 - u) / w, 0.0)

    def d2(x):
        x = np.asarray(x, dtype=float)
        u = (x - left) / w
        inside = (u > 0.0) & (u < 1.0)
        return np.where(inside, (6.0 - 12.0 * u) / (w * w), 0.0)

    return TestFunction(
        fn=fn,
        smoothness=Smoothness.C1_LIPSCHITZ,
        norms={0: 1.0, 1: 1.5 / w, 2: 6.0 / (w * w)},
        derivatives={1: d1, 2: d2},
        kinks=(left, right),
        lower_limit=0.0 if left > 0.0 else None,
        upper_limit=1.0 if right < 1.0 else None,
        name="smoothstep",
    )


def _sin_test_function() -> TestFunction:
    return TestFunction(
        fn=np.sin,
        smoothness=Smoothness.C1_LIPSCHITZ,
        norms={0: 2.0, 1: 1.0, 2: 1.0, 3: 1.0},
        derivatives={1: np.cos, 2: lambda x: -np.sin(np.asarray(x)), 3: lambda x: -np.cos(np.asarray(x))},
        lower_limit=0.0,
        name="sin",
    )


def _x_exp_test_function() -> TestFunction:
    """h(x) = x e^(-x) on [0, inf): ||h'|| = 1 (at 0), ||h''|| = 2 (at 0)."""

    def fn(x):
        x = np.asarray(x, dtype=float)
        return x * np.exp(-x)

    def d1(x):
        x = np.asarray(x, dtype=float)
        return (1.0 - x) * np.exp(-x)

    def d2(x):
        x = np.asarray(x, dtype=float)
        return (x - 2.0) * np.exp(-x)

    return TestFunction(
        fn=fn,
        smoothness=Smoothness.C1_LIPSCHITZ,
        norms={0: 1.0, 1: 1.0, 2: 2.0},
        derivatives={1: d1, 2: d2},
        lower_limit=0.0,
        name="xexp",
    )


_NAMED_BUILDERS = {
    "x": lambda: TestFunction.polynomial((0.0, 1.0), name="x"),
    "x2": lambda: TestFunction.polynomial((0.0, 0.0, 1.0), name="x2"),
    "x3": lambda: TestFunction.polynomial((0.0, 0.0, 0.0, 1.0), name="x3"),
    "smoothstep": smoothstep_test_function,
    "sin": _sin_test_function,
    "xexp": _x_exp_test_function,
}

TEST_FUNCTION_NAMES = tuple(sorted(_NAMED_BUILDERS))


def named_test_function(name: str) -> TestFunction:
    """Look up a fixture test function by name; see TEST_FUNCTION_NAMES."""
    try:
        return _NAMED_BUILDERS[name]()
    except KeyError:
        raise KeyError(f"unknown test function {name!r}; choose from {TEST_FUNCTION_NAMES}")
