"""First-order Stein operators, exchangeable pairs and the Beta/Polya limit.

The package has three layers: self-contained special functions
(`special`), a general framework for first-order operators of
absolutely continuous targets (`framework`, `quadrature`), and the
closed-form Beta/Polya specialization with reproduction studies and a
CLI (`beta`, `polya`, `experiments`, `cli`).
"""

from .framework import (
    BoundReport,
    DiscreteMeasure,
    DistributionSpec,
    FrameworkError,
    PairRegressionReport,
    Smoothness,
    SupportInterval,
    TestFunction,
    bound_bounded,
    bound_lipschitz,
    characterization_residual,
    compute_I,
    compute_eta,
    density_from_coefficients,
    derivative_lift,
    find_x0,
    kolmogorov_solution,
    mills_limit_estimate,
    plugin_bound,
    standard_solution,
    stein_kernel,
    validate_spec,
)
from .special import BetaParams, beta_cdf, beta_function, beta_median, beta_pdf, log_gamma

__all__ = [
    "BetaParams",
    "BoundReport",
    "DiscreteMeasure",
    "DistributionSpec",
    "FrameworkError",
    "PairRegressionReport",
    "Smoothness",
    "SupportInterval",
    "TestFunction",
    "beta_cdf",
    "beta_function",
    "beta_median",
    "beta_pdf",
    "bound_bounded",
    "bound_lipschitz",
    "characterization_residual",
    "compute_I",
    "compute_eta",
    "density_from_coefficients",
    "derivative_lift",
    "find_x0",
    "kolmogorov_solution",
    "log_gamma",
    "mills_limit_estimate",
    "plugin_bound",
    "standard_solution",
    "stein_kernel",
    "validate_spec",
]

__version__ = "0.1.0"
