"""Empirical processes indexed by pseudo-observations: Kendall, copula and residual processes,
their Gaussian limits and numerical checks of the conditions behind them."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BoundaryError,
    ConfigError,
    DomainError,
    EstimationError,
    EvaluationError,
    FitError,
    IngestError,
    ModelRequiredError,
    NonPSDError,
    PseudoprocError,
    UnsupportedKindError,
)
from .models import DataModel, Sample, sample  # noqa: E402
from .report import VerificationReport  # noqa: E402

__all__ = [
    "__version__", "DataModel", "Sample", "sample", "VerificationReport",
    "PseudoprocError", "DomainError", "BoundaryError", "UnsupportedKindError", "EstimationError",
    "EvaluationError", "FitError", "NonPSDError", "ConfigError", "IngestError", "ModelRequiredError",
]
