"""Exception hierarchy shared by all modules."""


class PseudoprocError(Exception):
    """Base class for every error raised by this package."""


class DomainError(PseudoprocError, ValueError):
    """An argument lies outside the domain of the operation."""


class BoundaryError(DomainError):
    """A point on the boundary of the unit cube where only interior points are allowed."""


class UnsupportedKindError(PseudoprocError, ValueError):
    """The operation is not defined for this model or class kind."""


class EstimationError(PseudoprocError, RuntimeError):
    """A Monte Carlo estimate could not be formed (for example an empty band)."""


class EvaluationError(PseudoprocError, ValueError):
    """A function produced non-finite values."""


class FitError(PseudoprocError, RuntimeError):
    """Least-squares design is rank deficient even after jitter."""


class NonPSDError(PseudoprocError, ValueError):
    """Covariance matrix could not be factorised even with maximal jitter."""


class ConfigError(PseudoprocError, ValueError):
    """Invalid experiment configuration."""


class IngestError(PseudoprocError, ValueError):
    """Malformed input data file."""


class ModelRequiredError(PseudoprocError, ValueError):
    """The requested check needs a generative model but only data was supplied."""
