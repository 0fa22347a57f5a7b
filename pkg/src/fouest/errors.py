"""Exception types shared across the package."""


class FouestError(Exception):
    """Base class for all package-specific errors."""


class DomainError(FouestError, ValueError):
    """A parameter lies outside the domain an operation supports."""


class CirculantEmbeddingFailed(FouestError, RuntimeError):
    """Circulant embedding produced a significantly negative eigenvalue."""


class CholeskyFailed(FouestError, RuntimeError):
    """Covariance matrix is numerically not positive semidefinite."""


class SchemeUnstable(FouestError, ValueError):
    """Requested discretization is unstable for the given step size."""


class DegeneratePath(FouestError, ValueError):
    """Path has (numerically) zero integrated square; estimator undefined."""


class ConfigError(FouestError, ValueError):
    """Experiment configuration is malformed or violates an invariant."""
