"""Exception hierarchy shared across the package."""


class KondotriError(Exception):
    """Base class for all package-specific errors."""


class InvalidSectorError(KondotriError):
    """Magnetization sector is incompatible with the site count."""


class ModelSizeError(KondotriError):
    """Chain too short for the requested coupling pattern."""


class PartitionError(KondotriError):
    """Block partition is empty, overlapping, or not exhaustive."""


class DimensionCapError(KondotriError):
    """A dense object would exceed the configured dimension cap."""


class ConvergenceError(KondotriError):
    """Iterative eigensolver failed to reach the requested residual."""

    def __init__(self, message: str, best_energy: float, best_residual: float):
        super().__init__(message)
        self.best_energy = best_energy
        self.best_residual = best_residual


class OracleScopeError(DimensionCapError):
    """Dense spectrum oracle asked for a matrix above its cap."""


class NegativityDomainError(KondotriError):
    """A negativity came out more negative than numerical noise allows."""


class SweepError(KondotriError):
    """Every grid point of a sweep failed."""


class DatasetParseError(KondotriError):
    """Dataset file does not match the documented CSV schema."""


class FitDomainError(KondotriError):
    """Fit input violates a domain requirement (e.g. nonpositive values)."""


class IllConditionedFitError(KondotriError):
    """Requested fit has an unidentifiable parameter."""


class OptimizationError(KondotriError):
    """All optimizer restarts diverged."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace or []
