"""Exception hierarchy."""


class CoopShiftError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(CoopShiftError, ValueError):
    """An argument lies outside the domain of an operation."""


class SolverError(CoopShiftError, RuntimeError):
    """An iterative solver did not converge."""

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(f"{message} (residual={residual:.3e}, iterations={iterations})")
        self.residual = residual
        self.iterations = iterations


class SingularityError(DomainError):
    """Zero separation where the near-field interaction diverges."""


class InvalidSampleError(DomainError):
    """Three-point sample with a non-positive center flux."""


class IllConditionedSampleError(DomainError):
    """Three-point sample whose exact-estimator denominator is ~0."""


class UnidentifiableError(DomainError):
    """Fit design carries no information on the free parameter."""


class ConfigError(CoopShiftError, ValueError):
    """Malformed or invalid configuration file."""

    def __init__(self, message, key=None, line=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.key = key
        self.line = line
