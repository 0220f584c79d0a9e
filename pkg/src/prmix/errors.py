"""Exception hierarchy shared across the package."""


class PrmixError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(PrmixError):
    """Invalid or inconsistent run configuration."""


class UnsupportedObservation(PrmixError):
    """Observation outside the support of a kernel family or null density."""


class NumericalDegeneracy(PrmixError):
    """The recursion normalizer underflowed to zero; widen the index grid."""

    def __init__(self, msg, step=None):
        super().__init__(msg)
        self.step = step


class DegenerateNull(PrmixError):
    """The null likelihood supremum is unbounded on this data prefix."""


class SolverDidNotConverge(PrmixError):
    """Iterative solver hit its budget before reaching tolerance."""

    def __init__(self, msg, last_value=None, gap=None):
        super().__init__(msg)
        self.last_value = last_value
        self.gap = gap


class AbsoluteContinuityViolation(PrmixError):
    """KL divergence undefined: q vanishes where the reference density is positive."""


class InsufficientCheckpoints(PrmixError):
    """Fewer than three checkpoints survive the burn-in cut."""


class OracleSizeExceeded(PrmixError):
    """Brute-force oracle invoked beyond its hard size cap."""
