"""Exception hierarchy shared across the toolkit."""


class SnaketraceError(Exception):
    """Base class for all toolkit errors."""


class DomainError(SnaketraceError):
    """Input outside the mathematical domain of an operation."""


class ShapeError(SnaketraceError):
    """State does not conform to the problem topology."""


class CapacityError(SnaketraceError):
    """Requested profile does not fit in the truncation window."""


class UnsupportedTopologyError(SnaketraceError):
    """Operation not defined for this lattice topology."""


class RefinementError(SnaketraceError):
    """Newton refinement failed to converge.

    Carries the last iterate and its residual norm for diagnostics.
    """

    def __init__(self, message, last_iterate=None, residual_norm=None, iterations=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual_norm = residual_norm
        self.iterations = iterations


class SingularSystemError(SnaketraceError):
    """Linear operator singular to tolerance (used as a bifurcation signal)."""

    def __init__(self, message, min_pivot=None):
        super().__init__(message)
        self.min_pivot = min_pivot


class DegenerateBorderError(SnaketraceError):
    """Bordered matrix singular: degenerate (non-fold) singularity."""


class EigenvalueStagnationError(SnaketraceError):
    """Inverse iteration stagnated; best Rayleigh quotient attached."""

    def __init__(self, message, best_rayleigh=None, best_vector=None):
        super().__init__(message)
        self.best_rayleigh = best_rayleigh
        self.best_vector = best_vector


class SwitchingError(SnaketraceError):
    """Branch switching fell back onto the symmetric branch."""


class NonHyperbolicError(SnaketraceError):
    """Map fixed point fails |trace| > 2."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class OutOfWindowError(SnaketraceError):
    """Phase-plane point outside the local-analysis box."""


class OpenLocusError(SnaketraceError):
    """Heteroclinic locus left the parameter window before closing."""

    def __init__(self, message, partial_points=None):
        super().__init__(message)
        self.partial_points = partial_points


class SweepError(SnaketraceError):
    """Fold sweep produced too few usable rows."""


class FitError(SnaketraceError):
    """Power-law fit impossible (non-positive responses or thin grid)."""


class InsufficientDataError(SnaketraceError):
    """Not enough folds/rows for the requested comparison."""


class MissingSweepError(SnaketraceError):
    """verify_lemma called without its prerequisite sweep."""


class ConfigError(SnaketraceError):
    """Run configuration malformed or invalid.

    `path` is the offending key path, e.g. "continuation.dd".
    """

    def __init__(self, message, path=None):
        super().__init__(message)
        self.path = path
