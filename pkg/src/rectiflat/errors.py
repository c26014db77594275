"""Exception hierarchy; error kinds map one-to-one onto CLI exit codes."""


class RectiflatError(Exception):
    """Base class for all package errors."""


class MetricError(RectiflatError):
    """Triangle inequality (or symmetry/diagonal) violated beyond tolerance."""


class WeightError(RectiflatError):
    """Nonpositive or non-finite weight."""


class DomainError(RectiflatError):
    """Argument outside the operation's domain (empty subset, K < 1, ...)."""


class SpecError(RectiflatError):
    """Generator spec parameter outside its documented range."""


class AmbientError(RectiflatError):
    """Operation not defined in this ambient (e.g. planes on abstract data)."""


class DegenerateError(RectiflatError):
    """Degenerate input (all points equal) where a fit is requested."""


class ConfigError(RectiflatError):
    """Invalid analysis configuration; message carries the field path."""


class PreconditionError(RectiflatError):
    """A stated precondition failed; message names the violated clause."""

    def __init__(self, clause: str):
        super().__init__(clause)
        self.clause = clause


class InvariantViolation(RectiflatError):
    """A hard postcondition (a theorem's guarantee) failed numerically."""
