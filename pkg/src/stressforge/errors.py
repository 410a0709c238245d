"""Exception types shared across the stressforge package."""


class StressforgeError(Exception):
    """Base class for all stressforge errors."""


class ParameterError(StressforgeError, ValueError):
    """Invalid physical or configuration parameter."""


class ShapeError(StressforgeError, ValueError):
    """Array dimensions do not match the expected grid."""


class ValidationError(StressforgeError, ValueError):
    """A case, channel stack, or manifest violates its invariants."""


class UnderConstrainedError(StressforgeError, RuntimeError):
    """Boundary conditions leave rigid-body modes unconstrained."""


class NumericalError(StressforgeError, RuntimeError):
    """Linear solve failed or exceeded the residual tolerance."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class FormatError(StressforgeError, ValueError):
    """Binary record file is malformed or corrupt.

    ``record_index`` and ``byte_offset`` locate the failure when known.
    """

    def __init__(self, message: str, record_index: int | None = None,
                 byte_offset: int | None = None):
        super().__init__(message)
        self.record_index = record_index
        self.byte_offset = byte_offset


class UnsupportedVersionError(FormatError):
    """Record file declares a format version this reader does not support."""


class UndefinedMetricError(StressforgeError, ValueError):
    """Metric denominator is degenerate (constant or non-positive truth)."""


class EmptyInputError(StressforgeError, ValueError):
    """An aggregate was requested over an empty collection."""


class SplitConflictError(StressforgeError, ValueError):
    """A split name already exists in the manifest."""
