"""Exception hierarchy shared by all modules."""


class BlockNormError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(BlockNormError, ValueError):
    pass


class NotHermitianError(BlockNormError, ValueError):
    pass


class NotUnitaryError(BlockNormError, ValueError):
    pass


class NotPSDError(BlockNormError, ValueError):
    """Raised when a matrix required to be PSD is not.

    The offending minimum eigenvalue is kept on ``min_eigenvalue``.
    """

    def __init__(self, message, min_eigenvalue):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class PartitionError(BlockNormError, ValueError):
    pass


class ParameterError(BlockNormError, ValueError):
    pass


class PreconditionError(BlockNormError, ValueError):
    pass


class NotFoundError(BlockNormError, LookupError):
    pass


class InternalConsistencyError(BlockNormError, RuntimeError):
    """A verified invariant failed. ``stage`` names where."""

    def __init__(self, message, stage):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
