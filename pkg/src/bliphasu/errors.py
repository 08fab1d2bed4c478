"""Exception types shared across the package."""


class BliPhaSuError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(BliPhaSuError, ValueError):
    """Operand shapes or sizes are inconsistent."""


class DegenerateInputError(BliPhaSuError, ValueError):
    """An input is degenerate, e.g. zero norm where a direction is required."""


class DegenerateSpectrumError(BliPhaSuError, ValueError):
    """The matrix has no usable leading eigenpair (e.g. it is all zeros)."""


class ConfigError(BliPhaSuError, ValueError):
    """Invalid solver or experiment configuration."""


class DivergenceError(BliPhaSuError, RuntimeError):
    """Iterates became non-finite; usually the step size is too large."""

    def __init__(self, message: str, iteration: int | None = None):
        super().__init__(message)
        self.iteration = iteration


class InstanceFormatError(BliPhaSuError, ValueError):
    """An instance file failed to parse or validate."""
