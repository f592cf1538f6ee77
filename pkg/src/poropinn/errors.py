"""Exception hierarchy shared by the library and the command line."""


class PoroPinnError(Exception):
    """Base class for all errors raised by poropinn."""


class DimensionError(PoroPinnError, ValueError):
    """Layer specification or array shapes are inconsistent."""


class InputError(PoroPinnError, ValueError):
    """Evaluation point is not finite or has the wrong shape."""


class ParameterError(PoroPinnError, ValueError):
    """Physical or solution parameters are out of range."""


class ConfigError(PoroPinnError, ValueError):
    """Training or run configuration is invalid."""


class UsageError(PoroPinnError, ValueError):
    """A function was called with arguments it cannot work with (empty batch, shape mismatch)."""


class NumericError(PoroPinnError, ArithmeticError):
    """A non-finite value appeared during evaluation or training.

    ``log`` holds whatever training records were produced before the failure.
    """

    def __init__(self, message, log=None):
        super().__init__(message)
        self.log = list(log) if log is not None else []


class CheckpointError(PoroPinnError, ValueError):
    """Checkpoint file is corrupt or has an unsupported version."""
