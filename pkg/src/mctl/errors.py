"""Exception hierarchy shared by every mctl module."""


class MctlError(Exception):
    """Base class for all errors raised by mctl."""


class InputError(MctlError, ValueError):
    """Malformed or inconsistent input data (shapes, files, values)."""


class ConfigError(MctlError, ValueError):
    """Invalid hyperparameter or experiment configuration."""


class NumericError(MctlError, ArithmeticError):
    """A numerical routine failed or the problem is too ill-conditioned."""


class ConvergenceWarning(UserWarning):
    """The solver stalled or finished without meeting its tolerances."""
