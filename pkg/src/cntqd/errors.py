"""Exception hierarchy shared by the engines and the command-line front end."""


class CntqdError(Exception):
    """Base class for every error raised by this package."""


class InputError(CntqdError, ValueError):
    """An argument violates an operation's precondition."""


class NumericalError(CntqdError, RuntimeError):
    """A numerical procedure failed to reach its contract."""
