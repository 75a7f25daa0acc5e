"""Exception types shared across the package."""


class PaError(Exception):
    """Base class for every error raised by :mod:`mmhpa`."""


class ParameterError(PaError, ValueError):
    """A parameter is out of range or inconsistent with another one."""


class InsufficientInputError(PaError):
    """The key stream ran out before a job could be filled.

    Attributes
    ----------
    filled : int
        Number of accepted blocks obtained before the stream was exhausted.
    needed : int
        Number of accepted blocks that were requested.
    """

    def __init__(self, message, filled=0, needed=0):
        super().__init__(message)
        self.filled = filled
        self.needed = needed


class KeyFormatError(PaError):
    """A key, seed or manifest file is malformed."""


class VerificationError(PaError):
    """A self-check or brute-force oracle reported a failure."""
