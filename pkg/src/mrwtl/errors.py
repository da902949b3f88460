"""Exception types raised across the package."""


class MrwtlError(Exception):
    """Base class for every error raised by :mod:`mrwtl`."""


class NotFIRInvertible(MrwtlError):
    """The polyphase determinant is not a monomial, so no FIR inverse exists."""


class NotDecomposable(MrwtlError):
    """A rational filter cannot be split back into M-band slots."""


class LengthMismatch(MrwtlError, ValueError):
    """Two signals (or subbands) disagree in length."""


class TooShortSignal(MrwtlError, ValueError):
    """Not enough samples to pose a well-defined least-squares problem."""


class OddTapCount(MrwtlError, ValueError):
    """Predict/update templates require an even number of taps."""


class NoConvergence(MrwtlError):
    """An iterative solver hit its iteration cap while still infeasible.

    The partially converged result is attached as ``result``.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
