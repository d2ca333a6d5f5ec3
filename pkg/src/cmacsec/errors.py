"""Exception types shared across the package."""


class CmacError(Exception):
    """Base class for all package errors."""


class ValidationError(CmacError, ValueError):
    """Input data violates a documented invariant (bad pmf, shape mismatch)."""


class UsageError(CmacError, ValueError):
    """A call was made with arguments outside the operation's contract."""


class BudgetError(CmacError, RuntimeError):
    """An enumeration would exceed its configured work cap."""

    def __init__(self, message, count=None, cap=None):
        super().__init__(message)
        self.count = count
        self.cap = cap


class GenerationError(CmacError, RuntimeError):
    """Rejection sampling of a codebook layer gave up."""

    def __init__(self, message, layer=None):
        super().__init__(message)
        self.layer = layer


class DecodeError(CmacError):
    """A joint-typicality decoder could not return a unique message tuple.

    ``reason`` is ``"no_hit"`` or ``"ambiguous"``.
    """

    def __init__(self, reason, candidates=()):
        super().__init__(f"decoding failed: {reason}")
        self.reason = reason
        self.candidates = tuple(candidates)
