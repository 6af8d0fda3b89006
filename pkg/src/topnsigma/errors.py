"""Exception hierarchy shared by all modules."""


class TopNSigmaError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(TopNSigmaError, ValueError):
    """A sampler or generator parameter is out of its legal range."""


class DomainError(InvalidParameterError):
    """A mathematical argument lies outside the function's domain."""


class DegenerateInputError(TopNSigmaError, ValueError):
    """The input carries too little information to act on (e.g. no finite logits)."""


class DumpFormatError(TopNSigmaError, ValueError):
    """A logit dump could not be parsed.

    ``row`` is the zero-based row index at which parsing failed, or None for
    header-level problems.
    """

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class VerificationError(TopNSigmaError):
    """One or more numerical verification checks failed."""
