"""Exception hierarchy.

Validation problems subclass :class:`ValidationError` (also a ``ValueError``);
the CLI maps each family onto a fixed exit code.
"""


class QdiscrimError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(QdiscrimError, ValueError):
    """An input violates a documented invariant."""


class NotHermitian(ValidationError):
    pass


class NotPsd(ValidationError):
    pass


class ZeroMatrix(ValidationError):
    pass


class BadPrior(ValidationError):
    pass


class BadState(ValidationError):
    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class BadPovm(ValidationError):
    pass


class DimMismatch(ValidationError):
    pass


class WrongArity(ValidationError):
    pass


class NotUnambiguous(ValidationError):
    """A conclusive POVM element fires on a state it does not name."""

    def __init__(self, message: str, pair: tuple[int, int], magnitude: float):
        super().__init__(message)
        self.pair = pair
        self.magnitude = magnitude


class NotCommuting(QdiscrimError):
    """The ensemble is outside the exactly solvable (commuting) class."""


class ParseError(QdiscrimError):
    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.line = line
        self.field = field


class NoConvergence(QdiscrimError, ArithmeticError):
    pass


class CertificateFailed(QdiscrimError):
    """A POVM built by an exact solver failed its own optimality check."""


class InternalInconsistency(QdiscrimError):
    """A proven relation between computed quantities was violated numerically."""
