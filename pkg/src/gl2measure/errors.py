"""Exception hierarchy shared across the library."""


class GL2MeasureError(Exception):
    """Base class for all errors raised by this library."""


class ZeroValue(GL2MeasureError):
    """An operation that needs a nonzero element received zero."""


class DivergentSeries(GL2MeasureError):
    """A requested series has no value in the value ring."""


class PrecisionExhausted(GL2MeasureError):
    """A result cannot be certified within the available precision window."""


class NotInvertible(GL2MeasureError):
    """A matrix with zero determinant cannot be inverted or decomposed."""


class InvalidLevel(GL2MeasureError):
    """A level pair violates the preconditions of the operation."""


class BudgetExceeded(GL2MeasureError):
    """A coset enumeration would exceed the configured budget."""


class InvalidSet(GL2MeasureError):
    """A set presentation violates the structural invariants."""


class NotReduced(InvalidSet):
    """An operation requiring reduced presentations received one that is not."""


class NotEqualSets(GL2MeasureError):
    """Two presentations expected to describe the same set do not."""


class NotRepresentable(GL2MeasureError):
    """A translate leaves the ring of measurable sets."""


class UnsupportedSupport(GL2MeasureError):
    """A function's supports do not satisfy the operation's restrictions."""


class UnknownName(GL2MeasureError):
    """A workspace lookup failed."""
