"""Exception types shared across the package."""


class BirkhoffError(Exception):
    """Base class for all errors raised by this package."""


class InvalidDigitError(BirkhoffError, ValueError):
    """A continued fraction or Ostrowski digit violates its admissibility rule."""


class InvalidExpansionError(BirkhoffError, ValueError):
    """An Ostrowski digit string is not admissible."""


class PreconditionError(BirkhoffError, ValueError):
    """An operation was called outside its stated domain of validity."""


class DomainError(BirkhoffError, ValueError):
    """The operation needs an irrational rotation number or an exact-field value."""


class OutOfRangeError(BirkhoffError, LookupError):
    """An index points past the end of a finite expansion."""


class ResourceLimitError(BirkhoffError, ValueError):
    """A size cap protecting a quadratic-cost routine was exceeded."""


class RefinementExhaustedError(BirkhoffError, RuntimeError):
    """A comparison stayed undecided after the configured digit cap.

    Unreachable for genuinely irrational digit streams; the cap guards
    against buggy generators that eventually repeat a rational tail.
    """


class PrecisionInsufficientError(BirkhoffError, RuntimeError):
    """Breakpoints over unrelated rotation numbers could not be separated
    at the requested precision.  Retry with more bits."""


class InternalInconsistencyError(BirkhoffError, RuntimeError):
    """Two independent exact computations of the same quantity disagreed."""
