"""Exception types shared across the package."""


class RkccaError(Exception):
    """Base class for all package errors."""


class ValidationError(RkccaError):
    """Invalid user input or malformed data (CLI exit code 2)."""


class NumericalError(RkccaError):
    """Numerical failure during estimation (CLI exit code 3)."""


class DegenerateSampleError(NumericalError):
    """Sample admits no usable kernel geometry (e.g. zero median distance)."""


class PairSkip(RkccaError):
    """A single gene pair cannot be tested; the scan records and continues."""
