"""Exception types shared across the package."""


class RelicompError(Exception):
    """Base class for all library errors."""


class ValidationError(RelicompError, ValueError):
    """Malformed input data, file, or configuration.

    Messages name the offending row or field so callers can fix the input.
    """


class UnfittableDataError(ValidationError):
    """Dataset cannot support a fit (failure-free, or fewer than 2 failures)."""


class FitError(RelicompError, RuntimeError):
    """Numerical failure while fitting model parameters."""


class NearHomogeneousError(FitError):
    """Failure data shows no reliability growth.

    The rate-decay likelihood equation has no positive solution, or the
    solution sits at the b -> 0+ boundary where the model degenerates to a
    homogeneous Poisson process and the parameters are unidentifiable.
    """


class NumericalError(RelicompError, RuntimeError):
    """A numerical routine failed to converge within its budget."""


class NearHomogeneousWarning(UserWarning):
    """Fit succeeded but b * end_of_test is small; estimates are fragile."""


class DuplicateComponentWarning(UserWarning):
    """A path listed the same component more than once; it is counted once."""
