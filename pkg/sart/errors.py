"""
Exceptions raised by the sart package.

The command line maps ValidationError to exit code 2 and NumericError to exit
code 3.
"""

import numpy as np


class SartError(Exception):
    """Base class for every error raised by sart."""


class ValidationError(SartError, ValueError):
    """An input violates a precondition of the requested operation."""


class NumericError(SartError, ArithmeticError):
    """A computation produced non-finite values."""


def require(condition, message, *args):
    """
    Raise a ValidationError with `message.format(*args)` unless `condition` holds.
    """
    if not condition:
        raise ValidationError(message.format(*args))


def check_finite(values, what):
    """
    Raise NumericError if `values` holds NaN or infinity.

    parameters
    ----------
    values : array-like
        Values to inspect.

    what : str
        Name used in the error message.

    return
    ------
    values : `numpy.ndarray`
        The input as an array.
    """
    values = np.asarray(values)
    if not np.all(np.isfinite(values)):
        bad = int(np.count_nonzero(~np.isfinite(values)))
        raise NumericError("{0} contains {1} non-finite value(s)".format(what, bad))
    return values
