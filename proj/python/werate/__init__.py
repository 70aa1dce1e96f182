"""Weighted entropy rates for i.i.d., Markov and Gaussian sources."""

from ._core import *  # noqa: F401,F403
from ._core import (
    InfiniteInformationError,
    NumericError,
    SizeGuardError,
    ValidationError,
    WerateError,
)

__version__ = "0.3.0"
