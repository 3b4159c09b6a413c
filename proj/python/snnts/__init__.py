"""Spiking neural network time-series classifiers."""

from ._snnts import *  # noqa: F401,F403
from ._snnts import DataError, FormatError

__version__ = "0.1.0"
