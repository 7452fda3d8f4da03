"""Photon-number distributions at the output of a 50:50 beam splitter fed with Fock states."""

__version__ = "0.1.0"

from .errors import DomainError, EdgeError, NumericalError, RegimeError, ResourceLimitError
from .exact import (
    FockInput,
    balanced_amplitude,
    exact_amplitude,
    exact_column,
    exact_probabilities,
    negative_y_amplitude,
)
from .numerics import SignedLogValue, log_binomial, log_factorial, signed_log_sum
from .series import DistributionSeries, Engine, OutputPoint, distribution

__all__ = [
    "DistributionSeries",
    "DomainError",
    "EdgeError",
    "Engine",
    "FockInput",
    "NumericalError",
    "OutputPoint",
    "RegimeError",
    "ResourceLimitError",
    "SignedLogValue",
    "balanced_amplitude",
    "distribution",
    "exact_amplitude",
    "exact_column",
    "exact_probabilities",
    "log_binomial",
    "log_factorial",
    "negative_y_amplitude",
    "signed_log_sum",
]
