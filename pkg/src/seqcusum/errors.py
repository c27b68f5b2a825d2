"""Exception hierarchy shared by every module."""

from __future__ import annotations


class SeqCusumError(Exception):
    """Base class for all package errors."""


class ConfigurationError(SeqCusumError, ValueError):
    """Invalid parameters, missing quantile cells, bad flag combinations."""


class DataError(SeqCusumError, ValueError):
    """Non-finite, unparsable or degenerate input data."""


class StateError(SeqCusumError, RuntimeError):
    """Operation not allowed in the current state (e.g. step after alarm)."""


class CalibrationError(SeqCusumError, RuntimeError):
    """Quantile calibration could not be carried out."""


class TableError(SeqCusumError, ValueError):
    """Malformed or inconsistent quantile table file."""
