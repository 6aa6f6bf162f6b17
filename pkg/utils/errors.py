"""
Exception hierarchy shared by every FinQuakes module.

All errors derive from ValueError so callers that only care about
"bad input" can keep catching that.
"""


class FinQuakeError(ValueError):
    """Root of all FinQuakes validation and runtime errors."""


class SeriesError(FinQuakeError):
    """Invalid or unreadable index series."""


class SeriesExhaustedError(SeriesError):
    """A day index ran past the end of the series."""


class DMAError(FinQuakeError):
    """Detrending moving average input out of range."""


class StrategyError(FinQuakeError):
    """Invalid strategy parameters."""


class InsufficientHistoryError(StrategyError):
    """Not enough past days for a predictor."""


class BacktestError(FinQuakeError):
    """Backtest cannot be run on the given series/config."""


class NetworkError(FinQuakeError):
    """Invalid network generation parameters."""


class QuakeError(FinQuakeError):
    """Invalid quake engine state or configuration."""


class FitError(FinQuakeError):
    """Distribution fit impossible (too few or degenerate samples)."""


class ConfigError(FinQuakeError):
    """Experiment configuration failed validation."""
