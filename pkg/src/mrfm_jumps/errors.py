class ConfigError(ValueError):
    """Invalid or conflicting configuration."""


class InsufficientDataError(RuntimeError):
    """Too few jumps, peaks or lags for the requested statistic."""
