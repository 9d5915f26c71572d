from ._core import (
    ConfigError,
    DomainError,
    Error,
    Expr,
    NumericError,
    Problem,
    WickSeries,
    hermite,
    residual_gram,
    run,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "Error",
    "Expr",
    "NumericError",
    "Problem",
    "WickSeries",
    "hermite",
    "residual_gram",
    "run",
]
