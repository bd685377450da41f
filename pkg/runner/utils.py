"""
utils.py
========

Utility functions shared by the command layer.

Retry logic for filesystem writes, unit-suffixed quantity parsing for
configuration files, DataFrame validation and duration formatting.

Author: Dênio Barbosa Júnior
Created: 2026-10-15
"""

import re
from functools import wraps
from typing import Any, Callable, Dict, Tuple, TypeVar, Union

import pandas as pd
from loguru import logger
from tenacity import (
    retry,
    retry_if_exception_type,
    stop_after_attempt,
    wait_exponential,
)


T = TypeVar("T")

# unit -> (dimension, factor to SI)
UNITS: Dict[str, Tuple[str, float]] = {
    "T": ("field", 1.0),
    "mT": ("field", 1e-3),
    "uT": ("field", 1e-6),
    "nT": ("field", 1e-9),
    "pT": ("field", 1e-12),
    "fT": ("field", 1e-15),
    "G": ("field", 1e-4),
    "mG": ("field", 1e-7),
    "s": ("time", 1.0),
    "ms": ("time", 1e-3),
    "us": ("time", 1e-6),
    "ns": ("time", 1e-9),
    "Hz": ("frequency", 1.0),
    "kHz": ("frequency", 1e3),
    "MHz": ("frequency", 1e6),
    "GHz": ("frequency", 1e9),
    "s^-1": ("rate", 1.0),
    "1/s": ("rate", 1.0),
    "ms^-1": ("rate", 1e3),
    "1/ms": ("rate", 1e3),
    "rad/s": ("angular", 1.0),
    "krad/s": ("angular", 1e3),
    "Mrad/s": ("angular", 1e6),
}

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(\S*)\s*$")


def with_retry(
    max_attempts: int = 3,
    min_wait: float = 0.5,
    max_wait: float = 5.0,
) -> Callable:
    """
    Decorator to retry transient filesystem errors with exponential backoff.

    Args:
        max_attempts: Maximum number of attempts
        min_wait: Minimum wait time between retries (seconds)
        max_wait: Maximum wait time between retries (seconds)

    Returns:
        Decorated function with retry logic

    Example:
        >>> @with_retry(max_attempts=3)
        ... def write_summary(path, text):
        ...     path.write_text(text)
    """

    def decorator(func: Callable[..., T]) -> Callable[..., T]:
        @wraps(func)
        @retry(
            stop=stop_after_attempt(max_attempts),
            wait=wait_exponential(multiplier=1, min=min_wait, max=max_wait),
            retry=retry_if_exception_type(OSError),
            before_sleep=lambda retry_state: logger.warning(
                f"Retry attempt {retry_state.attempt_number} after error: "
                f"{retry_state.outcome.exception()}"
            ),
            reraise=True,
        )
        def wrapper(*args: Any, **kwargs: Any) -> T:
            return func(*args, **kwargs)

        return wrapper

    return decorator


def parse_quantity(value: Union[str, int, float], dimension: str) -> float:
    """
    Parse a number with an optional unit suffix into SI.

    Args:
        value: Plain number or string such as "36 fT", "0.92 G", "15 ms",
            "322 kHz" or "0.43 ms^-1"
        dimension: Expected dimension: field, time, frequency, rate or angular

    Returns:
        Value in SI units

    Raises:
        ValueError: On unparseable text, unknown units or a unit of the
            wrong dimension

    Example:
        >>> parse_quantity("2 ms", "time")
        0.002
        >>> parse_quantity("0.43 ms^-1", "rate")
        430.0
    """
    if isinstance(value, bool):
        raise ValueError(f"Expected a {dimension} quantity, got boolean {value}")
    if isinstance(value, (int, float)):
        return float(value)
    match = _QUANTITY.match(str(value))
    if not match:
        raise ValueError(f"Cannot parse quantity '{value}'")
    number, unit = match.groups()
    if not unit:
        return float(number)
    if unit not in UNITS:
        raise ValueError(f"Unknown unit '{unit}' in '{value}'")
    unit_dimension, factor = UNITS[unit]
    if unit_dimension != dimension:
        raise ValueError(f"Unit '{unit}' is a {unit_dimension}, expected a {dimension}")
    return float(number) * factor


def validate_dataframe(df: pd.DataFrame, required_columns: list) -> bool:
    """
    Validate that DataFrame has required columns and is not empty.

    Args:
        df: DataFrame to validate
        required_columns: List of column names that must exist

    Returns:
        True if DataFrame is valid

    Raises:
        ValueError: If DataFrame is invalid
    """
    if df.empty:
        raise ValueError("DataFrame is empty")

    missing_cols = set(required_columns) - set(df.columns)
    if missing_cols:
        raise ValueError(f"Missing required columns: {sorted(missing_cols)}")

    return True


def format_duration(seconds: float) -> str:
    """
    Format duration in human-readable format.

    Example:
        >>> format_duration(125.5)
        '2m 5.5s'
    """
    if seconds < 60:
        return f"{seconds:.1f}s"
    minutes = int(seconds // 60)
    remaining_seconds = seconds % 60
    return f"{minutes}m {remaining_seconds:.1f}s"
