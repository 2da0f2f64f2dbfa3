from __future__ import annotations

import math

import numpy as np

__all__ = ["safe_log", "json_float", "csv_float"]


def safe_log(x):
    """Natural log with `log(0) = -inf` and no floating point warnings."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(x)


def json_float(x: float) -> float | str:
    # JSON has no infinities or nan; write them as strings
    x = float(x)
    if math.isfinite(x):
        return x
    if math.isnan(x):
        return "nan"
    return "inf" if x > 0 else "-inf"


def csv_float(x: float) -> str:
    """Shortest round-tripping text, "." as decimal separator, `inf`/`-inf`/`nan` spelled out."""
    x = float(x)
    if math.isfinite(x):
        return repr(x)
    if math.isnan(x):
        return "nan"
    return "inf" if x > 0 else "-inf"
