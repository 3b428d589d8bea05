"""Sliding-window (Takens) embedding with unit delay."""
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .exceptions import InvalidWindowError

DEFAULT_WINDOW = 3


def takens_embed(series, m=DEFAULT_WINDOW):
    """Return the ``(len(series) - m + 1, m)`` cloud of consecutive length-`m` windows."""
    y = np.asarray(getattr(series, "values", series), dtype=np.float64)
    if m < 1:
        raise InvalidWindowError(f"window size must be >= 1, got {m}")
    if y.ndim != 1 or y.size < m:
        raise InvalidWindowError(f"series of length {y.size} is shorter than window {m}")
    return sliding_window_view(y, m).copy()
