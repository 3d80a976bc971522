"""Reconstruction error metrics."""

import math

import numpy as np

from .errors import DimensionError


def mse_db(x, x_rec) -> float:
    """``10 log10(||x - x_rec||^2 / N)``; ``-inf`` for an exact reconstruction."""
    x = np.asarray(x, dtype=float)
    x_rec = np.asarray(x_rec, dtype=float)
    if x.shape != x_rec.shape:
        raise DimensionError(f"shape mismatch {x.shape} vs {x_rec.shape}")
    err = float(np.sum((x - x_rec) ** 2)) / x.shape[0]
    return 10.0 * math.log10(err) if err > 0 else -math.inf


def db(mse: float) -> float:
    """Convert a linear MSE to decibels (``-inf`` for zero)."""
    return 10.0 * math.log10(mse) if mse > 0 else -math.inf
