"""Shared validation helpers and error types."""

from __future__ import annotations

import numpy as np


class ValidationError(ValueError):
    """Invalid configuration or inconsistent input dimensions."""


class DivergenceError(RuntimeError):
    """Time integration produced non-finite values.

    Attributes carry the last finite state so callers can persist
    partial results.
    """

    def __init__(self, message, step=None, t=None, last_state=None):
        super().__init__(message)
        self.step = step
        self.t = t
        self.last_state = last_state


def check_vector(x, n=None, name="vector") -> np.ndarray:
    """Coerce to a 1-D float64 array, optionally checking its length."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValidationError(f"{name} must be 1-D, got shape {x.shape}")
    if n is not None and x.shape[0] != n:
        raise ValidationError(f"{name} has length {x.shape[0]}, expected {n}")
    return x


def check_matrix(A, rows=None, name="matrix") -> np.ndarray:
    """Coerce to a 2-D float64 array, optionally checking the row count."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValidationError(f"{name} must be 2-D, got shape {A.shape}")
    if rows is not None and A.shape[0] != rows:
        raise ValidationError(f"{name} has {A.shape[0]} rows, expected {rows}")
    return A
