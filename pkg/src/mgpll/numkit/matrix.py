"""
Dense matrix helpers.

A "matrix" is a 2-D C-contiguous float64 numpy array. These helpers coerce
inputs into that form and enforce the finiteness contract shared by every
public numerical operation.
"""

import numpy as np

from ..errors import NonFiniteError, ShapeError


def as_matrix(values, name: str = "matrix") -> np.ndarray:
    """
    Coerce values into a 2-D float64 matrix.

    1-D input is treated as a single row.

    Args:
        values: Array-like of numbers
        name: Name used in error messages

    Returns:
        2-D float64 array

    Raises:
        ShapeError: If the input has more than two dimensions
        NonFiniteError: If any entry is NaN or Inf
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    elif arr.ndim != 2:
        raise ShapeError(f"{name}: expected a 2-D matrix, got {arr.ndim} dimensions")
    check_finite(arr, name)
    return np.ascontiguousarray(arr)


def check_finite(arr: np.ndarray, name: str = "matrix") -> None:
    """Raise NonFiniteError if arr holds NaN or Inf."""
    if not np.all(np.isfinite(arr)):
        bad = int(np.count_nonzero(~np.isfinite(arr)))
        raise NonFiniteError(f"{name}: {bad} non-finite entries")


def check_same_shape(a: np.ndarray, b: np.ndarray, what: str) -> None:
    """Raise ShapeError unless a and b have identical shapes."""
    if a.shape != b.shape:
        raise ShapeError(f"{what}: shape {a.shape} does not match {b.shape}")
