"""
Scalar losses and their gradients with respect to predictions.
"""

import numpy as np

from ..errors import ShapeError
from .matrix import as_matrix, check_same_shape


LOG_FLOOR = 1e-12
SIMPLEX_TOL = 1e-6


def mse(pred, target) -> float:
    """Mean squared error averaged over all entries."""
    p = as_matrix(pred, "mse prediction")
    t = as_matrix(target, "mse target")
    check_same_shape(p, t, "mse")
    return float(np.mean((p - t) ** 2))


def mse_grad(pred, target) -> np.ndarray:
    """Gradient of mse with respect to pred."""
    p = as_matrix(pred, "mse prediction")
    t = as_matrix(target, "mse target")
    check_same_shape(p, t, "mse")
    return 2.0 * (p - t) / p.size


def _check_cross_entropy_inputs(prob: np.ndarray, onehot: np.ndarray) -> None:
    check_same_shape(prob, onehot, "cross_entropy")
    if np.any(prob < -SIMPLEX_TOL) or np.any(np.abs(prob.sum(axis=1) - 1.0) > SIMPLEX_TOL):
        raise ShapeError("cross_entropy: probability rows must lie on the simplex")
    if not np.all((onehot == 0.0) | (onehot == 1.0)) or np.any(onehot.sum(axis=1) != 1.0):
        raise ShapeError("cross_entropy: targets must be one-hot rows")


def cross_entropy(prob, onehot) -> float:
    """Categorical cross-entropy averaged over rows, with log floored at LOG_FLOOR."""
    p = as_matrix(prob, "cross_entropy probabilities")
    t = as_matrix(onehot, "cross_entropy targets")
    _check_cross_entropy_inputs(p, t)
    return float(-np.sum(t * np.log(np.maximum(p, LOG_FLOOR))) / p.shape[0])


def cross_entropy_grad(prob, onehot) -> np.ndarray:
    """Gradient of cross_entropy with respect to prob (zero where the floor is active)."""
    p = as_matrix(prob, "cross_entropy probabilities")
    t = as_matrix(onehot, "cross_entropy targets")
    _check_cross_entropy_inputs(p, t)
    safe = np.maximum(p, LOG_FLOOR)
    return np.where(p > LOG_FLOOR, -t / safe, 0.0) / p.shape[0]
