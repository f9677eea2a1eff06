"""
Finite-difference gradient verification.
"""

from typing import Callable

import numpy as np

from .mlp import MlpState


DEFAULT_STEP = 1e-5
DEFAULT_FLOOR = 1e-6


def numerical_gradient(
    loss_fn: Callable[[], float],
    array: np.ndarray,
    step: float = DEFAULT_STEP,
) -> np.ndarray:
    """
    Central-difference gradient of loss_fn with respect to every entry of array.

    array is perturbed in place and restored; loss_fn must read it live.
    """
    grad = np.zeros_like(array)
    for idx in np.ndindex(array.shape):
        original = array[idx]
        array[idx] = original + step
        plus = loss_fn()
        array[idx] = original - step
        minus = loss_fn()
        array[idx] = original
        grad[idx] = (plus - minus) / (2.0 * step)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = DEFAULT_FLOOR) -> float:
    """Largest entrywise |a - n| / max(|a| + |n|, floor)."""
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    if a.size == 0:
        return 0.0
    denom = np.maximum(np.abs(a) + np.abs(n), floor)
    return float(np.max(np.abs(a - n) / denom))


def check_state_gradients(
    state: MlpState,
    analytic: dict[str, np.ndarray],
    loss_fn: Callable[[], float],
    step: float = DEFAULT_STEP,
) -> dict[str, float]:
    """
    Compare analytic parameter gradients of one network against central differences.

    Parameters missing from analytic are compared against a zero gradient.

    Returns:
        Relative error per parameter name
    """
    errors = {}
    for name, param in state.parameters().items():
        numeric = numerical_gradient(loss_fn, param, step)
        expected = analytic.get(name, np.zeros_like(param))
        errors[name] = relative_error(expected, numeric)
    return errors
