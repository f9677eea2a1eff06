"""
Candidate-label algebra.

Label vectors live in [0, 1]^L: binary for observed candidate sets, soft for
generator outputs. Both operators work row-wise on single vectors or batches.
"""

import numpy as np

from ..errors import ShapeError


def _pair(a, b, what: str) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"{what}: shapes {a.shape} and {b.shape} differ")
    return a, b


def denoise(y, y_n) -> np.ndarray:
    """Remove noise labels from candidates: max(y - y_n, 0)."""
    y, y_n = _pair(y, y_n, "denoise")
    return np.maximum(y - y_n, 0.0)


def augment(z, noise) -> np.ndarray:
    """Add noise labels to a label vector: min(noise + z, 1)."""
    z, noise = _pair(z, noise, "augment")
    return np.minimum(noise + z, 1.0)


def one_hot(indices, n_classes: int) -> np.ndarray:
    idx = np.asarray(indices, dtype=np.int64).reshape(-1)
    out = np.zeros((idx.shape[0], n_classes))
    out[np.arange(idx.shape[0]), idx] = 1.0
    return out
