"""
Priors for generator inputs: uniform noise and multinomial one-hot labels.
"""

from typing import Optional, Sequence

import numpy as np

from ..errors import ConfigError
from .labels import one_hot


class PriorSampler:
    """
    Draws generator noise from U[-1, 1]^noise_dim and one-hot labels from a
    multinomial over the classes.

    All draws come from a single Generator so a fixed seed and call order
    give identical samples.
    """

    def __init__(
        self,
        n_classes: int,
        noise_dim: int,
        rng: Optional[np.random.Generator] = None,
        weights: Optional[Sequence[float]] = None,
    ):
        if n_classes < 1:
            raise ConfigError(f"n_classes must be positive, got {n_classes}")
        if noise_dim < 1:
            raise ConfigError(f"noise_dim must be positive, got {noise_dim}")
        self.n_classes = n_classes
        self.noise_dim = noise_dim
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self._weights = np.full(n_classes, 1.0 / n_classes)
        if weights is not None:
            self.set_weights(weights)

    @classmethod
    def from_seed(cls, n_classes: int, noise_dim: int, seed: int) -> "PriorSampler":
        return cls(n_classes, noise_dim, np.random.default_rng(seed))

    @property
    def weights(self) -> np.ndarray:
        return self._weights.copy()

    def set_weights(self, weights: Sequence[float]) -> None:
        """Replace the label prior; weights are normalized to sum to 1."""
        w = np.asarray(weights, dtype=np.float64).reshape(-1)
        if w.shape[0] != self.n_classes:
            raise ConfigError(f"expected {self.n_classes} prior weights, got {w.shape[0]}")
        if np.any(w < 0) or not np.all(np.isfinite(w)) or w.sum() <= 0:
            raise ConfigError("prior weights must be finite, nonnegative and not all zero")
        self._weights = w / w.sum()

    def noise(self, m: int) -> np.ndarray:
        return self.rng.uniform(-1.0, 1.0, size=(m, self.noise_dim))

    def labels(self, m: int) -> np.ndarray:
        idx = self.rng.choice(self.n_classes, size=m, p=self._weights)
        return one_hot(idx, self.n_classes)
