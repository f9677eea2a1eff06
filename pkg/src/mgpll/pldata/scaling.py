"""
Per-column min-max scaling of features to [-1, 1].

The feature generator ends in tanh, so observed features must live in the
same range. Statistics are fitted on a training split and reused verbatim
on the matching test split.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeError
from .dataset import PLDataset


@dataclass(frozen=True)
class FeatureScaler:
    """Recorded column minima and maxima."""
    lower: np.ndarray
    upper: np.ndarray

    @classmethod
    def fit(cls, features: np.ndarray) -> "FeatureScaler":
        x = np.asarray(features, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] == 0:
            raise ShapeError(f"cannot fit a scaler on shape {x.shape}")
        return cls(lower=x.min(axis=0), upper=x.max(axis=0))

    @property
    def n_features(self) -> int:
        return self.lower.shape[0]

    def transform(self, features: np.ndarray, clip: bool = True) -> np.ndarray:
        """
        Map columns to [-1, 1] using the recorded statistics.

        Constant columns map to 0. Columns already spanning exactly [-1, 1]
        pass through unchanged, which makes scaling idempotent.
        """
        x = np.asarray(features, dtype=np.float64)
        if x.ndim == 1:
            x = x.reshape(1, -1)
        if x.shape[1] != self.n_features:
            raise ShapeError(
                f"scaler fitted on {self.n_features} features, got {x.shape[1]}"
            )
        span = self.upper - self.lower
        varying = span > 0
        safe_span = np.where(varying, span, 1.0)
        out = np.where(varying, 2.0 * (x - self.lower) / safe_span - 1.0, 0.0)

        passthrough = (self.lower == -1.0) & (self.upper == 1.0)
        out[:, passthrough] = x[:, passthrough]
        if clip:
            np.clip(out, -1.0, 1.0, out=out)
        return out


def normalize_features(ds: PLDataset) -> PLDataset:
    """Min-max scale a dataset's features to [-1, 1] with its own statistics."""
    scaler = FeatureScaler.fit(ds.features)
    return ds.with_features(scaler.transform(ds.features))
