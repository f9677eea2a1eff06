"""
Partial-label k-nearest-neighbor classifier.

Each of the k nearest training instances votes for every label in its
candidate set with weight 1 / (distance + 1e-9) (or 1 with uniform
weighting); the label with the largest total wins, lowest index on ties.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from ..errors import ConfigError, ShapeError
from ..numkit import as_matrix
from ..pldata.dataset import PLDataset

logger = logging.getLogger(__name__)

DEFAULT_K = 10
DISTANCE_OFFSET = 1e-9


class Weighting(Enum):
    INVERSE_DISTANCE = "inverse-distance"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class KnnModel:
    """Stored training data; nothing is learned."""
    features: np.ndarray
    candidates: np.ndarray
    k: int
    weighting: Weighting = Weighting.INVERSE_DISTANCE
    metric: str = "euclidean"
    original_index: Optional[np.ndarray] = None

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return self.candidates.shape[1]


def plknn_fit(
    ds: PLDataset,
    k: int = DEFAULT_K,
    weighting: Weighting = Weighting.INVERSE_DISTANCE,
    original_index: Optional[np.ndarray] = None,
) -> KnnModel:
    """
    Store a training set for k-NN prediction.

    Args:
        ds: Normalized training set
        k: Neighbors per prediction, 1 <= k <= n
        weighting: Vote weighting
        original_index: Index of each row in some reference order, used to
            break distance ties; defaults to row order

    Raises:
        ConfigError: If k is out of range
    """
    if k < 1:
        raise ConfigError(f"k must be at least 1, got {k}")
    if k > ds.n_instances:
        raise ConfigError(f"k = {k} exceeds the {ds.n_instances} training instances")
    if original_index is None:
        original_index = np.arange(ds.n_instances)
    original_index = np.asarray(original_index, dtype=np.int64)
    if original_index.shape != (ds.n_instances,):
        raise ShapeError("original_index must have one entry per training instance")
    return KnnModel(
        features=ds.features,
        candidates=ds.candidates,
        k=k,
        weighting=weighting,
        original_index=original_index,
    )


def plknn_scores(model: KnnModel, x_batch) -> np.ndarray:
    """Per-class vote totals, shape (rows, L)."""
    x = as_matrix(x_batch, "features")
    if x.shape[1] != model.n_features:
        raise ShapeError(f"features have {x.shape[1]} columns, model expects {model.n_features}")

    dist = cdist(x, model.features, metric=model.metric)
    scores = np.zeros((x.shape[0], model.n_classes))
    for i in range(x.shape[0]):
        # nearest first; equal distances ordered by original index
        order = np.lexsort((model.original_index, dist[i]))[: model.k]
        if model.weighting == Weighting.UNIFORM:
            weights = np.ones(model.k)
        else:
            weights = 1.0 / (dist[i, order] + DISTANCE_OFFSET)
        scores[i] = weights @ model.candidates[order]
    return scores


def plknn_predict_batch(model: KnnModel, x_batch) -> np.ndarray:
    return np.argmax(plknn_scores(model, x_batch), axis=1)


def plknn_predict(model: KnnModel, x) -> int:
    """Predicted class index of a single feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeError(f"expected one feature vector, got shape {x.shape}")
    return int(plknn_predict_batch(model, x)[0])
