# Partial-label k-NN baseline
from .plknn import KnnModel, Weighting, plknn_fit, plknn_predict, plknn_predict_batch, plknn_scores

__all__ = [
    "KnnModel",
    "Weighting",
    "plknn_fit",
    "plknn_predict",
    "plknn_predict_batch",
    "plknn_scores",
]
