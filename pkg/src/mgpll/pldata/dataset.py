"""
Partial-label dataset representation.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..errors import DatasetError


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PLDataset:
    """
    Features, candidate label sets and (optionally) ground-truth labels.

    Arrays are copied on construction and made read-only; datasets are
    immutable and safe to share between threads.
    """
    features: np.ndarray                      # (n, d) float64
    candidates: np.ndarray                    # (n, L) 0/1 float64
    true_labels: Optional[np.ndarray] = None  # (n,) int64
    class_names: tuple[str, ...] = ()
    name: str = "dataset"

    def __post_init__(self):
        features = np.array(self.features, dtype=np.float64, copy=True)
        candidates = np.array(self.candidates, dtype=np.float64, copy=True)

        if features.ndim != 2:
            raise DatasetError(f"{self.name}: features must be 2-D, got {features.ndim}-D")
        if candidates.ndim != 2:
            raise DatasetError(f"{self.name}: candidates must be 2-D, got {candidates.ndim}-D")
        if features.shape[0] != candidates.shape[0]:
            raise DatasetError(
                f"{self.name}: {features.shape[0]} feature rows but "
                f"{candidates.shape[0]} candidate rows"
            )
        if not np.all(np.isfinite(features)):
            raise DatasetError(f"{self.name}: features contain NaN or Inf")
        if not np.all((candidates == 0.0) | (candidates == 1.0)):
            raise DatasetError(f"{self.name}: candidate matrix must be binary")
        empty = np.flatnonzero(candidates.sum(axis=1) == 0)
        if empty.size:
            raise DatasetError(f"{self.name}: instance {int(empty[0])} has an empty candidate set")

        n_classes = candidates.shape[1]
        true_labels = None
        if self.true_labels is not None:
            true_labels = np.array(self.true_labels, dtype=np.int64, copy=True).reshape(-1)
            if true_labels.shape[0] != features.shape[0]:
                raise DatasetError(
                    f"{self.name}: {true_labels.shape[0]} true labels for "
                    f"{features.shape[0]} instances"
                )
            if np.any(true_labels < 0) or np.any(true_labels >= n_classes):
                raise DatasetError(f"{self.name}: true label outside [0, {n_classes})")
            rows = np.arange(true_labels.shape[0])
            missing = np.flatnonzero(candidates[rows, true_labels] != 1.0)
            if missing.size:
                raise DatasetError(
                    f"{self.name}: instance {int(missing[0])} does not list its true label "
                    f"as a candidate"
                )
            true_labels = _readonly(true_labels)

        class_names = tuple(self.class_names) or tuple(str(j) for j in range(n_classes))
        if len(class_names) != n_classes:
            raise DatasetError(
                f"{self.name}: {len(class_names)} class names for {n_classes} classes"
            )

        object.__setattr__(self, "features", _readonly(features))
        object.__setattr__(self, "candidates", _readonly(candidates))
        object.__setattr__(self, "true_labels", true_labels)
        object.__setattr__(self, "class_names", class_names)

    @property
    def n_instances(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return self.candidates.shape[1]

    @property
    def has_true_labels(self) -> bool:
        return self.true_labels is not None

    @property
    def candidate_counts(self) -> np.ndarray:
        return self.candidates.sum(axis=1).astype(np.int64)

    @property
    def mean_candidates(self) -> float:
        """Average candidate-set size (avg.#CLs)."""
        return float(self.candidates.sum() / self.n_instances)

    def is_clean(self) -> bool:
        """True when every candidate set is exactly the true label."""
        return self.has_true_labels and bool(np.all(self.candidate_counts == 1))

    def subset(self, indices: Sequence[int], name: Optional[str] = None) -> "PLDataset":
        idx = np.asarray(indices, dtype=np.int64)
        return PLDataset(
            features=self.features[idx],
            candidates=self.candidates[idx],
            true_labels=None if self.true_labels is None else self.true_labels[idx],
            class_names=self.class_names,
            name=name or self.name,
        )

    def with_features(self, features: np.ndarray) -> "PLDataset":
        return PLDataset(
            features=features,
            candidates=self.candidates,
            true_labels=self.true_labels,
            class_names=self.class_names,
            name=self.name,
        )


def from_labels(
    features: np.ndarray,
    labels: Sequence[int],
    n_classes: Optional[int] = None,
    class_names: Sequence[str] = (),
    name: str = "dataset",
) -> PLDataset:
    """
    Build a clean dataset whose candidate sets are the true labels.

    Args:
        features: (n, d) feature matrix
        labels: n class indices
        n_classes: Number of classes (defaults to max label + 1)
        class_names: Optional class names
        name: Dataset name

    Returns:
        PLDataset with singleton candidate rows
    """
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if n_classes is None:
        n_classes = len(class_names) if class_names else int(labels.max()) + 1
    candidates = np.zeros((labels.shape[0], n_classes))
    candidates[np.arange(labels.shape[0]), labels] = 1.0
    return PLDataset(
        features=features,
        candidates=candidates,
        true_labels=labels,
        class_names=tuple(class_names),
        name=name,
    )
