"""
Seeded k-fold assignment.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np

from ..errors import ConfigError, DatasetError
from .dataset import PLDataset


@dataclass(frozen=True)
class FoldPlan:
    """Fold index of every instance."""
    k: int
    assignments: np.ndarray
    seed: int

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)

    def fold_sizes(self) -> list[int]:
        return [int(np.count_nonzero(self.assignments == f)) for f in range(self.k)]


def kfold_split(ds: Union[PLDataset, int], k: int, seed: int = 0) -> FoldPlan:
    """
    Assign instances to k folds whose sizes differ by at most one.

    A seeded permutation is dealt round-robin, so the first n mod k folds
    get one extra instance.

    Args:
        ds: Dataset (or instance count)
        k: Number of folds (>= 2)
        seed: Shuffle seed

    Returns:
        FoldPlan
    """
    n = ds if isinstance(ds, int) else ds.n_instances
    if k < 2:
        raise ConfigError(f"k must be at least 2, got {k}")
    if n < k:
        raise DatasetError(f"cannot split {n} instances into {k} folds")

    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    assignments = np.empty(n, dtype=np.int64)
    assignments[perm] = np.arange(n) % k
    assignments.setflags(write=False)
    return FoldPlan(k=k, assignments=assignments, seed=seed)
