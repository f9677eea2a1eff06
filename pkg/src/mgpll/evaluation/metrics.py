"""
Test metrics: exact-match accuracy and age-tolerance accuracy.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from ..errors import MetricError


class MetricKind(Enum):
    ACCURACY = "accuracy"
    MAE_WITHIN = "mae"


@dataclass(frozen=True)
class Metric:
    """Accuracy, or MaeWithin(years) for ordinal (age) class names."""
    kind: MetricKind = MetricKind.ACCURACY
    years: Optional[int] = None

    def __post_init__(self):
        if self.kind == MetricKind.MAE_WITHIN and (self.years is None or self.years < 1):
            raise MetricError("MaeWithin needs a positive year count")

    @classmethod
    def accuracy(cls) -> "Metric":
        return cls(MetricKind.ACCURACY)

    @classmethod
    def mae_within(cls, years: int) -> "Metric":
        return cls(MetricKind.MAE_WITHIN, years)

    @classmethod
    def parse(cls, text: str) -> "Metric":
        """'accuracy', 'mae3', 'mae5', ..."""
        key = text.strip().lower()
        if key in ("accuracy", "acc"):
            return cls.accuracy()
        if key.startswith("mae") and key[3:].isdigit():
            return cls.mae_within(int(key[3:]))
        raise MetricError(f"unknown metric {text!r} (use accuracy or maeN)")

    @property
    def name(self) -> str:
        if self.kind == MetricKind.ACCURACY:
            return "accuracy"
        return f"mae{self.years}"

    def score(self, preds, truths, class_names: Sequence[str] = ()) -> float:
        if self.kind == MetricKind.ACCURACY:
            return accuracy(preds, truths)
        return mae_within(preds, truths, class_names, self.years)


def _paired(preds, truths) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(preds, dtype=np.int64).reshape(-1)
    t = np.asarray(truths, dtype=np.int64).reshape(-1)
    if p.shape != t.shape:
        raise MetricError(f"{p.shape[0]} predictions for {t.shape[0]} ground-truth labels")
    if p.shape[0] == 0:
        raise MetricError("cannot score an empty prediction set")
    return p, t


def accuracy(preds, truths) -> float:
    """Fraction of exact matches."""
    p, t = _paired(preds, truths)
    return float(np.mean(p == t))


def class_ages(class_names: Sequence[str]) -> np.ndarray:
    """Parse class names as integer ages."""
    try:
        return np.array([int(name) for name in class_names], dtype=np.int64)
    except ValueError as e:
        raise MetricError(f"class names must be integer ages for MAE metrics: {e}") from e


def mae_within(preds, truths, class_names: Sequence[str], years: int) -> float:
    """Fraction of predictions whose age differs from the truth by strictly less than `years`."""
    p, t = _paired(preds, truths)
    ages = class_ages(class_names)
    if p.max() >= ages.shape[0] or t.max() >= ages.shape[0]:
        raise MetricError("label index outside the class-name table")
    return float(np.mean(np.abs(ages[p] - ages[t]) < years))
