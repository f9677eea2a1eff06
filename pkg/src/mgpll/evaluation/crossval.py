"""
k-fold cross-validation of partial-label learners.

Each fold fits a FeatureScaler on its training split, scales both splits
with it, trains the method on the training split and scores predictions on
the held-out split against ground-truth labels.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol, Sequence

import numpy as np

from ..baseline.plknn import DEFAULT_K, Weighting, plknn_fit, plknn_predict_batch
from ..errors import DatasetError
from ..model.networks import MgpllConfig, predict
from ..pldata.dataset import PLDataset
from ..pldata.folds import FoldPlan, kfold_split
from ..pldata.scaling import FeatureScaler
from ..training.ablation import AblationVariant
from ..training.search import SearchConfig, select_hyperparameters
from ..training.trainer import TrainConfig, train
from .metrics import Metric

logger = logging.getLogger(__name__)


class Method(Protocol):
    """A learner that can be cross-validated."""
    name: str

    def fit_predict(self, train_ds: PLDataset, test_features: np.ndarray, seed: int) -> np.ndarray:
        ...


@dataclass
class MgpllMethod:
    variant: AblationVariant = AblationVariant.FULL
    cfg: TrainConfig = field(default_factory=TrainConfig)
    mcfg: MgpllConfig = field(default_factory=MgpllConfig)
    search: Optional[SearchConfig] = None

    @property
    def name(self) -> str:
        if self.variant == AblationVariant.FULL:
            return "mgpll"
        return f"mgpll-{self.variant.value}"

    def fit_predict(self, train_ds: PLDataset, test_features: np.ndarray, seed: int) -> np.ndarray:
        cfg = self.cfg.replace(seed=seed)
        mcfg = self.mcfg
        if self.search is not None:
            # weights are chosen on the training split only
            alpha, beta, gamma = select_hyperparameters(train_ds, cfg, self.search, mcfg, self.variant).best
            mcfg = mcfg.replace(alpha=alpha, beta=beta, gamma=gamma)
            logger.info("%s: fold weights alpha=%g beta=%g gamma=%g", self.name, alpha, beta, gamma)
        model, _ = train(train_ds, self.variant, cfg, mcfg)
        return np.argmax(predict(model, test_features), axis=1)


@dataclass
class PlKnnMethod:
    k: int = DEFAULT_K
    weighting: Weighting = Weighting.INVERSE_DISTANCE
    name: str = "pl-knn"

    def fit_predict(self, train_ds: PLDataset, test_features: np.ndarray, seed: int) -> np.ndarray:
        model = plknn_fit(train_ds, min(self.k, train_ds.n_instances), self.weighting)
        return plknn_predict_batch(model, test_features)


@dataclass
class CrossValResult:
    """Per-fold scores of one method on one dataset, keyed by metric name."""
    dataset: str
    method: str
    k: int
    seed: int
    scores: dict[str, list[float]] = field(default_factory=dict)

    def fold_scores(self, metric: str = "accuracy") -> list[float]:
        return self.scores[metric]

    def mean(self, metric: str = "accuracy") -> float:
        return float(np.mean(self.scores[metric]))

    def std(self, metric: str = "accuracy") -> float:
        return float(np.std(self.scores[metric], ddof=1))


def fold_seed(seed: int, fold: int) -> int:
    """Independent training seed for one fold."""
    return int(np.random.SeedSequence([seed, fold]).generate_state(1)[0])


def _run_fold(
    ds: PLDataset,
    plan: FoldPlan,
    fold: int,
    method: Method,
    metrics: Sequence[Metric],
) -> dict[str, float]:
    train_idx, test_idx = plan.train_indices(fold), plan.test_indices(fold)
    train_raw = ds.subset(train_idx, name=f"{ds.name}-fold{fold}-train")
    scaler = FeatureScaler.fit(train_raw.features)
    train_ds = train_raw.with_features(scaler.transform(train_raw.features))
    test_features = scaler.transform(ds.features[test_idx])

    preds = method.fit_predict(train_ds, test_features, fold_seed(plan.seed, fold))
    truths = ds.true_labels[test_idx]
    scores = {m.name: m.score(preds, truths, ds.class_names) for m in metrics}
    logger.info("%s fold %d/%d on %s: %s", method.name, fold + 1, plan.k, ds.name, scores)
    return scores


def cross_validate(
    ds: PLDataset,
    method: Method,
    k: int = 10,
    seed: int = 0,
    metrics: Sequence[Metric] = (Metric.accuracy(),),
    workers: int = 1,
    progress_callback: Optional[Callable[[str, int, int], None]] = None,
) -> CrossValResult:
    """
    Run k-fold cross-validation.

    Args:
        ds: Dataset with ground-truth labels (raw, unscaled features)
        method: Learner to evaluate
        k: Number of folds
        seed: Seeds the fold assignment and every fold's training
        metrics: Metrics computed on each held-out split
        workers: Folds evaluated concurrently; results merge in fold order
        progress_callback: Called as ("fold", done, k)

    Returns:
        CrossValResult with k scores per metric
    """
    if not ds.has_true_labels:
        raise DatasetError(f"{ds.name}: cross-validation needs ground-truth labels")
    plan = kfold_split(ds, k, seed)

    results: list[Optional[dict[str, float]]] = [None] * k
    if workers <= 1:
        for fold in range(k):
            results[fold] = _run_fold(ds, plan, fold, method, metrics)
            if progress_callback:
                progress_callback("fold", fold + 1, k)
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = [executor.submit(_run_fold, ds, plan, fold, method, metrics) for fold in range(k)]
            for fold, future in enumerate(futures):
                results[fold] = future.result()
                if progress_callback:
                    progress_callback("fold", fold + 1, k)

    scores = {m.name: [r[m.name] for r in results] for m in metrics}
    return CrossValResult(dataset=ds.name, method=method.name, k=k, seed=seed, scores=scores)
