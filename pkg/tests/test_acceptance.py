"""
End-to-end learning checks. These train full-size models and are
excluded from the default run; select them with ``pytest -m slow``.
"""

import os
from pathlib import Path

import numpy as np
import pytest

from src.mgpll.evaluation import MgpllMethod, PlKnnMethod, cross_validate
from src.mgpll.pldata import SynthConfig, load_dataset, synthesize
from src.mgpll.training import AblationVariant, TrainConfig

from toydata import ecoli_like

SEEDS = (0, 1, 2)
FOLDS = 5


@pytest.fixture(scope="module")
def coupled_ecoli():
    return synthesize(ecoli_like(), SynthConfig.coupled(0.7, seed=0))


def _means(ds, method):
    return np.array([cross_validate(ds, method, k=FOLDS, seed=s).mean() for s in SEEDS])


@pytest.mark.slow
def test_full_model_beats_pl_knn_on_coupled_labels(coupled_ecoli):
    assert coupled_ecoli.n_instances == 336
    assert coupled_ecoli.mean_candidates == pytest.approx(1.7, abs=0.1)
    full = _means(coupled_ecoli, MgpllMethod(AblationVariant.FULL, TrainConfig()))
    knn = _means(coupled_ecoli, PlKnnMethod())
    assert np.count_nonzero(full > knn) >= 2


@pytest.mark.slow
def test_full_model_not_worse_than_classifier_alone(coupled_ecoli):
    full = _means(coupled_ecoli, MgpllMethod(AblationVariant.FULL, TrainConfig()))
    cls_only = _means(coupled_ecoli, MgpllMethod(AblationVariant.CLS_ONLY, TrainConfig()))
    assert np.count_nonzero(full >= cls_only) >= 2


@pytest.mark.slow
@pytest.mark.skipif("MGPLL_LOST_PATH" not in os.environ, reason="set MGPLL_LOST_PATH to the Lost dataset")
def test_pl_knn_on_lost_matches_published_accuracy():
    ds = load_dataset(Path(os.environ["MGPLL_LOST_PATH"]))
    result = cross_validate(ds, PlKnnMethod(k=10), k=10, seed=0)
    assert result.mean() == pytest.approx(0.424, abs=0.05)
