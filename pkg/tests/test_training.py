import dataclasses

import numpy as np
import pytest

from src.mgpll.errors import ConfigError, DatasetError, NonFiniteLossError
from src.mgpll.model import ALL_TERMS, LossTerm, MgpllConfig, predict_label
from src.mgpll.training import (
    AblationVariant,
    SearchConfig,
    SearchStrategy,
    TrainConfig,
    build_ablation_objective,
    select_hyperparameters,
    train,
)
from src.mgpll.training import trainer

SMALL = MgpllConfig(noise_dim=4, generator_width=8, predictor_width=8, critic_width=8)


# ==================== Ablation ====================

@pytest.mark.parametrize("variant,dropped", [
    (AblationVariant.FULL, set()),
    (AblationVariant.NO_ADV_N, {LossTerm.ADV_N}),
    (AblationVariant.NO_ADV_X, {LossTerm.ADV_X}),
    (AblationVariant.NO_GEN, {LossTerm.GEN}),
    (AblationVariant.NO_AUX, {LossTerm.AUX}),
    (AblationVariant.CLS_ONLY, {LossTerm.ADV_N, LossTerm.ADV_X, LossTerm.GEN, LossTerm.AUX}),
])
def test_ablation_objectives(variant, dropped):
    terms = build_ablation_objective(variant)
    assert terms == ALL_TERMS - dropped
    assert LossTerm.CLS in terms


def test_variant_parsing():
    assert AblationVariant.parse("no-advx") == AblationVariant.NO_ADV_X
    assert AblationVariant.parse("NO_GEN") == AblationVariant.NO_GEN
    assert AblationVariant.parse(" cls ") == AblationVariant.CLS_ONLY
    with pytest.raises(ConfigError):
        AblationVariant.parse("no-cls")


# ==================== Training loop ====================

def test_smoke_run_keeps_critics_clipped(blobs_normalized):
    cfg = TrainConfig(batch_size=16, epochs=50, early_stop_patience=0, seed=4)
    checked = []

    def assert_clipped(model, epoch, iteration):
        assert model.d_n.max_abs_parameter() <= SMALL.clip_c
        assert model.d_x.max_abs_parameter() <= SMALL.clip_c
        checked.append((epoch, iteration))

    model, log = train(blobs_normalized, AblationVariant.FULL, cfg, SMALL, iteration_callback=assert_clipped)

    assert log.epochs_run == 50
    assert len(checked) == 50 * 4
    assert not log.stopped_early
    for record in log.records:
        assert np.isfinite(record.total)
        assert record.total == pytest.approx(
            record.l_c + record.l_adv_n + record.l_adv_x_weighted
            + record.l_g_weighted + record.l_aux_weighted
        )
    assert log.records[-1].train_accuracy is not None


def test_identical_seeds_give_identical_runs(three):
    from src.mgpll.pldata import normalize_features

    ds = normalize_features(three)
    cfg = TrainConfig(batch_size=8, epochs=3, seed=12)
    model_a, log_a = train(ds, AblationVariant.FULL, cfg, SMALL)
    model_b, log_b = train(ds, AblationVariant.FULL, cfg, SMALL)
    assert model_a.equals(model_b)
    assert [r.l_c for r in log_a.records] == [r.l_c for r in log_b.records]
    assert log_a.rng_state == log_b.rng_state

    model_c, _ = train(ds, AblationVariant.FULL, cfg.replace(seed=13), SMALL)
    assert not model_a.equals(model_c)


def test_dropped_terms_are_logged_as_zero(blobs_normalized):
    cfg = TrainConfig(batch_size=16, epochs=2, seed=0)
    _, log = train(blobs_normalized, AblationVariant.NO_GEN, cfg, SMALL)
    assert all(r.l_g_weighted == 0.0 for r in log.records)
    assert all(r.l_aux_weighted != 0.0 for r in log.records)

    _, log = train(blobs_normalized, AblationVariant.CLS_ONLY, cfg, SMALL)
    for r in log.records:
        assert r.total == r.l_c
        assert (r.l_adv_n, r.l_adv_x_weighted, r.l_g_weighted, r.l_aux_weighted) == (0.0, 0.0, 0.0, 0.0)


def test_cls_only_separates_clean_blobs(blobs_normalized):
    cfg = TrainConfig(batch_size=16, epochs=200, generator_lr=1e-3, early_stop_patience=0, seed=1)
    mcfg = SMALL.replace(predictor_width=16)
    model, log = train(blobs_normalized, AblationVariant.CLS_ONLY, cfg, mcfg)
    assert log.records[-1].train_accuracy >= 0.99
    preds = predict_label(model, blobs_normalized.features)
    assert np.mean(preds == blobs_normalized.true_labels) >= 0.99


def test_small_datasets_wrap_around():
    batches = trainer._epoch_batches(np.random.default_rng(0), n=5, m=8)
    assert batches.shape == (1, 8)
    assert set(batches[0]) == set(range(5))

    batches = trainer._epoch_batches(np.random.default_rng(0), n=20, m=8)
    assert batches.shape == (3, 8)
    assert sorted(batches.ravel()[:20]) == list(range(20))


def test_early_stop_when_classification_loss_plateaus(blobs_normalized, monkeypatch):
    monkeypatch.setattr(trainer, "_generator_step", lambda *args: {term: 1.0 for term in LossTerm})
    cfg = TrainConfig(batch_size=16, epochs=100, early_stop_patience=5, seed=0)
    _, log = train(blobs_normalized, AblationVariant.FULL, cfg, SMALL)
    assert log.stopped_early
    assert log.epochs_run == 6


def test_training_requires_normalized_features(blobs):
    with pytest.raises(DatasetError):
        train(blobs, cfg=TrainConfig(epochs=1), mcfg=SMALL)


def test_non_finite_loss_aborts_with_context(blobs_normalized):
    def poison(model, epoch, iteration):
        if (epoch, iteration) == (2, 1):
            model.f.layers[-1].weight[0, 0] = np.inf

    cfg = TrainConfig(batch_size=16, epochs=5, seed=0)
    with pytest.raises(NonFiniteLossError) as excinfo:
        train(blobs_normalized, AblationVariant.CLS_ONLY, cfg, SMALL, iteration_callback=poison)
    assert excinfo.value.epoch == 2
    assert excinfo.value.iteration == 2
    assert excinfo.value.term == "l_c"


@pytest.mark.parametrize("labeled,term", [(True, "train_accuracy"), (False, "label_prior")])
def test_non_finite_classifier_at_epoch_end_has_context(blobs_normalized, labeled, term):
    dataset = blobs_normalized if labeled else dataclasses.replace(blobs_normalized, true_labels=None)

    def poison(model, epoch, iteration):
        if (epoch, iteration) == (1, 4):
            model.f.layers[-1].weight[0, 0] = np.inf

    cfg = TrainConfig(batch_size=16, epochs=3, seed=0)
    with pytest.raises(NonFiniteLossError) as excinfo:
        train(dataset, AblationVariant.CLS_ONLY, cfg, SMALL, iteration_callback=poison)
    assert excinfo.value.epoch == 1
    assert excinfo.value.iteration == 4
    assert excinfo.value.term == term


def test_log_csv_is_reproducible(tmp_path, blobs_normalized):
    cfg = TrainConfig(batch_size=16, epochs=2, seed=5)
    _, log_a = train(blobs_normalized, AblationVariant.FULL, cfg, SMALL)
    _, log_b = train(blobs_normalized, AblationVariant.FULL, cfg, SMALL)
    a = log_a.write_csv(tmp_path / "a.csv")
    b = log_b.write_csv(tmp_path / "b.csv")
    assert a.read_bytes() == b.read_bytes()

    lines = a.read_text().splitlines()
    assert lines[0] == "epoch,l_c,l_adv_n,l_adv_x_weighted,l_g_weighted,l_aux_weighted,total,train_accuracy"
    assert len(lines) == 3
    assert float(lines[1].split(",")[1]) == log_a.records[0].l_c

    timed = log_a.write_csv(tmp_path / "timed.csv", include_wall_time=True)
    assert timed.read_text().splitlines()[0].endswith(",wall_time")


def test_train_config_validation():
    with pytest.raises(ConfigError):
        TrainConfig(batch_size=1)
    with pytest.raises(ConfigError):
        TrainConfig(generator_lr=0.0)
    with pytest.raises(ConfigError):
        TrainConfig(rmsprop_decay=1.5)


# ==================== Hyperparameter search ====================

def _count_trainings(monkeypatch, l_c_of):
    calls = []

    def fake_train(dataset, variant, cfg, mcfg):
        calls.append((mcfg.alpha, mcfg.beta, mcfg.gamma))

        class Log:
            final_l_c = l_c_of(mcfg.alpha, mcfg.beta, mcfg.gamma)

        return None, Log()

    from src.mgpll.training import search
    monkeypatch.setattr(search, "train", fake_train)
    return calls


def test_singleton_grid_needs_no_training(monkeypatch, blobs_normalized):
    calls = _count_trainings(monkeypatch, lambda a, b, g: 0.0)
    result = select_hyperparameters(blobs_normalized, search=SearchConfig(grid=(1.0,)))
    assert result.best == (1.0, 1.0, 1.0)
    assert calls == []


def test_coordinate_search_trains_each_point_once(monkeypatch, blobs_normalized):
    calls = _count_trainings(monkeypatch, lambda a, b, g: abs(a - 10) + abs(b - 0.001) + abs(g - 10))
    result = select_hyperparameters(blobs_normalized, search=SearchConfig(grid=(0.001, 10.0)))
    assert len(calls) == len(set(calls))
    assert result.trainings == len(calls) <= 6
    assert result.best == (10.0, 0.001, 10.0)


def test_full_search_and_tie_breaking(monkeypatch, blobs_normalized):
    calls = _count_trainings(monkeypatch, lambda a, b, g: 0.5)
    search = SearchConfig(grid=(0.1, 1.0), strategy=SearchStrategy.FULL, workers=2)
    result = select_hyperparameters(blobs_normalized, search=search)
    assert len(calls) == 8
    assert result.best == (0.1, 0.1, 0.1)
    assert result.best_l_c == 0.5


def test_search_config_validation():
    with pytest.raises(ConfigError):
        SearchConfig(grid=())
    with pytest.raises(ConfigError):
        SearchConfig(grid=(1.0, 1.0))
