"""
Alternating minimax training loop.

Each iteration:
    1. take a minibatch B of m instances
    2. draw eps ~ P_eps, then z ~ P_z (m each)
    3. ascend D_n and D_x on  [D_n(y) - D_n(z (+) G_n(z, eps))]
                            + alpha * [D_x(x) - D_x(G_x(z, eps))]
    4. clip both critics to [-c, c]
    5. draw eps_bar ~ P_eps
    6. descend G_n, G_x and F on the active generator-side terms

RNG consumption is fixed: one SeedSequence spawns three streams, used for
network initialization, minibatch order and prior draws respectively. Within
an iteration prior draws happen in the order eps, z, eps_bar; at the end of
each epoch one more eps draw of size n refreshes the label prior.
"""

import csv
import dataclasses
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

from ..errors import ConfigError, DatasetError, NonFiniteError, NonFiniteLossError
from ..model.labels import denoise
from ..model.networks import CRITIC_NAMES, D_N, D_X, GENERATOR_NAMES, MgpllConfig, MgpllModel
from ..model.objectives import (
    LossTerm,
    PLBatch,
    add_grads,
    loss_adv_feature,
    loss_adv_label,
    loss_auxiliary,
    loss_classification,
    loss_generation,
)
from ..model.priors import PriorSampler
from ..numkit import Direction, Mode, clip_parameters, mlp_forward, rmsprop_step
from ..pldata.dataset import PLDataset
from ..pldata.scaling import FeatureScaler
from .ablation import AblationVariant, build_ablation_objective

try:
    from tqdm import tqdm
    HAS_TQDM = True
except ImportError:
    HAS_TQDM = False

logger = logging.getLogger(__name__)

LOG_COLUMNS = ["epoch", "l_c", "l_adv_n", "l_adv_x_weighted", "l_g_weighted", "l_aux_weighted", "total"]

# Features must be scaled to the generator's tanh range
_RANGE_TOL = 1e-9


@dataclass(frozen=True)
class TrainConfig:
    """Optimization settings of one training run."""
    batch_size: int = 32
    epochs: int = 200
    generator_lr: float = 5e-5
    critic_lr: float = 5e-5
    rmsprop_decay: float = 0.9
    rmsprop_eps: float = 1e-8
    critic_steps: int = 1
    early_stop_patience: int = 20
    early_stop_tol: float = 1e-5
    seed: int = 0
    empirical_label_prior: bool = True

    def __post_init__(self):
        if self.batch_size < 2:
            raise ConfigError(f"batch_size must be at least 2, got {self.batch_size}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be at least 1, got {self.epochs}")
        if self.critic_steps < 1:
            raise ConfigError(f"critic_steps must be at least 1, got {self.critic_steps}")
        if not (self.generator_lr > 0 and self.critic_lr > 0):
            raise ConfigError("learning rates must be positive")
        if not 0.0 < self.rmsprop_decay < 1.0:
            raise ConfigError(f"rmsprop_decay must be in (0, 1), got {self.rmsprop_decay}")
        if not self.rmsprop_eps > 0:
            raise ConfigError(f"rmsprop_eps must be positive, got {self.rmsprop_eps}")
        if self.early_stop_patience < 0:
            raise ConfigError("early_stop_patience must be nonnegative")
        if self.early_stop_tol < 0:
            raise ConfigError("early_stop_tol must be nonnegative")

    def replace(self, **changes) -> "TrainConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class EpochRecord:
    """Per-epoch means of the generator-step terms (weighted as in the total)."""
    epoch: int
    l_c: float
    l_adv_n: float
    l_adv_x_weighted: float
    l_g_weighted: float
    l_aux_weighted: float
    total: float
    train_accuracy: Optional[float] = None
    wall_time: float = 0.0


@dataclass
class TrainLog:
    """One record per completed epoch."""
    variant: AblationVariant
    seed: int
    records: list[EpochRecord] = field(default_factory=list)
    stopped_early: bool = False
    checkpoint: Optional[str] = None
    rng_state: Optional[dict] = None

    @property
    def epochs_run(self) -> int:
        return len(self.records)

    @property
    def final_l_c(self) -> float:
        if not self.records:
            raise ValueError("training log is empty")
        return self.records[-1].l_c

    def columns(self, include_wall_time: bool = False) -> list[str]:
        cols = list(LOG_COLUMNS)
        if self.records and all(r.train_accuracy is not None for r in self.records):
            cols.append("train_accuracy")
        if include_wall_time:
            cols.append("wall_time")
        return cols

    def write_csv(self, path: Union[str, Path], include_wall_time: bool = False) -> Path:
        """
        Write the log as train_log_v1 CSV.

        Wall time is left out unless asked for, so identical runs produce
        identical files.
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        cols = self.columns(include_wall_time)
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(cols)
            for record in self.records:
                writer.writerow([
                    record.epoch if c == "epoch" else repr(float(getattr(record, c)))
                    for c in cols
                ])
        return path


def _check_normalized(ds: PLDataset) -> None:
    if ds.n_instances and float(np.max(np.abs(ds.features))) > 1.0 + _RANGE_TOL:
        raise DatasetError(
            f"{ds.name}: features must be scaled to [-1, 1] before training "
            "(use normalize_features or FeatureScaler)"
        )


def _epoch_batches(rng: np.random.Generator, n: int, m: int) -> np.ndarray:
    """
    Minibatch indices for one epoch, shape (iterations, m).

    Permutations are concatenated until every batch is full, so datasets
    smaller than m wrap around.
    """
    iterations = max(1, -(-n // m))
    needed = iterations * m
    order = rng.permutation(n)
    while order.shape[0] < needed:
        order = np.concatenate([order, rng.permutation(n)])
    return order[:needed].reshape(iterations, m)


def _refresh_label_prior(model: MgpllModel, ds: PLDataset, prior: PriorSampler) -> None:
    """Set P_z to the class frequencies of the current denoised-label argmaxes."""
    p, _ = mlp_forward(model.f, ds.features, Mode.EVAL)
    eps = prior.noise(ds.n_instances)
    y_n, _ = mlp_forward(model.g_n, model.noise_input(p, eps), Mode.EVAL)
    winners = np.argmax(denoise(ds.candidates, y_n), axis=1)
    counts = np.bincount(winners, minlength=model.n_classes).astype(np.float64)
    prior.set_weights(counts)


def _training_accuracy(model: MgpllModel, ds: PLDataset) -> Optional[float]:
    if not ds.has_true_labels:
        return None
    p, _ = mlp_forward(model.f, ds.features, Mode.EVAL)
    return float(np.mean(np.argmax(p, axis=1) == ds.true_labels))


class _Guard:
    """Turns non-finite values into NonFiniteLossError with epoch/iteration context."""

    def __init__(self):
        self.epoch = 0
        self.iteration = 0

    def run(self, term: str, fn: Callable):
        try:
            result = fn()
        except NonFiniteLossError:
            raise
        except NonFiniteError as e:
            raise NonFiniteLossError(self.epoch, self.iteration, term) from e
        value = result.value if hasattr(result, "value") else result
        if value is not None and not np.isfinite(value):
            raise NonFiniteLossError(self.epoch, self.iteration, term)
        return result


def _critic_step(
    model: MgpllModel,
    batch: PLBatch,
    z: np.ndarray,
    eps: np.ndarray,
    terms: frozenset,
    cfg: TrainConfig,
    guard: _Guard,
) -> None:
    grads: dict = {}
    if LossTerm.ADV_N in terms:
        r = guard.run("critic_l_adv_n", lambda: loss_adv_label(model, batch, z=z, eps=eps))
        add_grads(grads, {D_N: r.grads[D_N]})
    if LossTerm.ADV_X in terms:
        r = guard.run("critic_l_adv_x", lambda: loss_adv_feature(model, batch, z=z, eps=eps))
        add_grads(grads, {D_X: r.grads[D_X]}, scale=model.config.alpha)
    for name, net_grads in grads.items():
        rmsprop_step(
            model.network(name), net_grads, cfg.critic_lr,
            cfg.rmsprop_decay, cfg.rmsprop_eps, Direction.ASCENT,
        )


def _generator_step(
    model: MgpllModel,
    batch: PLBatch,
    z: np.ndarray,
    eps: np.ndarray,
    eps_bar: np.ndarray,
    terms: frozenset,
    cfg: TrainConfig,
    guard: _Guard,
) -> dict[LossTerm, float]:
    mcfg = model.config
    grads: dict = {}
    values = {term: 0.0 for term in LossTerm}

    if LossTerm.CLS in terms:
        r = guard.run("l_c", lambda: loss_classification(model, batch, eps=eps))
        add_grads(grads, r.grads)
        values[LossTerm.CLS] = r.value
    if LossTerm.ADV_N in terms:
        r = guard.run("l_adv_n", lambda: loss_adv_label(model, batch, z=z, eps=eps))
        # Generators only see -D_n(fake), whose gradient equals that of the full value
        add_grads(grads, {k: v for k, v in r.grads.items() if k in GENERATOR_NAMES})
        values[LossTerm.ADV_N] = r.value
    if LossTerm.ADV_X in terms:
        r = guard.run("l_adv_x", lambda: loss_adv_feature(model, batch, z=z, eps=eps_bar))
        add_grads(grads, {k: v for k, v in r.grads.items() if k in GENERATOR_NAMES}, mcfg.alpha)
        values[LossTerm.ADV_X] = mcfg.alpha * r.value
    if LossTerm.GEN in terms:
        r = guard.run("l_g", lambda: loss_generation(model, batch, eps1=eps, eps2=eps_bar))
        add_grads(grads, r.grads, mcfg.beta)
        values[LossTerm.GEN] = mcfg.beta * r.value
    if LossTerm.AUX in terms:
        r = guard.run("l_aux", lambda: loss_auxiliary(model, z=z, eps=eps_bar))
        add_grads(grads, r.grads, mcfg.gamma)
        values[LossTerm.AUX] = mcfg.gamma * r.value

    for name, net_grads in grads.items():
        rmsprop_step(
            model.network(name), net_grads, cfg.generator_lr,
            cfg.rmsprop_decay, cfg.rmsprop_eps, Direction.DESCENT,
        )
    return values


def train(
    dataset: PLDataset,
    variant: AblationVariant = AblationVariant.FULL,
    cfg: Optional[TrainConfig] = None,
    mcfg: Optional[MgpllConfig] = None,
    scaler: Optional[FeatureScaler] = None,
    progress: bool = False,
    progress_callback: Optional[Callable[[str, int, int], None]] = None,
    iteration_callback: Optional[Callable[[MgpllModel, int, int], None]] = None,
) -> tuple[MgpllModel, TrainLog]:
    """
    Train a model on a normalized partial-label dataset.

    Args:
        dataset: Training set with features in [-1, 1]
        variant: Which objective terms the generator step optimizes
        cfg: Optimization settings
        mcfg: Model hyperparameters
        scaler: Scaler that produced the features, stored on the model for serving
        progress: Show a tqdm bar over epochs
        progress_callback: Called as (label, epoch, epochs) after each epoch
        iteration_callback: Called as (model, epoch, iteration) after each iteration

    Returns:
        (trained model, training log)

    Raises:
        DatasetError: If features are not normalized
        NonFiniteLossError: If any loss term becomes NaN/Inf
    """
    cfg = cfg or TrainConfig()
    mcfg = mcfg or MgpllConfig()
    _check_normalized(dataset)
    terms = build_ablation_objective(variant)

    init_seq, batch_seq, prior_seq = np.random.SeedSequence(cfg.seed).spawn(3)
    init_rng = np.random.default_rng(init_seq)
    batch_rng = np.random.default_rng(batch_seq)
    prior = PriorSampler(dataset.n_classes, mcfg.noise_dim, np.random.default_rng(prior_seq))

    model = MgpllModel.build(
        dataset.n_features, dataset.n_classes, mcfg, init_rng,
        scaler=scaler, class_names=dataset.class_names,
    )
    log = TrainLog(variant=variant, seed=cfg.seed)
    guard = _Guard()
    m = cfg.batch_size

    logger.info(
        "Training %s on %s: n=%d d=%d L=%d m=%d epochs=%d seed=%d",
        variant.value, dataset.name, dataset.n_instances, dataset.n_features,
        dataset.n_classes, m, cfg.epochs, cfg.seed,
    )

    epochs = range(1, cfg.epochs + 1)
    if progress and HAS_TQDM:
        epochs = tqdm(epochs, desc=f"Training {variant.value}", unit="epoch")

    start = time.perf_counter()
    for epoch in epochs:
        guard.epoch = epoch
        sums = {term: 0.0 for term in LossTerm}
        batches = _epoch_batches(batch_rng, dataset.n_instances, m)

        for it, idx in enumerate(batches, start=1):
            guard.iteration = it
            batch = PLBatch.from_dataset(dataset, idx)
            eps = prior.noise(m)
            z = prior.labels(m)

            for _ in range(cfg.critic_steps):
                _critic_step(model, batch, z, eps, terms, cfg, guard)
                for name in CRITIC_NAMES:
                    clip_parameters(model.network(name), mcfg.clip_c)

            eps_bar = prior.noise(m)
            values = _generator_step(model, batch, z, eps, eps_bar, terms, cfg, guard)
            for term, value in values.items():
                sums[term] += value

            logger.debug(
                "epoch %d iter %d: l_c=%.6g l_adv_n=%.6g",
                epoch, it, values[LossTerm.CLS], values[LossTerm.ADV_N],
            )
            if iteration_callback:
                iteration_callback(model, epoch, it)

        n_iter = batches.shape[0]
        means = {term: sums[term] / n_iter for term in LossTerm}
        record = EpochRecord(
            epoch=epoch,
            l_c=means[LossTerm.CLS],
            l_adv_n=means[LossTerm.ADV_N],
            l_adv_x_weighted=means[LossTerm.ADV_X],
            l_g_weighted=means[LossTerm.GEN],
            l_aux_weighted=means[LossTerm.AUX],
            total=sum(means.values()),
            train_accuracy=guard.run("train_accuracy", lambda: _training_accuracy(model, dataset)),
            wall_time=time.perf_counter() - start,
        )
        log.records.append(record)
        logger.info("epoch %d/%d: l_c=%.6g total=%.6g", epoch, cfg.epochs, record.l_c, record.total)

        if cfg.empirical_label_prior:
            guard.run("label_prior", lambda: _refresh_label_prior(model, dataset, prior))

        if progress_callback:
            progress_callback("epoch", epoch, cfg.epochs)

        patience = cfg.early_stop_patience
        if patience and len(log.records) > patience:
            change = abs(log.records[-1].l_c - log.records[-1 - patience].l_c)
            if change < cfg.early_stop_tol:
                log.stopped_early = True
                logger.info("Early stop at epoch %d (l_c change %.3g)", epoch, change)
                break

    log.rng_state = prior.rng.bit_generator.state
    return model, log
