"""
Loss terms of the model and their gradients.

Each term returns a TermResult holding its value and the gradient of that
value with respect to the parameters of every network it touches. Critics
ascend the adversarial values; generators and the predictor descend them.
Random draws (z, eps) can be passed explicitly; otherwise they are taken
from the sampler.
"""

from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from ..errors import ConfigError, ShapeError
from ..numkit import Mode, as_matrix, cross_entropy, cross_entropy_grad, mlp_backward, mlp_forward, mse, mse_grad
from ..pldata.dataset import PLDataset
from .labels import augment, denoise
from .networks import D_N, D_X, F, G_N, G_X, MgpllModel
from .priors import PriorSampler


class LossTerm(Enum):
    """The five terms of the total objective."""
    CLS = "l_c"            # classification on denoised candidates
    ADV_N = "l_adv_n"      # label-level adversarial
    ADV_X = "l_adv_x"      # feature-level adversarial
    GEN = "l_g"            # feature regeneration
    AUX = "l_aux"          # auxiliary classification on generated data


ALL_TERMS = frozenset(LossTerm)

Grads = dict[str, dict[str, np.ndarray]]


@dataclass
class PLBatch:
    """A minibatch of features and candidate vectors."""
    features: np.ndarray
    candidates: np.ndarray

    def __post_init__(self):
        self.features = as_matrix(self.features, "batch features")
        self.candidates = as_matrix(self.candidates, "batch candidates")
        if self.features.shape[0] != self.candidates.shape[0]:
            raise ShapeError(
                f"batch has {self.features.shape[0]} feature rows "
                f"and {self.candidates.shape[0]} candidate rows"
            )

    @classmethod
    def from_dataset(cls, ds: PLDataset, indices: Optional[np.ndarray] = None) -> "PLBatch":
        if indices is None:
            return cls(ds.features, ds.candidates)
        return cls(ds.features[indices], ds.candidates[indices])

    @property
    def size(self) -> int:
        return self.features.shape[0]


@dataclass
class TermResult:
    value: float
    grads: Grads = field(default_factory=dict)


def add_grads(target: Grads, source: Grads, scale: float = 1.0) -> Grads:
    """Accumulate scale * source into target, network by network."""
    for net, grads in source.items():
        bucket = target.setdefault(net, {})
        for name, g in grads.items():
            if name in bucket:
                bucket[name] = bucket[name] + scale * g
            else:
                bucket[name] = scale * g
    return target


def _noise(sampler: Optional[PriorSampler], eps, m: int) -> np.ndarray:
    if eps is not None:
        return as_matrix(eps, "noise batch")
    if sampler is None:
        raise ConfigError("either explicit noise draws or a sampler is required")
    return sampler.noise(m)


def _labels(sampler: Optional[PriorSampler], z, m: int) -> np.ndarray:
    if z is not None:
        return as_matrix(z, "label batch")
    if sampler is None:
        raise ConfigError("either explicit label draws or a sampler is required")
    return sampler.labels(m)


def _mean_weights(m: int, sign: float) -> np.ndarray:
    return np.full((m, 1), sign / m)


def loss_classification(
    model: MgpllModel,
    batch: PLBatch,
    sampler: Optional[PriorSampler] = None,
    *,
    eps: Optional[np.ndarray] = None,
    mode: Mode = Mode.TRAIN,
) -> TermResult:
    """
    MSE between F(x) and the denoised target y (-) G_n(F(x), eps).

    F(x) enters G_n as a constant: F is pulled toward the target but gets no
    gradient through it. G_n gets its gradient through the denoising path.
    """
    m = batch.size
    eps = _noise(sampler, eps, m)
    y = batch.candidates

    p, f_tape = mlp_forward(model.f, batch.features, mode)
    y_n, gn_tape = mlp_forward(model.g_n, model.noise_input(p, eps), mode)
    target = denoise(y, y_n)

    value = mse(p, target)
    dp = mse_grad(p, target)
    f_grads, _ = mlp_backward(model.f, f_tape, dp)
    # d target / d y_n = -1 where y - y_n > 0, and d loss / d target = -dp
    dy_n = dp * ((y - y_n) > 0)
    gn_grads, _ = mlp_backward(model.g_n, gn_tape, dy_n)
    return TermResult(value, {F: f_grads, G_N: gn_grads})


def loss_adv_label(
    model: MgpllModel,
    batch: PLBatch,
    sampler: Optional[PriorSampler] = None,
    *,
    z: Optional[np.ndarray] = None,
    eps: Optional[np.ndarray] = None,
    mode: Mode = Mode.TRAIN,
) -> TermResult:
    """
    mean D_n(y) - mean D_n(z (+) G_n(z, eps)).

    Gradients are of the value itself for both D_n and G_n; the training
    loop ascends D_n and descends G_n.
    """
    m = batch.size
    z = _labels(sampler, z, m)
    eps = _noise(sampler, eps, z.shape[0])
    n_fake = z.shape[0]

    real, real_tape = mlp_forward(model.d_n, batch.candidates, mode)
    y_n, gn_tape = mlp_forward(model.g_n, model.noise_input(z, eps), mode)
    fake_in = augment(z, y_n)
    fake, fake_tape = mlp_forward(model.d_n, fake_in, mode)
    value = float(np.mean(real) - np.mean(fake))

    dn_real, _ = mlp_backward(model.d_n, real_tape, _mean_weights(m, 1.0))
    dn_fake, d_fake_in = mlp_backward(model.d_n, fake_tape, _mean_weights(n_fake, -1.0))
    dn_grads = {name: dn_real[name] + dn_fake[name] for name in dn_real}
    # min(y_n + z, 1) passes gradient only below the cap
    dy_n = d_fake_in * ((y_n + z) < 1.0)
    gn_grads, _ = mlp_backward(model.g_n, gn_tape, dy_n)
    return TermResult(value, {D_N: dn_grads, G_N: gn_grads})


def loss_adv_feature(
    model: MgpllModel,
    batch: PLBatch,
    sampler: Optional[PriorSampler] = None,
    *,
    z: Optional[np.ndarray] = None,
    eps: Optional[np.ndarray] = None,
    mode: Mode = Mode.TRAIN,
) -> TermResult:
    """mean D_x(x) - mean D_x(G_x(z, eps)), routed like loss_adv_label."""
    m = batch.size
    z = _labels(sampler, z, m)
    eps = _noise(sampler, eps, z.shape[0])
    n_fake = z.shape[0]

    real, real_tape = mlp_forward(model.d_x, batch.features, mode)
    x_gen, gx_tape = mlp_forward(model.g_x, model.feature_input(z, eps), mode)
    fake, fake_tape = mlp_forward(model.d_x, x_gen, mode)
    value = float(np.mean(real) - np.mean(fake))

    dx_real, _ = mlp_backward(model.d_x, real_tape, _mean_weights(m, 1.0))
    dx_fake, d_gen = mlp_backward(model.d_x, fake_tape, _mean_weights(n_fake, -1.0))
    dx_grads = {name: dx_real[name] + dx_fake[name] for name in dx_real}
    gx_grads, _ = mlp_backward(model.g_x, gx_tape, d_gen)
    return TermResult(value, {D_X: dx_grads, G_X: gx_grads})


def loss_generation(
    model: MgpllModel,
    batch: PLBatch,
    sampler: Optional[PriorSampler] = None,
    *,
    eps1: Optional[np.ndarray] = None,
    eps2: Optional[np.ndarray] = None,
    mode: Mode = Mode.TRAIN,
) -> TermResult:
    """
    MSE between G_x(y (-) G_n(F(x), eps1), eps2) and x.

    Gradients reach G_x directly, G_n through the denoised labels, and F
    through G_n's input (unconditioned G_n leaves F out).
    """
    m = batch.size
    eps1 = _noise(sampler, eps1, m)
    eps2 = _noise(sampler, eps2, m)
    x, y = batch.features, batch.candidates
    L = model.n_classes

    p, f_tape = mlp_forward(model.f, x, mode)
    y_n, gn_tape = mlp_forward(model.g_n, model.noise_input(p, eps1), mode)
    z_clean = denoise(y, y_n)
    x_gen, gx_tape = mlp_forward(model.g_x, model.feature_input(z_clean, eps2), mode)

    value = mse(x_gen, x)
    gx_grads, d_gx_in = mlp_backward(model.g_x, gx_tape, mse_grad(x_gen, x))
    dz = d_gx_in[:, :L]
    dy_n = -dz * ((y - y_n) > 0)
    gn_grads, d_gn_in = mlp_backward(model.g_n, gn_tape, dy_n)

    grads = {G_X: gx_grads, G_N: gn_grads}
    if model.config.label_conditioned_noise:
        f_grads, _ = mlp_backward(model.f, f_tape, d_gn_in[:, :L])
        grads[F] = f_grads
    return TermResult(value, grads)


def loss_auxiliary(
    model: MgpllModel,
    sampler: Optional[PriorSampler] = None,
    m: Optional[int] = None,
    *,
    z: Optional[np.ndarray] = None,
    eps: Optional[np.ndarray] = None,
    mode: Mode = Mode.TRAIN,
) -> TermResult:
    """Cross-entropy between F(G_x(z, eps)) and z over m sampled pairs."""
    if m is None:
        if z is None:
            raise ConfigError("either m or explicit label draws are required")
        m = as_matrix(z, "label batch").shape[0]
    z = _labels(sampler, z, m)
    eps = _noise(sampler, eps, z.shape[0])

    x_gen, gx_tape = mlp_forward(model.g_x, model.feature_input(z, eps), mode)
    q, f_tape = mlp_forward(model.f, x_gen, mode)
    value = cross_entropy(q, z)
    f_grads, d_gen = mlp_backward(model.f, f_tape, cross_entropy_grad(q, z))
    gx_grads, _ = mlp_backward(model.g_x, gx_tape, d_gen)
    return TermResult(value, {F: f_grads, G_X: gx_grads})


@dataclass(frozen=True)
class ObjectiveBreakdown:
    """Unweighted term values plus the weights of the total objective."""
    l_c: float
    l_adv_n: float
    l_adv_x: float
    l_g: float
    l_aux: float
    alpha: float
    beta: float
    gamma: float

    @property
    def l_adv_x_weighted(self) -> float:
        return self.alpha * self.l_adv_x

    @property
    def l_g_weighted(self) -> float:
        return self.beta * self.l_g

    @property
    def l_aux_weighted(self) -> float:
        return self.gamma * self.l_aux

    @property
    def total(self) -> float:
        return (
            self.l_c
            + self.l_adv_n
            + self.l_adv_x_weighted
            + self.l_g_weighted
            + self.l_aux_weighted
        )


@contextmanager
def _preserved_buffers(model: MgpllModel):
    """Restore every batch-norm running statistic on exit."""
    saved = {name: {k: b.copy() for k, b in net.buffers().items()} for name, net in model.networks().items()}
    try:
        yield
    finally:
        for name, net in model.networks().items():
            for k, b in net.buffers().items():
                np.copyto(b, saved[name][k])


def total_objective(
    model: MgpllModel,
    batch: PLBatch,
    sampler: Optional[PriorSampler] = None,
    terms: frozenset = ALL_TERMS,
    *,
    z: Optional[np.ndarray] = None,
    eps: Optional[np.ndarray] = None,
    eps_bar: Optional[np.ndarray] = None,
    mode: Mode = Mode.TRAIN,
) -> ObjectiveBreakdown:
    """
    Evaluate the weighted total objective on a batch for monitoring.

    Train mode normalizes with batch statistics like a training step, but
    the running statistics are left as they were.

    eps feeds the classification, label-adversarial and denoising draws;
    eps_bar feeds the feature generator in the remaining terms. Terms not in
    ``terms`` contribute exactly 0.
    """
    m = batch.size
    z = _labels(sampler, z, m)
    eps = _noise(sampler, eps, m)
    eps_bar = _noise(sampler, eps_bar, m)

    def value(term: LossTerm, fn) -> float:
        return fn().value if term in terms else 0.0

    cfg = model.config
    with _preserved_buffers(model):
        return ObjectiveBreakdown(
            l_c=value(LossTerm.CLS, lambda: loss_classification(model, batch, eps=eps, mode=mode)),
            l_adv_n=value(LossTerm.ADV_N, lambda: loss_adv_label(model, batch, z=z, eps=eps, mode=mode)),
            l_adv_x=value(LossTerm.ADV_X, lambda: loss_adv_feature(model, batch, z=z, eps=eps_bar, mode=mode)),
            l_g=value(LossTerm.GEN, lambda: loss_generation(model, batch, eps1=eps, eps2=eps_bar, mode=mode)),
            l_aux=value(LossTerm.AUX, lambda: loss_auxiliary(model, z=z, eps=eps_bar, mode=mode)),
            alpha=cfg.alpha,
            beta=cfg.beta,
            gamma=cfg.gamma,
        )
