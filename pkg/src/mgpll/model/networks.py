"""
The five component networks and their forward operations.

- G_n: noise-label generator, (z, eps) -> soft noise labels in [0, 1]^L
- G_x: feature generator, (z, eps) -> features in [-1, 1]^d
- F:   predictor, x -> class probabilities
- D_n: label-level critic, candidate vector -> score
- D_x: feature-level critic, features -> score
"""

import dataclasses
import logging
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from ..errors import ConfigError, ShapeError
from ..numkit import Activation, MlpState, Mode, as_matrix, chain_specs, clip_parameters, mlp_forward
from ..numkit.layers import DEFAULT_LEAKY_SLOPE
from ..pldata.scaling import FeatureScaler

logger = logging.getLogger(__name__)

G_N = "g_n"
G_X = "g_x"
F = "f"
D_N = "d_n"
D_X = "d_x"

NETWORK_NAMES = (G_N, G_X, F, D_N, D_X)
GENERATOR_NAMES = (G_N, G_X, F)
CRITIC_NAMES = (D_N, D_X)


@dataclass(frozen=True)
class MgpllConfig:
    """
    Model hyperparameters.

    alpha, beta and gamma weight the feature-level adversarial, generation
    and auxiliary classification terms of the total objective.
    """
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    clip_c: float = 0.01
    noise_dim: int = 16
    label_conditioned_noise: bool = True
    generator_width: int = 128
    predictor_width: int = 128
    critic_width: int = 64
    leaky_slope: float = DEFAULT_LEAKY_SLOPE

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value >= 0):
                raise ConfigError(f"{name} must be a nonnegative number, got {value}")
        if not self.clip_c > 0:
            raise ConfigError(f"clip_c must be positive, got {self.clip_c}")
        if self.noise_dim < 1:
            raise ConfigError(f"noise_dim must be at least 1, got {self.noise_dim}")
        for name in ("generator_width", "predictor_width", "critic_width"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1, got {getattr(self, name)}")
        if not 0.0 < self.leaky_slope < 1.0:
            raise ConfigError(f"leaky_slope must be in (0, 1), got {self.leaky_slope}")

    def replace(self, **changes) -> "MgpllConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "MgpllConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown MgpllConfig keys: {sorted(unknown)}")
        return cls(**data)


def _architectures(n_features: int, n_classes: int, cfg: MgpllConfig) -> dict[str, list]:
    gw, pw, cw = cfg.generator_width, cfg.predictor_width, cfg.critic_width
    noise_in = cfg.noise_dim + (n_classes if cfg.label_conditioned_noise else 0)
    feature_in = cfg.noise_dim + n_classes
    slope = cfg.leaky_slope
    return {
        G_N: chain_specs(
            [noise_in, gw, gw, gw, n_classes],
            output_activation=Activation.SIGMOID, slope=slope,
        ),
        G_X: chain_specs(
            [feature_in, gw, gw, gw, gw, n_features],
            output_activation=Activation.TANH,
            batch_norm_layers=frozenset({1, 2, 3}),
            slope=slope,
        ),
        F: chain_specs(
            [n_features, pw, pw, n_classes],
            output_activation=Activation.SOFTMAX, slope=slope,
        ),
        D_N: chain_specs([n_classes, cw, cw, 1], slope=slope),
        D_X: chain_specs([n_features, cw, cw, 1], slope=slope),
    }


@dataclass
class MgpllModel:
    """The five networks plus the configuration they were built with."""
    g_n: MlpState
    g_x: MlpState
    f: MlpState
    d_n: MlpState
    d_x: MlpState
    config: MgpllConfig
    n_features: int
    n_classes: int
    scaler: Optional[FeatureScaler] = None
    class_names: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        L, d = self.n_classes, self.n_features
        noise_in = self.config.noise_dim + (L if self.config.label_conditioned_noise else 0)
        expected = {
            G_N: (noise_in, L),
            G_X: (self.config.noise_dim + L, d),
            F: (d, L),
            D_N: (L, 1),
            D_X: (d, 1),
        }
        for name, (in_dim, out_dim) in expected.items():
            net = self.network(name)
            if (net.in_dim, net.out_dim) != (in_dim, out_dim):
                raise ShapeError(
                    f"{name} maps {net.in_dim} -> {net.out_dim}, expected {in_dim} -> {out_dim}"
                )
        if not self.class_names:
            self.class_names = tuple(str(k) for k in range(L))

    @classmethod
    def build(
        cls,
        n_features: int,
        n_classes: int,
        config: Optional[MgpllConfig] = None,
        rng: Union[np.random.Generator, int, None] = None,
        scaler: Optional[FeatureScaler] = None,
        class_names: tuple[str, ...] = (),
    ) -> "MgpllModel":
        """
        Initialize all five networks.

        Networks are initialized in the order G_n, G_x, F, D_n, D_x from a
        single generator, and both critics start inside the clip box.
        """
        if n_features < 1 or n_classes < 2:
            raise ConfigError(f"need d >= 1 and L >= 2, got d={n_features}, L={n_classes}")
        config = config or MgpllConfig()
        if not isinstance(rng, np.random.Generator):
            rng = np.random.default_rng(0 if rng is None else rng)

        specs = _architectures(n_features, n_classes, config)
        nets = {name: MlpState.initialize(specs[name], rng) for name in NETWORK_NAMES}
        for name in CRITIC_NAMES:
            clip_parameters(nets[name], config.clip_c)

        logger.debug(
            "Built model d=%d L=%d noise_dim=%d conditioned=%s",
            n_features, n_classes, config.noise_dim, config.label_conditioned_noise,
        )
        return cls(
            **nets,
            config=config,
            n_features=n_features,
            n_classes=n_classes,
            scaler=scaler,
            class_names=tuple(class_names),
        )

    def network(self, name: str) -> MlpState:
        if name not in NETWORK_NAMES:
            raise KeyError(name)
        return getattr(self, name)

    def networks(self) -> dict[str, MlpState]:
        return {name: self.network(name) for name in NETWORK_NAMES}

    def noise_input(self, z: np.ndarray, eps: np.ndarray) -> np.ndarray:
        """G_n input: [z, eps], or eps alone for the unconditioned variant."""
        z, eps = self._check_draws(z, eps)
        if self.config.label_conditioned_noise:
            return np.hstack([z, eps])
        return eps

    def feature_input(self, z: np.ndarray, eps: np.ndarray) -> np.ndarray:
        z, eps = self._check_draws(z, eps)
        return np.hstack([z, eps])

    def _check_draws(self, z, eps) -> tuple[np.ndarray, np.ndarray]:
        z = as_matrix(z, "label batch")
        eps = as_matrix(eps, "noise batch")
        if z.shape[1] != self.n_classes:
            raise ShapeError(f"label batch has {z.shape[1]} columns, expected {self.n_classes}")
        if eps.shape[1] != self.config.noise_dim:
            raise ShapeError(f"noise batch has {eps.shape[1]} columns, expected {self.config.noise_dim}")
        if z.shape[0] != eps.shape[0]:
            raise ShapeError(f"label batch has {z.shape[0]} rows, noise batch {eps.shape[0]}")
        return z, eps

    def copy(self) -> "MgpllModel":
        return dataclasses.replace(self, **{name: net.copy() for name, net in self.networks().items()})

    def equals(self, other: "MgpllModel") -> bool:
        return (
            self.config == other.config
            and self.class_names == other.class_names
            and all(self.network(n).equals(other.network(n)) for n in NETWORK_NAMES)
        )


def gen_noise_labels(model: MgpllModel, z_batch, eps_batch) -> np.ndarray:
    """G_n forward; rows in [0, 1]^L."""
    out, _ = mlp_forward(model.g_n, model.noise_input(z_batch, eps_batch), Mode.EVAL)
    return out


def gen_features(model: MgpllModel, z_batch, eps_batch, mode: Mode = Mode.EVAL) -> np.ndarray:
    """
    G_x forward; rows in [-1, 1]^d.

    Train mode normalizes with batch statistics (and updates the running
    statistics), so it needs at least two rows.
    """
    out, _ = mlp_forward(model.g_x, model.feature_input(z_batch, eps_batch), mode)
    return out


def predict(model: MgpllModel, x_batch) -> np.ndarray:
    """Class probabilities for each row of x_batch."""
    x = as_matrix(x_batch, "features")
    if x.shape[1] != model.n_features:
        raise ShapeError(f"features have {x.shape[1]} columns, model expects {model.n_features}")
    out, _ = mlp_forward(model.f, x, Mode.EVAL)
    return out


def predict_label(model: MgpllModel, x) -> Union[int, np.ndarray]:
    """
    Predicted class index (lowest index on ties).

    A single feature vector gives an int, a batch gives an int array.
    """
    x_arr = np.asarray(x, dtype=np.float64)
    labels = np.argmax(predict(model, x_arr), axis=1)
    if x_arr.ndim == 1:
        return int(labels[0])
    return labels
