"""
Layer prescriptions for sequential MLPs.
"""

from dataclasses import dataclass
from enum import Enum

from ..errors import ConfigError


DEFAULT_LEAKY_SLOPE = 0.01


class Activation(Enum):
    """Supported layer activations."""
    LEAKY_RELU = "leaky_relu"
    SIGMOID = "sigmoid"
    TANH = "tanh"
    SOFTMAX = "softmax"   # terminal layer only
    IDENTITY = "identity"


class Mode(Enum):
    """Forward-pass mode; only batch normalization distinguishes them."""
    TRAIN = "train"
    EVAL = "eval"


@dataclass(frozen=True)
class LayerSpec:
    """One dense layer: affine map, optional batch norm, activation."""
    in_dim: int
    out_dim: int
    activation: Activation = Activation.LEAKY_RELU
    batch_norm: bool = False
    slope: float = DEFAULT_LEAKY_SLOPE  # LeakyRelu only

    def __post_init__(self):
        if self.in_dim < 1 or self.out_dim < 1:
            raise ConfigError(
                f"layer dimensions must be positive, got {self.in_dim}->{self.out_dim}"
            )
        if not isinstance(self.activation, Activation):
            raise ConfigError(f"unknown activation: {self.activation!r}")
        if self.activation == Activation.LEAKY_RELU and not 0.0 < self.slope < 1.0:
            raise ConfigError(f"leaky ReLU slope must be in (0, 1), got {self.slope}")

    def to_dict(self) -> dict:
        return {
            "in_dim": self.in_dim,
            "out_dim": self.out_dim,
            "activation": self.activation.value,
            "batch_norm": self.batch_norm,
            "slope": self.slope,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LayerSpec":
        return cls(
            in_dim=int(data["in_dim"]),
            out_dim=int(data["out_dim"]),
            activation=Activation(data["activation"]),
            batch_norm=bool(data["batch_norm"]),
            slope=float(data["slope"]),
        )


def chain_specs(
    dims: list[int],
    hidden_activation: Activation = Activation.LEAKY_RELU,
    output_activation: Activation = Activation.IDENTITY,
    batch_norm_layers: frozenset[int] = frozenset(),
    slope: float = DEFAULT_LEAKY_SLOPE,
) -> list[LayerSpec]:
    """
    Build a list of chained LayerSpecs from a dimension list.

    Args:
        dims: Layer boundary dimensions, e.g. [in, h, h, out] for three layers
        hidden_activation: Activation of every layer but the last
        output_activation: Activation of the last layer
        batch_norm_layers: 0-based indices of layers that use batch norm
        slope: Leaky ReLU slope

    Returns:
        len(dims) - 1 LayerSpecs
    """
    if len(dims) < 2:
        raise ConfigError("an MLP needs at least one layer")
    n_layers = len(dims) - 1
    specs = []
    for k in range(n_layers):
        activation = output_activation if k == n_layers - 1 else hidden_activation
        specs.append(LayerSpec(
            in_dim=dims[k],
            out_dim=dims[k + 1],
            activation=activation,
            batch_norm=k in batch_norm_layers,
            slope=slope,
        ))
    return specs
