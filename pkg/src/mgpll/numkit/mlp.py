"""
Sequential multilayer perceptrons with exact forward/backward passes.

Each layer computes ``a = act(bn(x @ W + b))`` where batch normalization is
optional. ``mlp_forward`` records a Tape; ``mlp_backward`` replays it to get
gradients of a scalar loss with respect to every learnable parameter and to
the network input.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import expit, softmax

from ..errors import BatchNormError, ConfigError, ShapeError, StaleTapeError
from .layers import Activation, LayerSpec, Mode
from .matrix import as_matrix, check_finite


BN_EPS = 1e-5
BN_MOMENTUM = 0.9


@dataclass
class DenseLayer:
    """Parameters of one layer. gamma/beta and running stats exist only with batch norm."""
    spec: LayerSpec
    weight: np.ndarray                      # (in_dim, out_dim)
    bias: np.ndarray                        # (out_dim,)
    gamma: Optional[np.ndarray] = None
    beta: Optional[np.ndarray] = None
    running_mean: Optional[np.ndarray] = None
    running_var: Optional[np.ndarray] = None


class MlpState:
    """
    Learnable state of a sequential MLP.

    Parameters are addressed by names like ``"0.weight"``, ``"2.gamma"``.
    ``version`` increases whenever parameters are changed through the public
    API, which lets backward detect stale tapes.
    """

    def __init__(self, layers: list[DenseLayer]):
        if not layers:
            raise ConfigError("an MLP needs at least one layer")
        for k, layer in enumerate(layers):
            if layer.spec.activation == Activation.SOFTMAX and k != len(layers) - 1:
                raise ConfigError(f"softmax is only allowed on the last layer (layer {k})")
            if k > 0 and layers[k - 1].spec.out_dim != layer.spec.in_dim:
                raise ConfigError(
                    f"layer {k - 1} outputs {layers[k - 1].spec.out_dim} "
                    f"but layer {k} expects {layer.spec.in_dim}"
                )
        self.layers = layers
        self.accumulators: dict[str, np.ndarray] = {
            name: np.zeros_like(p) for name, p in self.parameters().items()
        }
        self.version = 0

    @classmethod
    def initialize(cls, specs: list[LayerSpec], rng: np.random.Generator) -> "MlpState":
        """
        Create a state with Glorot-uniform weights, zero biases, and identity batch norm.

        Args:
            specs: Chained layer specs
            rng: Generator consumed once per weight matrix, in layer order

        Returns:
            Freshly initialized MlpState
        """
        layers = []
        for spec in specs:
            limit = np.sqrt(6.0 / (spec.in_dim + spec.out_dim))
            layer = DenseLayer(
                spec=spec,
                weight=rng.uniform(-limit, limit, size=(spec.in_dim, spec.out_dim)),
                bias=np.zeros(spec.out_dim),
            )
            if spec.batch_norm:
                layer.gamma = np.ones(spec.out_dim)
                layer.beta = np.zeros(spec.out_dim)
                layer.running_mean = np.zeros(spec.out_dim)
                layer.running_var = np.ones(spec.out_dim)
            layers.append(layer)
        return cls(layers)

    @property
    def specs(self) -> list[LayerSpec]:
        return [layer.spec for layer in self.layers]

    @property
    def in_dim(self) -> int:
        return self.layers[0].spec.in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].spec.out_dim

    def parameters(self) -> dict[str, np.ndarray]:
        """Learnable tensors by name (live references, not copies)."""
        params = {}
        for k, layer in enumerate(self.layers):
            params[f"{k}.weight"] = layer.weight
            params[f"{k}.bias"] = layer.bias
            if layer.spec.batch_norm:
                params[f"{k}.gamma"] = layer.gamma
                params[f"{k}.beta"] = layer.beta
        return params

    def buffers(self) -> dict[str, np.ndarray]:
        """Non-learnable tensors (batch-norm running statistics) by name."""
        buffers = {}
        for k, layer in enumerate(self.layers):
            if layer.spec.batch_norm:
                buffers[f"{k}.running_mean"] = layer.running_mean
                buffers[f"{k}.running_var"] = layer.running_var
        return buffers

    def mark_updated(self) -> None:
        """Invalidate tapes recorded against the current parameters."""
        self.version += 1

    def max_abs_parameter(self) -> float:
        return max(float(np.max(np.abs(p))) for p in self.parameters().values())

    def copy(self) -> "MlpState":
        layers = [
            DenseLayer(
                spec=layer.spec,
                weight=layer.weight.copy(),
                bias=layer.bias.copy(),
                gamma=None if layer.gamma is None else layer.gamma.copy(),
                beta=None if layer.beta is None else layer.beta.copy(),
                running_mean=None if layer.running_mean is None else layer.running_mean.copy(),
                running_var=None if layer.running_var is None else layer.running_var.copy(),
            )
            for layer in self.layers
        ]
        clone = MlpState(layers)
        clone.accumulators = {name: acc.copy() for name, acc in self.accumulators.items()}
        clone.version = self.version
        return clone

    def equals(self, other: "MlpState") -> bool:
        """Bitwise comparison of specs, parameters, buffers and accumulators."""
        if self.specs != other.specs:
            return False
        for mine, theirs in (
            (self.parameters(), other.parameters()),
            (self.buffers(), other.buffers()),
            (self.accumulators, other.accumulators),
        ):
            if mine.keys() != theirs.keys():
                return False
            if not all(np.array_equal(mine[k], theirs[k]) for k in mine):
                return False
        return True


@dataclass
class Tape:
    """Intermediate values of one forward pass."""
    version: int
    mode: Mode
    inputs: list[np.ndarray] = field(default_factory=list)       # input of each layer
    normalized: list[Optional[np.ndarray]] = field(default_factory=list)
    inv_std: list[Optional[np.ndarray]] = field(default_factory=list)
    pre_activations: list[np.ndarray] = field(default_factory=list)
    outputs: list[np.ndarray] = field(default_factory=list)


def _activate(u: np.ndarray, spec: LayerSpec) -> np.ndarray:
    act = spec.activation
    if act == Activation.LEAKY_RELU:
        return np.where(u > 0.0, u, spec.slope * u)
    if act == Activation.SIGMOID:
        return expit(u)
    if act == Activation.TANH:
        return np.tanh(u)
    if act == Activation.SOFTMAX:
        return softmax(u, axis=1)
    return u.copy()


def _activation_grad(u: np.ndarray, a: np.ndarray, da: np.ndarray, spec: LayerSpec) -> np.ndarray:
    act = spec.activation
    if act == Activation.LEAKY_RELU:
        return da * np.where(u > 0.0, 1.0, spec.slope)
    if act == Activation.SIGMOID:
        return da * a * (1.0 - a)
    if act == Activation.TANH:
        return da * (1.0 - a * a)
    if act == Activation.SOFTMAX:
        return a * (da - np.sum(da * a, axis=1, keepdims=True))
    return da


def mlp_forward(state: MlpState, batch, mode: Mode = Mode.TRAIN) -> tuple[np.ndarray, Tape]:
    """
    Run the network on a batch.

    In Train mode batch-norm layers normalize with batch statistics and
    update their running statistics; in Eval mode they use the running
    statistics and nothing is mutated.

    Args:
        state: Network state
        batch: (rows, in_dim) input
        mode: Train or Eval

    Returns:
        (output, tape)

    Raises:
        ShapeError: If batch columns differ from the first layer's in_dim
        NonFiniteError: If the input or output holds NaN/Inf
        BatchNormError: Train-mode batch norm with a single row
    """
    h = as_matrix(batch, "mlp input")
    if h.shape[0] < 1:
        raise ShapeError("mlp input: batch has no rows")
    if h.shape[1] != state.in_dim:
        raise ShapeError(f"mlp input: expected {state.in_dim} columns, got {h.shape[1]}")

    tape = Tape(version=state.version, mode=mode)
    for k, layer in enumerate(state.layers):
        spec = layer.spec
        tape.inputs.append(h)
        z = h @ layer.weight + layer.bias
        if spec.batch_norm:
            if mode == Mode.TRAIN:
                if z.shape[0] < 2:
                    raise BatchNormError(f"layer {k}: Train-mode batch norm needs at least 2 rows")
                mean = z.mean(axis=0)
                var = z.var(axis=0)
                layer.running_mean *= BN_MOMENTUM
                layer.running_mean += (1.0 - BN_MOMENTUM) * mean
                layer.running_var *= BN_MOMENTUM
                layer.running_var += (1.0 - BN_MOMENTUM) * var
            else:
                mean = layer.running_mean
                var = layer.running_var
            inv_std = 1.0 / np.sqrt(var + BN_EPS)
            z_hat = (z - mean) * inv_std
            u = layer.gamma * z_hat + layer.beta
            tape.normalized.append(z_hat)
            tape.inv_std.append(inv_std)
        else:
            u = z
            tape.normalized.append(None)
            tape.inv_std.append(None)
        h = _activate(u, spec)
        tape.pre_activations.append(u)
        tape.outputs.append(h)

    check_finite(h, "mlp output")
    return h, tape


def mlp_backward(
    state: MlpState,
    tape: Tape,
    output_grad,
) -> tuple[dict[str, np.ndarray], np.ndarray]:
    """
    Backpropagate a loss gradient through a recorded forward pass.

    Args:
        state: The state the tape was recorded against
        tape: Tape from mlp_forward
        output_grad: dLoss/dOutput, same shape as the forward output

    Returns:
        (param_grads keyed like state.parameters(), input_grad)

    Raises:
        StaleTapeError: If the state changed since the forward pass
        ShapeError: If output_grad has the wrong shape
    """
    if tape.version != state.version:
        raise StaleTapeError(
            f"tape recorded at state version {tape.version}, state is at {state.version}"
        )
    da = as_matrix(output_grad, "output gradient")
    if da.shape != tape.outputs[-1].shape:
        raise ShapeError(
            f"output gradient shape {da.shape} does not match output {tape.outputs[-1].shape}"
        )

    grads: dict[str, np.ndarray] = {}
    for k in range(len(state.layers) - 1, -1, -1):
        layer = state.layers[k]
        spec = layer.spec
        du = _activation_grad(tape.pre_activations[k], tape.outputs[k], da, spec)
        if spec.batch_norm:
            z_hat = tape.normalized[k]
            inv_std = tape.inv_std[k]
            grads[f"{k}.gamma"] = np.sum(du * z_hat, axis=0)
            grads[f"{k}.beta"] = np.sum(du, axis=0)
            dz_hat = du * layer.gamma
            if tape.mode == Mode.TRAIN:
                n = dz_hat.shape[0]
                dz = (inv_std / n) * (
                    n * dz_hat
                    - np.sum(dz_hat, axis=0)
                    - z_hat * np.sum(dz_hat * z_hat, axis=0)
                )
            else:
                dz = dz_hat * inv_std
        else:
            dz = du
        grads[f"{k}.weight"] = tape.inputs[k].T @ dz
        grads[f"{k}.bias"] = np.sum(dz, axis=0)
        da = dz @ layer.weight.T

    return grads, da
