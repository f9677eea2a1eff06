"""
RMSProp updates and critic weight clipping.
"""

from enum import Enum

import numpy as np

from ..errors import ConfigError, ShapeError
from .matrix import check_finite
from .mlp import MlpState


DEFAULT_DECAY = 0.9
DEFAULT_EPS_DIV = 1e-8


class Direction(Enum):
    """Descent minimizes, Ascent maximizes (critic updates)."""
    DESCENT = "descent"
    ASCENT = "ascent"


def rmsprop_step(
    state: MlpState,
    param_grads: dict[str, np.ndarray],
    lr: float,
    decay: float = DEFAULT_DECAY,
    eps_div: float = DEFAULT_EPS_DIV,
    direction: Direction = Direction.DESCENT,
) -> None:
    """
    Apply one RMSProp step in place.

    ``acc <- decay * acc + (1 - decay) * g^2`` and
    ``param <- param -/+ lr * g / sqrt(acc + eps_div)``.
    Parameters without an entry in param_grads are left untouched.

    Args:
        state: Network state to update
        param_grads: Gradients keyed like state.parameters()
        lr: Learning rate (> 0)
        decay: Accumulator decay in (0, 1)
        eps_div: Denominator offset (> 0)
        direction: Descent or Ascent

    Raises:
        ConfigError: On invalid hyperparameters
        NonFiniteError: If a gradient holds NaN/Inf
        ShapeError: If a gradient does not match its parameter
    """
    if not lr > 0:
        raise ConfigError(f"learning rate must be positive, got {lr}")
    if not 0.0 < decay < 1.0:
        raise ConfigError(f"RMSProp decay must be in (0, 1), got {decay}")
    if not eps_div > 0:
        raise ConfigError(f"RMSProp eps_div must be positive, got {eps_div}")

    params = state.parameters()
    for name, grad in param_grads.items():
        if name not in params:
            raise ShapeError(f"gradient for unknown parameter {name!r}")
        if grad.shape != params[name].shape:
            raise ShapeError(f"{name}: gradient shape {grad.shape} != {params[name].shape}")
        check_finite(grad, f"gradient {name}")

    for name, grad in param_grads.items():
        # Ascent on g is descent on -g
        g = -grad if direction == Direction.ASCENT else grad
        acc = state.accumulators[name]
        acc *= decay
        acc += (1.0 - decay) * (g * g)
        params[name] -= lr * g / np.sqrt(acc + eps_div)
    state.mark_updated()


def clip_parameters(state: MlpState, c: float) -> None:
    """
    Clamp every learnable entry to [-c, c] in place.

    Batch-norm running statistics are buffers, not parameters, and are not clipped.
    """
    if not c > 0:
        raise ConfigError(f"clip bound must be positive, got {c}")
    for param in state.parameters().values():
        np.clip(param, -c, c, out=param)
    state.mark_updated()
