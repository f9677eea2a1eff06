# Dense numerical core: MLP forward/backward, losses, RMSProp, clipping
from .layers import Activation, LayerSpec, Mode, chain_specs
from .matrix import as_matrix, check_finite
from .mlp import DenseLayer, MlpState, Tape, mlp_backward, mlp_forward
from .optim import Direction, clip_parameters, rmsprop_step
from .losses import cross_entropy, cross_entropy_grad, mse, mse_grad
from .gradcheck import check_state_gradients, numerical_gradient, relative_error

__all__ = [
    "Activation",
    "LayerSpec",
    "Mode",
    "chain_specs",
    "as_matrix",
    "check_finite",
    "DenseLayer",
    "MlpState",
    "Tape",
    "mlp_forward",
    "mlp_backward",
    "Direction",
    "rmsprop_step",
    "clip_parameters",
    "mse",
    "mse_grad",
    "cross_entropy",
    "cross_entropy_grad",
    "numerical_gradient",
    "relative_error",
    "check_state_gradients",
]
