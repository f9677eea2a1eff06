# Multi-level generative model: networks, label algebra, loss terms, checkpoints
from .labels import augment, denoise, one_hot
from .priors import PriorSampler
from .networks import (
    CRITIC_NAMES,
    GENERATOR_NAMES,
    NETWORK_NAMES,
    MgpllConfig,
    MgpllModel,
    gen_features,
    gen_noise_labels,
    predict,
    predict_label,
)
from .objectives import (
    ALL_TERMS,
    LossTerm,
    ObjectiveBreakdown,
    PLBatch,
    TermResult,
    add_grads,
    loss_adv_feature,
    loss_adv_label,
    loss_auxiliary,
    loss_classification,
    loss_generation,
    total_objective,
)
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint

__all__ = [
    "augment",
    "denoise",
    "one_hot",
    "PriorSampler",
    "CRITIC_NAMES",
    "GENERATOR_NAMES",
    "NETWORK_NAMES",
    "MgpllConfig",
    "MgpllModel",
    "gen_features",
    "gen_noise_labels",
    "predict",
    "predict_label",
    "ALL_TERMS",
    "LossTerm",
    "ObjectiveBreakdown",
    "PLBatch",
    "TermResult",
    "add_grads",
    "loss_adv_feature",
    "loss_adv_label",
    "loss_auxiliary",
    "loss_classification",
    "loss_generation",
    "total_objective",
    "Checkpoint",
    "load_checkpoint",
    "save_checkpoint",
]
