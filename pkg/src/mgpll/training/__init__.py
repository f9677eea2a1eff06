# Minimax training loop, ablation variants, trade-off weight search
from .ablation import AblationVariant, build_ablation_objective
from .trainer import EpochRecord, TrainConfig, TrainLog, train
from .search import SearchConfig, SearchResult, SearchStrategy, select_hyperparameters

__all__ = [
    "AblationVariant",
    "build_ablation_objective",
    "EpochRecord",
    "TrainConfig",
    "TrainLog",
    "train",
    "SearchConfig",
    "SearchResult",
    "SearchStrategy",
    "select_hyperparameters",
]
