# Partial-label datasets: representation, file formats, synthesis, folds
from .dataset import PLDataset, from_labels
from .scaling import FeatureScaler, normalize_features
from .formats import DatasetFormat, infer_format, load_dataset, load_labeled_csv, write_dataset
from .synth import (
    Coupling,
    NoiseMode,
    SynthConfig,
    coupled_label_map,
    standard_configurations,
    synthesize,
)
from .folds import FoldPlan, kfold_split

__all__ = [
    "PLDataset",
    "from_labels",
    "FeatureScaler",
    "normalize_features",
    "DatasetFormat",
    "infer_format",
    "load_dataset",
    "load_labeled_csv",
    "write_dataset",
    "Coupling",
    "NoiseMode",
    "SynthConfig",
    "coupled_label_map",
    "standard_configurations",
    "synthesize",
    "FoldPlan",
    "kfold_split",
]
