"""
Model checkpoints.

A checkpoint is a single .npz archive. Every tensor of every network
(parameters, batch-norm running statistics, RMSProp accumulators) is stored
under ``<network>/<kind>/<name>``; everything else (format version, config,
layer specs, class names, training RNG state) goes into a JSON string under
``__meta__``. Loading never unpickles.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from ..errors import CheckpointError, MgpllError
from ..numkit import DenseLayer, LayerSpec, MlpState
from ..pldata.scaling import FeatureScaler
from .networks import NETWORK_NAMES, MgpllConfig, MgpllModel

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
META_KEY = "__meta__"


@dataclass
class Checkpoint:
    model: MgpllModel
    rng_state: Optional[dict] = None
    extra: Optional[dict] = None

    def restore_rng(self) -> Optional[np.random.Generator]:
        """Rebuild the training generator exactly where it was saved."""
        if self.rng_state is None:
            return None
        rng = np.random.default_rng()
        rng.bit_generator.state = self.rng_state
        return rng


def _rng_state(rng) -> Optional[dict]:
    if rng is None:
        return None
    if isinstance(rng, np.random.Generator):
        return rng.bit_generator.state
    return dict(rng)


def save_checkpoint(
    model: MgpllModel,
    path: Union[str, Path],
    rng: Union[np.random.Generator, dict, None] = None,
    extra: Optional[dict] = None,
) -> Path:
    """
    Write a model checkpoint.

    Args:
        model: Model to save
        path: Output file (written as-is, no suffix is appended)
        rng: Training generator (or its bit_generator state) to make restorable
        extra: JSON-serializable metadata stored alongside (e.g. variant, seed)

    Returns:
        The path written
    """
    path = Path(path)
    arrays: dict[str, np.ndarray] = {}
    specs = {}
    for name, net in model.networks().items():
        specs[name] = [spec.to_dict() for spec in net.specs]
        for pname, value in net.parameters().items():
            arrays[f"{name}/param/{pname}"] = value
        for bname, value in net.buffers().items():
            arrays[f"{name}/buffer/{bname}"] = value
        for pname, value in net.accumulators.items():
            arrays[f"{name}/acc/{pname}"] = value

    if model.scaler is not None:
        arrays["scaler/lower"] = model.scaler.lower
        arrays["scaler/upper"] = model.scaler.upper

    meta = {
        "format_version": FORMAT_VERSION,
        "config": model.config.to_dict(),
        "n_features": model.n_features,
        "n_classes": model.n_classes,
        "class_names": list(model.class_names),
        "specs": specs,
        "versions": {name: net.version for name, net in model.networks().items()},
        "has_scaler": model.scaler is not None,
        "rng_state": _rng_state(rng),
        "extra": extra or {},
    }
    arrays[META_KEY] = np.array(json.dumps(meta, sort_keys=True))

    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        np.savez(f, **arrays)
    logger.info("Saved checkpoint %s", path)
    return path


def _rebuild_network(name: str, spec_dicts: list[dict], data) -> MlpState:
    layers = []
    for k, raw in enumerate(spec_dicts):
        spec = LayerSpec.from_dict(raw)
        layer = DenseLayer(
            spec=spec,
            weight=np.array(data[f"{name}/param/{k}.weight"]),
            bias=np.array(data[f"{name}/param/{k}.bias"]),
        )
        if spec.batch_norm:
            layer.gamma = np.array(data[f"{name}/param/{k}.gamma"])
            layer.beta = np.array(data[f"{name}/param/{k}.beta"])
            layer.running_mean = np.array(data[f"{name}/buffer/{k}.running_mean"])
            layer.running_var = np.array(data[f"{name}/buffer/{k}.running_var"])
        layers.append(layer)
    state = MlpState(layers)
    for pname in state.accumulators:
        state.accumulators[pname] = np.array(data[f"{name}/acc/{pname}"])
    return state


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    """
    Read a checkpoint written by save_checkpoint.

    Raises:
        CheckpointError: Missing file, unknown format version, or missing tensors
    """
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"checkpoint not found: {path}")

    try:
        with np.load(path, allow_pickle=False) as data:
            if META_KEY not in data.files:
                raise CheckpointError(f"{path}: not a model checkpoint (no metadata)")
            meta = json.loads(str(data[META_KEY]))
            version = meta.get("format_version")
            if version != FORMAT_VERSION:
                raise CheckpointError(
                    f"{path}: unsupported checkpoint format version {version} "
                    f"(expected {FORMAT_VERSION})"
                )
            nets = {
                name: _rebuild_network(name, meta["specs"][name], data)
                for name in NETWORK_NAMES
            }
            scaler = None
            if meta["has_scaler"]:
                scaler = FeatureScaler(
                    lower=np.array(data["scaler/lower"]),
                    upper=np.array(data["scaler/upper"]),
                )
    except CheckpointError:
        raise
    except MgpllError as e:
        raise CheckpointError(f"{path}: inconsistent checkpoint: {e}") from e
    except (KeyError, ValueError, OSError) as e:
        raise CheckpointError(f"{path}: unreadable checkpoint: {e}") from e

    for name, version in meta["versions"].items():
        nets[name].version = version

    model = MgpllModel(
        **nets,
        config=MgpllConfig.from_dict(meta["config"]),
        n_features=meta["n_features"],
        n_classes=meta["n_classes"],
        scaler=scaler,
        class_names=tuple(meta["class_names"]),
    )
    logger.info("Loaded checkpoint %s", path)
    return Checkpoint(model=model, rng_state=meta["rng_state"], extra=meta["extra"])
