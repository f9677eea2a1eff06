"""
Controlled corruption of clean datasets into partial-label datasets.

Two noise settings are supported:

- Random: a proportion p of the instances receives exactly r false-positive
  labels drawn uniformly from the non-true labels.
- Coupled: every instance receives exactly one false positive, which is its
  class's designated coupled label with probability epsilon and otherwise a
  uniform draw from the remaining labels.

The epsilon here is a co-occurrence probability and has nothing to do with
the generator noise prior of the model.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..errors import ConfigError, DatasetError
from .dataset import PLDataset


class NoiseMode(Enum):
    """Synthetic noise setting."""
    RANDOM = "random"
    COUPLED = "coupled"


class Coupling(Enum):
    """How each class's coupled label is chosen."""
    NEXT = "next"                  # j -> (j + 1) mod L
    DERANGEMENT = "derangement"    # seeded random permutation without fixed points


STANDARD_PROPORTIONS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7)


@dataclass(frozen=True)
class SynthConfig:
    """Corruption parameters. p, r apply to Random mode; epsilon to Coupled mode."""
    p: float = 1.0
    r: int = 1
    epsilon: float = 0.0
    mode: NoiseMode = NoiseMode.RANDOM
    seed: int = 0
    coupling: Coupling = Coupling.NEXT

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ConfigError(f"p must be in [0, 1], got {self.p}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError(f"epsilon must be in [0, 1], got {self.epsilon}")
        if self.r < 1:
            raise ConfigError(f"r must be at least 1, got {self.r}")
        if self.mode == NoiseMode.COUPLED and (self.p != 1.0 or self.r != 1):
            raise ConfigError("coupled noise requires p = 1 and r = 1")

    @classmethod
    def random(cls, p: float, r: int, seed: int = 0) -> "SynthConfig":
        return cls(p=p, r=r, mode=NoiseMode.RANDOM, seed=seed)

    @classmethod
    def coupled(
        cls,
        epsilon: float,
        seed: int = 0,
        coupling: Coupling = Coupling.NEXT,
    ) -> "SynthConfig":
        return cls(p=1.0, r=1, epsilon=epsilon, mode=NoiseMode.COUPLED, seed=seed, coupling=coupling)

    def tag(self) -> str:
        """Short identifier used in derived dataset names."""
        if self.mode == NoiseMode.COUPLED:
            return f"coupled-eps{self.epsilon:g}"
        return f"random-p{self.p:g}-r{self.r}"


def standard_configurations(seed: int = 0) -> list[SynthConfig]:
    """
    The 28 standard settings: r in {1, 2, 3} with p from 0.1 to 0.7, and
    coupled noise with epsilon from 0.1 to 0.7.
    """
    configs = [
        SynthConfig.random(p=p, r=r, seed=seed)
        for r in (1, 2, 3)
        for p in STANDARD_PROPORTIONS
    ]
    configs += [SynthConfig.coupled(epsilon=e, seed=seed) for e in STANDARD_PROPORTIONS]
    return configs


def _streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    coupling_seq, corruption_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(coupling_seq), np.random.default_rng(corruption_seq)


def coupled_label_map(n_classes: int, seed: int = 0, derangement: bool = False) -> np.ndarray:
    """
    Designated coupled label for each class.

    Depends only on the class count and seed, so it is stable across folds
    and across datasets of different sizes.
    """
    if n_classes < 2:
        raise ConfigError("coupled labels need at least 2 classes")
    if not derangement:
        return (np.arange(n_classes) + 1) % n_classes
    rng, _ = _streams(seed)
    while True:
        perm = rng.permutation(n_classes)
        if not np.any(perm == np.arange(n_classes)):
            return perm


def synthesize(clean: PLDataset, cfg: SynthConfig) -> PLDataset:
    """
    Add false-positive candidate labels to a clean dataset.

    Args:
        clean: Dataset with true labels and singleton candidate sets
        cfg: Corruption parameters

    Returns:
        New PLDataset with the same features and true labels

    Raises:
        DatasetError: Missing true labels or non-singleton candidate rows
        ConfigError: r > L - 1
    """
    if not clean.has_true_labels:
        raise DatasetError(f"{clean.name}: synthesis needs ground-truth labels")
    if not clean.is_clean():
        raise DatasetError(f"{clean.name}: synthesis needs singleton candidate sets")

    n, n_classes = clean.n_instances, clean.n_classes
    if cfg.r > n_classes - 1:
        raise ConfigError(f"r = {cfg.r} exceeds L - 1 = {n_classes - 1}")

    _, rng = _streams(cfg.seed)
    truths = clean.true_labels
    candidates = np.array(clean.candidates, copy=True)

    if cfg.mode == NoiseMode.RANDOM:
        n_corrupt = round(cfg.p * n)   # half-to-even
        order = rng.permutation(n)
        for i in order[:n_corrupt]:
            others = np.flatnonzero(np.arange(n_classes) != truths[i])
            picks = rng.choice(others, size=cfg.r, replace=False)
            candidates[i, picks] = 1.0
    else:
        coupled = coupled_label_map(
            n_classes, cfg.seed, derangement=cfg.coupling == Coupling.DERANGEMENT
        )
        for i in range(n):
            t = truths[i]
            partner = coupled[t]
            draw = rng.random()
            if draw < cfg.epsilon or n_classes == 2:
                noise = partner
            else:
                others = np.flatnonzero(
                    (np.arange(n_classes) != t) & (np.arange(n_classes) != partner)
                )
                noise = others[rng.integers(others.shape[0])]
            candidates[i, noise] = 1.0

    return PLDataset(
        features=clean.features,
        candidates=candidates,
        true_labels=truths,
        class_names=clean.class_names,
        name=f"{clean.name}-{cfg.tag()}",
    )
