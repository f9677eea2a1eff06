"""
Ablation variants: which loss terms the generator step optimizes.
"""

from enum import Enum

from ..errors import ConfigError
from ..model.objectives import ALL_TERMS, LossTerm


class AblationVariant(Enum):
    """Training variants, each dropping one or more objective terms."""
    FULL = "full"
    NO_ADV_N = "no-advn"
    NO_ADV_X = "no-advx"
    NO_GEN = "no-g"
    NO_AUX = "no-aux"
    CLS_ONLY = "cls"

    @classmethod
    def parse(cls, value: str) -> "AblationVariant":
        key = value.strip().lower().replace("_", "-")
        for variant in cls:
            if key in (variant.value, variant.name.lower().replace("_", "-")):
                return variant
        choices = ", ".join(v.value for v in cls)
        raise ConfigError(f"unknown variant {value!r} (choose from {choices})")


_DROPPED = {
    AblationVariant.FULL: frozenset(),
    AblationVariant.NO_ADV_N: frozenset({LossTerm.ADV_N}),
    AblationVariant.NO_ADV_X: frozenset({LossTerm.ADV_X}),
    AblationVariant.NO_GEN: frozenset({LossTerm.GEN}),
    AblationVariant.NO_AUX: frozenset({LossTerm.AUX}),
    AblationVariant.CLS_ONLY: ALL_TERMS - {LossTerm.CLS},
}


def build_ablation_objective(variant: AblationVariant) -> frozenset[LossTerm]:
    """
    Active loss terms of a variant.

    Dropping the label-level adversarial term still leaves G_n trained
    through the classification and generation terms.
    """
    return ALL_TERMS - _DROPPED[variant]
