"""
Two-tailed paired t-test over per-fold scores.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import stats

from ..errors import MetricError

DEFAULT_LEVEL = 0.05

# Two-tailed critical values at the 0.05 level for df 1..100
T_CRITICAL_05 = {df: float(stats.t.ppf(1.0 - DEFAULT_LEVEL / 2.0, df)) for df in range(1, 101)}


class Verdict(Enum):
    WIN = "win"
    TIE = "tie"
    LOSS = "loss"

    def mirrored(self) -> "Verdict":
        return {Verdict.WIN: Verdict.LOSS, Verdict.LOSS: Verdict.WIN}.get(self, Verdict.TIE)


@dataclass(frozen=True)
class TTestResult:
    verdict: Verdict
    t_statistic: float
    df: int
    critical: float

    @property
    def significant(self) -> bool:
        return self.verdict != Verdict.TIE


def t_critical(df: int, level: float = DEFAULT_LEVEL) -> float:
    """Two-tailed critical |t| for the given degrees of freedom."""
    if df < 1:
        raise MetricError(f"degrees of freedom must be positive, got {df}")
    if not 0.0 < level < 1.0:
        raise MetricError(f"significance level must be in (0, 1), got {level}")
    if level == DEFAULT_LEVEL and df in T_CRITICAL_05:
        return T_CRITICAL_05[df]
    return float(stats.t.ppf(1.0 - level / 2.0, df))


def paired_t_test(a, b, level: float = DEFAULT_LEVEL) -> TTestResult:
    """
    Compare method a against method b on fold-paired scores.

    A zero-variance difference counts as an infinite t when its mean is
    nonzero and as a tie when it is zero.

    Args:
        a: Per-fold scores of method a
        b: Per-fold scores of method b, same folds
        level: Two-tailed significance level

    Returns:
        TTestResult with the verdict from a's point of view
    """
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise MetricError(f"paired samples differ in length: {a.shape[0]} vs {b.shape[0]}")
    n = a.shape[0]
    if n < 2:
        raise MetricError("a paired t-test needs at least two folds")

    diff = a - b
    df = n - 1
    critical = t_critical(df, level)
    mean = float(np.mean(diff))
    sd = float(np.std(diff, ddof=1))

    if sd == 0.0:
        if mean == 0.0:
            return TTestResult(Verdict.TIE, 0.0, df, critical)
        t = float(np.copysign(np.inf, mean))
    else:
        t = mean / (sd / np.sqrt(n))

    if abs(t) > critical:
        verdict = Verdict.WIN if mean > 0 else Verdict.LOSS
    else:
        verdict = Verdict.TIE
    return TTestResult(verdict, t, df, critical)
