"""
Experiment reports: aligned text tables and versioned CSV files.

CSV schemas (see docs/plans/csv-schemas.md):
    folds_v1.csv    dataset,method,metric,fold,score
    summary_v1.csv  dataset,method,metric,mean,std,verdict,t_statistic
    sweep_v1.csv    dataset,method,epsilon,mean,std,folds

Floats are written with repr so every value re-parses to the same double.
"""

import csv
import hashlib
import io
import json
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Union

import numpy as np

from ..errors import MetricError
from .crossval import CrossValResult
from .significance import TTestResult, Verdict, paired_t_test

logger = logging.getLogger(__name__)

FOLD_COLUMNS = ["dataset", "method", "metric", "fold", "score"]
SUMMARY_COLUMNS = ["dataset", "method", "metric", "mean", "std", "verdict", "t_statistic"]
SWEEP_COLUMNS = ["dataset", "method", "epsilon", "mean", "std", "folds"]

FOLDS_FILE = "folds_v1.csv"
SUMMARY_FILE = "summary_v1.csv"
SWEEP_FILE = "sweep_v1.csv"

# Text-table markers: the reference method is significantly better / worse
MARK_SUPERIOR = "*"
MARK_INFERIOR = "o"

# Reported real-world results, mean and std over ten folds, by (dataset, metric)
PUBLISHED_RESULTS: dict[tuple[str, str], dict[str, tuple[float, float]]] = {
    ("fgnet", "accuracy"): {
        "mgpll": (0.079, 0.024), "sure": (0.068, 0.032), "paloc": (0.064, 0.019),
        "clpl": (0.063, 0.027), "pl-svm": (0.063, 0.029), "pl-knn": (0.038, 0.025),
    },
    ("fgnet", "mae3"): {
        "mgpll": (0.468, 0.027), "sure": (0.458, 0.024), "paloc": (0.435, 0.018),
        "clpl": (0.458, 0.022), "pl-svm": (0.356, 0.022), "pl-knn": (0.269, 0.045),
    },
    ("fgnet", "mae5"): {
        "mgpll": (0.626, 0.022), "sure": (0.615, 0.019), "paloc": (0.609, 0.043),
        "clpl": (0.596, 0.017), "pl-svm": (0.479, 0.016), "pl-knn": (0.438, 0.053),
    },
    ("lost", "accuracy"): {
        "mgpll": (0.798, 0.033), "sure": (0.780, 0.036), "paloc": (0.629, 0.056),
        "clpl": (0.742, 0.038), "pl-svm": (0.729, 0.042), "pl-knn": (0.424, 0.036),
    },
    ("msrcv2", "accuracy"): {
        "mgpll": (0.533, 0.021), "sure": (0.481, 0.036), "paloc": (0.479, 0.042),
        "clpl": (0.413, 0.041), "pl-svm": (0.461, 0.046), "pl-knn": (0.448, 0.037),
    },
    ("birdsong", "accuracy"): {
        "mgpll": (0.748, 0.020), "sure": (0.728, 0.024), "paloc": (0.711, 0.016),
        "clpl": (0.632, 0.019), "pl-svm": (0.660, 0.037), "pl-knn": (0.614, 0.021),
    },
    ("yahoonews", "accuracy"): {
        "mgpll": (0.678, 0.008), "sure": (0.644, 0.015), "paloc": (0.625, 0.005),
        "clpl": (0.462, 0.009), "pl-svm": (0.629, 0.010), "pl-knn": (0.457, 0.004),
    },
}

# Reported ablation results, keyed like PUBLISHED_RESULTS, methods by variant value
PUBLISHED_ABLATION: dict[tuple[str, str], dict[str, tuple[float, float]]] = {
    ("fgnet", "accuracy"): {
        "full": (0.079, 0.024), "no-advn": (0.061, 0.024), "no-advx": (0.072, 0.020),
        "no-g": (0.068, 0.029), "no-aux": (0.076, 0.022), "cls": (0.057, 0.016),
    },
    ("fgnet", "mae3"): {
        "full": (0.468, 0.027), "no-advn": (0.430, 0.029), "no-advx": (0.451, 0.032),
        "no-g": (0.436, 0.038), "no-aux": (0.456, 0.033), "cls": (0.420, 0.420),
    },
    ("fgnet", "mae5"): {
        "full": (0.626, 0.022), "no-advn": (0.583, 0.055), "no-advx": (0.605, 0.031),
        "no-g": (0.590, 0.045), "no-aux": (0.612, 0.044), "cls": (0.570, 0.034),
    },
    ("lost", "accuracy"): {
        "full": (0.798, 0.033), "no-advn": (0.623, 0.037), "no-advx": (0.754, 0.032),
        "no-g": (0.687, 0.026), "no-aux": (0.782, 0.043), "cls": (0.609, 0.040),
    },
    ("msrcv2", "accuracy"): {
        "full": (0.533, 0.021), "no-advn": (0.472, 0.030), "no-advx": (0.480, 0.038),
        "no-g": (0.497, 0.031), "no-aux": (0.526, 0.036), "cls": (0.450, 0.037),
    },
    ("birdsong", "accuracy"): {
        "full": (0.748, 0.020), "no-advn": (0.728, 0.010), "no-advx": (0.732, 0.011),
        "no-g": (0.716, 0.011), "no-aux": (0.742, 0.024), "cls": (0.674, 0.016),
    },
    ("yahoonews", "accuracy"): {
        "full": (0.678, 0.008), "no-advn": (0.645, 0.008), "no-advx": (0.675, 0.009),
        "no-g": (0.648, 0.014), "no-aux": (0.671, 0.012), "cls": (0.610, 0.015),
    },
}


class ReportFormat(Enum):
    TEXT = "text"
    CSV = "csv"


def dataset_key(name: str) -> str:
    """Lowercase alphanumeric key, e.g. 'Yahoo! News' -> 'yahoonews'."""
    return re.sub(r"[^a-z0-9]", "", name.lower())


def published_results(dataset: str, metric: str = "accuracy") -> Optional[dict[str, tuple[float, float]]]:
    return PUBLISHED_RESULTS.get((dataset_key(dataset), metric))


def source_hash(path: Union[str, Path]) -> str:
    """SHA-256 hex digest of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class SweepPoint:
    """Fold scores of one method at one co-occurrence probability."""
    dataset: str
    method: str
    epsilon: float
    scores: list[float]


@dataclass
class SummaryRow:
    dataset: str
    method: str
    metric: str
    mean: float
    std: float
    test: Optional[TTestResult] = None

    @property
    def verdict(self) -> str:
        return self.test.verdict.value if self.test else ""

    @property
    def marker(self) -> str:
        if self.test is None or self.test.verdict == Verdict.TIE:
            return ""
        return MARK_SUPERIOR if self.test.verdict == Verdict.WIN else MARK_INFERIOR


@dataclass
class ExperimentReport:
    """
    Cross-validation results of several methods, plus optional sweep points.

    Every non-reference method is compared against ``reference`` on each
    (dataset, metric) with a paired t-test over folds.
    """
    results: list[CrossValResult] = field(default_factory=list)
    reference: Optional[str] = None
    sweep: list[SweepPoint] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    level: float = 0.05

    def add(self, result: CrossValResult) -> None:
        for other in self.results:
            if other.dataset == result.dataset and other.k != result.k:
                raise MetricError(
                    f"{result.dataset}: {result.method} has {result.k} folds, "
                    f"{other.method} has {other.k}"
                )
        self.results.append(result)

    def add_input_file(self, path: Union[str, Path]) -> None:
        hashes = self.metadata.setdefault("inputs", {})
        hashes[Path(path).name] = source_hash(path)

    def datasets(self) -> list[str]:
        return list(dict.fromkeys(r.dataset for r in self.results))

    def _find(self, dataset: str, method: str) -> Optional[CrossValResult]:
        for r in self.results:
            if r.dataset == dataset and r.method == method:
                return r
        return None

    def summary(self) -> list[SummaryRow]:
        rows = []
        for r in self.results:
            ref = self._find(r.dataset, self.reference) if self.reference else None
            for metric, scores in r.scores.items():
                test = None
                if ref is not None and ref is not r and metric in ref.scores:
                    test = paired_t_test(ref.scores[metric], scores, self.level)
                std = float(np.std(scores, ddof=1)) if len(scores) > 1 else 0.0
                rows.append(SummaryRow(r.dataset, r.method, metric, float(np.mean(scores)), std, test))
        return rows

    def tallies(self) -> dict[str, dict[str, int]]:
        """Win/tie/loss counts of the reference against each other method."""
        counts: dict[str, dict[str, int]] = {}
        for row in self.summary():
            if row.test is None:
                continue
            bucket = counts.setdefault(row.method, {v.value: 0 for v in Verdict})
            bucket[row.test.verdict.value] += 1
        return counts


def _f(value: float) -> str:
    return repr(float(value))


def render_text(report: ExperimentReport) -> str:
    """Aligned mean+-std table with significance markers."""
    rows = report.summary()
    out = io.StringIO()
    title = "Experiment report"
    out.write(f"{title}\n{'=' * 40}\n")
    if report.reference:
        out.write(
            f"Reference: {report.reference}  "
            f"({MARK_SUPERIOR}/{MARK_INFERIOR}: reference significantly better/worse, "
            f"paired t-test at {report.level:g})\n"
        )
    if not rows:
        out.write("(no results)\n")

    widths = [
        max([len("dataset")] + [len(r.dataset) for r in rows]),
        max([len("method")] + [len(r.method) for r in rows]),
        max([len("metric")] + [len(r.metric) for r in rows]),
    ]
    if rows:
        out.write(
            f"{'dataset':<{widths[0]}}  {'method':<{widths[1]}}  {'metric':<{widths[2]}}  mean+-std\n"
        )
        out.write("-" * (sum(widths) + 20) + "\n")
    for r in rows:
        out.write(
            f"{r.dataset:<{widths[0]}}  {r.method:<{widths[1]}}  {r.metric:<{widths[2]}}  "
            f"{r.mean:.3f}+-{r.std:.3f}{r.marker}\n"
        )

    tallies = report.tallies()
    if tallies:
        out.write(f"\nWin/tie/loss of {report.reference}\n")
        for method, counts in tallies.items():
            out.write(f"  vs {method}: {counts['win']}/{counts['tie']}/{counts['loss']}\n")

    published_seen = set()
    for r in rows:
        key = (dataset_key(r.dataset), r.metric)
        if key in PUBLISHED_RESULTS and key not in published_seen:
            published_seen.add(key)
            cells = ", ".join(
                f"{m} {mean:.3f}+-{std:.3f}" for m, (mean, std) in PUBLISHED_RESULTS[key].items()
            )
            out.write(f"\nPublished ({r.dataset}, {r.metric}): {cells}\n")

    if report.sweep:
        out.write("\nSweep\n")
        for p in report.sweep:
            std = float(np.std(p.scores, ddof=1)) if len(p.scores) > 1 else 0.0
            out.write(
                f"  {p.dataset}  {p.method}  eps={p.epsilon:g}  "
                f"{float(np.mean(p.scores)):.3f}+-{std:.3f}\n"
            )
    return out.getvalue()


def _write_csv(path: Path, columns: list[str], rows: list[list]) -> Path:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        writer.writerows(rows)
    return path


def emit_report(
    report: ExperimentReport,
    fmt: ReportFormat,
    out_dir: Union[str, Path],
) -> list[Path]:
    """
    Write a report to out_dir.

    Text writes report.txt (plus metadata.json when metadata is present);
    Csv writes folds_v1.csv and summary_v1.csv, and sweep_v1.csv when the
    report holds sweep points.

    Returns:
        Paths written
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    if fmt == ReportFormat.TEXT:
        path = out_dir / "report.txt"
        path.write_text(render_text(report))
        written.append(path)
    else:
        fold_rows = [
            [r.dataset, r.method, metric, fold, _f(score)]
            for r in report.results
            for metric, scores in r.scores.items()
            for fold, score in enumerate(scores)
        ]
        written.append(_write_csv(out_dir / FOLDS_FILE, FOLD_COLUMNS, fold_rows))

        summary_rows = [
            [
                row.dataset, row.method, row.metric, _f(row.mean), _f(row.std),
                row.verdict, _f(row.test.t_statistic) if row.test else "",
            ]
            for row in report.summary()
        ]
        written.append(_write_csv(out_dir / SUMMARY_FILE, SUMMARY_COLUMNS, summary_rows))

        if report.sweep:
            sweep_rows = []
            for p in report.sweep:
                std = float(np.std(p.scores, ddof=1)) if len(p.scores) > 1 else 0.0
                sweep_rows.append(
                    [p.dataset, p.method, _f(p.epsilon), _f(np.mean(p.scores)), _f(std), len(p.scores)]
                )
            written.append(_write_csv(out_dir / SWEEP_FILE, SWEEP_COLUMNS, sweep_rows))

    if report.metadata:
        path = out_dir / "metadata.json"
        path.write_text(json.dumps(report.metadata, indent=2, sort_keys=True) + "\n")
        written.append(path)

    for path in written:
        logger.info("Wrote %s", path)
    return written


def read_fold_csv(path: Union[str, Path]) -> list[CrossValResult]:
    """Rebuild per-fold results from a folds_v1.csv file."""
    grouped: dict[tuple[str, str], dict[str, list[tuple[int, float]]]] = {}
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != FOLD_COLUMNS:
            raise MetricError(f"{path}: not a folds_v1 file (header {header})")
        for row in reader:
            dataset, method, metric, fold, score = row
            grouped.setdefault((dataset, method), {}).setdefault(metric, []).append(
                (int(fold), float(score))
            )

    results = []
    for (dataset, method), metrics in grouped.items():
        scores = {m: [s for _, s in sorted(pairs)] for m, pairs in metrics.items()}
        k = len(next(iter(scores.values())))
        results.append(CrossValResult(dataset=dataset, method=method, k=k, seed=0, scores=scores))
    return results
