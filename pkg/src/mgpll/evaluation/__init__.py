# Metrics, cross-validation, significance testing, reports
from .metrics import Metric, MetricKind, accuracy, class_ages, mae_within
from .significance import T_CRITICAL_05, TTestResult, Verdict, paired_t_test, t_critical
from .crossval import CrossValResult, MgpllMethod, PlKnnMethod, cross_validate, fold_seed
from .report import (
    PUBLISHED_ABLATION,
    PUBLISHED_RESULTS,
    ExperimentReport,
    ReportFormat,
    SweepPoint,
    emit_report,
    published_results,
    read_fold_csv,
    render_text,
    source_hash,
)

__all__ = [
    "Metric",
    "MetricKind",
    "accuracy",
    "class_ages",
    "mae_within",
    "T_CRITICAL_05",
    "TTestResult",
    "Verdict",
    "paired_t_test",
    "t_critical",
    "CrossValResult",
    "MgpllMethod",
    "PlKnnMethod",
    "cross_validate",
    "fold_seed",
    "PUBLISHED_ABLATION",
    "PUBLISHED_RESULTS",
    "ExperimentReport",
    "ReportFormat",
    "SweepPoint",
    "emit_report",
    "published_results",
    "read_fold_csv",
    "render_text",
    "source_hash",
]
