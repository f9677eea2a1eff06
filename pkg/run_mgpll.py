#!/usr/bin/env python3
"""
Command-line harness for partial-label experiments.

Subcommands:
    synth   clean dataset + noise settings -> PL dataset file(s)
    train   PL dataset + variant -> checkpoint + training log CSV
    eval    PL dataset(s) + methods -> cross-validation report
    ablate  PL dataset(s) -> report over the ablation variants
    sweep   clean dataset + co-occurrence probabilities -> accuracy-vs-epsilon CSV

Every flag can also be given in a key-value config file (--config, or the
MGPLL_CONFIG environment variable); explicit flags win over the file.

Usage:
    python run_mgpll.py synth data/ecoli.csv -o data/ecoli-coupled.plcsv --mode coupled --epsilon 0.7
    python run_mgpll.py train data/ecoli-coupled.plcsv --variant full --checkpoint out/model.npz
    python run_mgpll.py eval data/lost.plcsv --methods mgpll pl-knn -o out/lost
    python run_mgpll.py ablate data/lost.plcsv -o out/ablation
    python run_mgpll.py sweep data/ecoli.csv --epsilons 0.1,0.3,0.5,0.7 -o out/sweep
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional

from src.mgpll.baseline import Weighting
from src.mgpll.config import config_defaults, resolve_config_path
from src.mgpll.errors import DatasetError, MgpllError
from src.mgpll.evaluation import (
    CrossValResult,
    ExperimentReport,
    Metric,
    MgpllMethod,
    PlKnnMethod,
    ReportFormat,
    SweepPoint,
    cross_validate,
    emit_report,
    render_text,
)
from src.mgpll.model import MgpllConfig, save_checkpoint
from src.mgpll.pldata import (
    Coupling,
    DatasetFormat,
    FeatureScaler,
    PLDataset,
    SynthConfig,
    load_dataset,
    load_labeled_csv,
    standard_configurations,
    synthesize,
    write_dataset,
)
from src.mgpll.training import (
    AblationVariant,
    SearchConfig,
    SearchStrategy,
    TrainConfig,
    select_hyperparameters,
    train,
)

logger = logging.getLogger("mgpll")

METHOD_CHOICES = ("mgpll", "pl-knn")


def _float_list(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part.strip()]


def load_any(path: Path, label_column: int = -1, has_header: bool = False) -> PLDataset:
    """Load a PL dataset file, or a clean labeled .csv as a clean PL dataset."""
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"dataset not found: {path}")
    if path.suffix.lower() == ".csv":
        return load_labeled_csv(path, label_column=label_column, has_header=has_header)
    return load_dataset(path)


# ==================== Argument parsing ====================

def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=str, default=None,
                        help="Key-value config file (or set MGPLL_CONFIG)")
    parser.add_argument("--seed", type=int, default=0, help="Random seed (default: 0)")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log progress at INFO level")
    parser.add_argument("--debug", action="store_true", help="Log every iteration at DEBUG level")


def _add_training(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("training")
    group.add_argument("--epochs", type=int, default=200, help="Training epochs (default: 200)")
    group.add_argument("--batch-size", type=int, default=32, help="Minibatch size m (default: 32)")
    group.add_argument("--generator-lr", type=float, default=5e-5, help="RMSProp rate for G_n, G_x, F")
    group.add_argument("--critic-lr", type=float, default=5e-5, help="RMSProp rate for D_n, D_x")
    group.add_argument("--critic-steps", type=int, default=1, help="Critic updates per iteration")
    group.add_argument("--patience", type=int, default=20,
                       help="Early-stop window in epochs, 0 disables (default: 20)")
    group.add_argument("--alpha", type=float, default=1.0, help="Feature-level adversarial weight")
    group.add_argument("--beta", type=float, default=1.0, help="Generation loss weight")
    group.add_argument("--gamma", type=float, default=1.0, help="Auxiliary classification weight")
    group.add_argument("--clip-c", type=float, default=0.01, help="Critic clip bound (default: 0.01)")
    group.add_argument("--noise-dim", type=int, default=16, help="Generator noise dimension")
    group.add_argument("--unconditioned-noise", action="store_true",
                       help="Noise-label generator ignores the label input")
    group.add_argument("--generator-width", type=int, default=128)
    group.add_argument("--predictor-width", type=int, default=128)
    group.add_argument("--critic-width", type=int, default=64)
    group.add_argument("--progress", action="store_true", help="Show progress bars")


def _add_search(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("hyperparameter search")
    group.add_argument("--search", action="store_true",
                       help="Select alpha, beta, gamma by final training L_c first")
    group.add_argument("--grid", type=_float_list, default=None,
                       help="Comma-separated grid (default: 0.001,0.01,0.1,1,10)")
    group.add_argument("--strategy", choices=[s.value for s in SearchStrategy], default="coordinate")


def _add_cv(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("cross-validation")
    group.add_argument("--folds", type=int, default=10, help="Number of folds (default: 10)")
    group.add_argument("--metrics", nargs="+", default=["accuracy"],
                       help="accuracy and/or maeN, e.g. mae3 mae5")
    group.add_argument("--knn-k", type=int, default=10, help="PL-KNN neighbors (default: 10)")
    group.add_argument("--knn-weighting", choices=[w.value for w in Weighting],
                       default=Weighting.INVERSE_DISTANCE.value)
    group.add_argument("-w", "--workers", type=int, default=1, help="Parallel folds / grid points")
    group.add_argument("-o", "--output", type=Path, default=None, help="Output directory")
    group.add_argument("--format", choices=["text", "csv", "both"], default="both")


def _add_clean_input(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--label-column", type=int, default=-1,
                        help="Label column of a clean .csv input (default: last)")
    parser.add_argument("--header", action="store_true", help="Clean .csv input has a header row")


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(description="Multi-level adversarial partial-label learning")
    sub = parser.add_subparsers(dest="command")
    subparsers = {}

    p = sub.add_parser("synth", help="Corrupt a clean dataset into a PL dataset")
    p.add_argument("input", type=Path, help="Clean dataset (.csv with label column, or PL file)")
    p.add_argument("-o", "--output", type=Path, default=None,
                   help="Output file, or directory with --standard")
    p.add_argument("--mode", choices=["random", "coupled"], default="random")
    p.add_argument("--p", type=float, default=1.0, help="Proportion of corrupted instances (random)")
    p.add_argument("--r", type=int, default=1, help="False-positive labels per instance (random)")
    p.add_argument("--epsilon", type=float, default=0.0, help="Coupled-label probability (coupled)")
    p.add_argument("--coupling", choices=[c.value for c in Coupling], default=Coupling.NEXT.value)
    p.add_argument("--standard", action="store_true",
                   help="Write all 28 standard configurations into the output directory")
    p.add_argument("--format", choices=["plcsv", "plsparse"], default="plcsv")
    _add_clean_input(p)
    _add_common(p)
    subparsers["synth"] = p

    p = sub.add_parser("train", help="Train one model and save a checkpoint")
    p.add_argument("dataset", type=Path, help="PL dataset file")
    p.add_argument("--variant", choices=[v.value for v in AblationVariant], default="full")
    p.add_argument("--checkpoint", type=Path, default=None, help="Checkpoint output (.npz)")
    p.add_argument("--log", type=Path, default=None, help="Training log CSV output")
    p.add_argument("--wall-time", action="store_true", help="Include wall time in the log CSV")
    p.add_argument("-w", "--workers", type=int, default=1, help="Parallel grid points with --strategy full")
    _add_training(p)
    _add_search(p)
    _add_common(p)
    subparsers["train"] = p

    p = sub.add_parser("eval", help="Cross-validate methods and report")
    p.add_argument("datasets", type=Path, nargs="+", help="PL dataset files")
    p.add_argument("--methods", nargs="+", choices=METHOD_CHOICES, default=list(METHOD_CHOICES))
    p.add_argument("--variant", choices=[v.value for v in AblationVariant], default="full")
    _add_cv(p)
    _add_training(p)
    _add_search(p)
    _add_common(p)
    subparsers["eval"] = p

    p = sub.add_parser("ablate", help="Cross-validate the ablation variants")
    p.add_argument("datasets", type=Path, nargs="+", help="PL dataset files")
    p.add_argument("--variants", nargs="+", choices=[v.value for v in AblationVariant],
                   default=[v.value for v in AblationVariant])
    _add_cv(p)
    _add_training(p)
    _add_search(p)
    _add_common(p)
    subparsers["ablate"] = p

    p = sub.add_parser("sweep", help="Accuracy versus coupled-label probability")
    p.add_argument("dataset", type=Path, help="Clean dataset (.csv with label column, or PL file)")
    p.add_argument("--epsilons", type=_float_list, default=[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7],
                   help="Comma-separated co-occurrence probabilities")
    p.add_argument("--methods", nargs="+", choices=METHOD_CHOICES, default=list(METHOD_CHOICES))
    p.add_argument("--variant", choices=[v.value for v in AblationVariant], default="full")
    _add_clean_input(p)
    _add_cv(p)
    _add_training(p)
    _add_search(p)
    _add_common(p)
    subparsers["sweep"] = p

    return parser, subparsers


# ==================== Config objects from flags ====================

def train_config(args) -> TrainConfig:
    return TrainConfig(
        batch_size=args.batch_size,
        epochs=args.epochs,
        generator_lr=args.generator_lr,
        critic_lr=args.critic_lr,
        critic_steps=args.critic_steps,
        early_stop_patience=args.patience,
        seed=args.seed,
    )


def model_config(args) -> MgpllConfig:
    return MgpllConfig(
        alpha=args.alpha,
        beta=args.beta,
        gamma=args.gamma,
        clip_c=args.clip_c,
        noise_dim=args.noise_dim,
        label_conditioned_noise=not args.unconditioned_noise,
        generator_width=args.generator_width,
        predictor_width=args.predictor_width,
        critic_width=args.critic_width,
    )


def _search_config(args, workers: int = 1) -> Optional[SearchConfig]:
    """Search settings from flags, or None without --search."""
    if not args.search:
        return None
    return SearchConfig(
        grid=tuple(args.grid) if args.grid else SearchConfig().grid,
        strategy=SearchStrategy(args.strategy),
        workers=workers,
    )


def _methods(args, names: list[str], variant: AblationVariant):
    methods = []
    for name in names:
        if name == "mgpll":
            methods.append(MgpllMethod(variant, train_config(args), model_config(args), _search_config(args)))
        else:
            methods.append(PlKnnMethod(k=args.knn_k, weighting=Weighting(args.knn_weighting)))
    return methods


def _progress(label: str, current: int, total: int) -> None:
    logger.info("%s %d/%d", label, current, total)


def _write_report(report: ExperimentReport, args) -> None:
    print()
    print(render_text(report))
    if args.output is None:
        return
    formats = {"text": [ReportFormat.TEXT], "csv": [ReportFormat.CSV],
               "both": [ReportFormat.TEXT, ReportFormat.CSV]}[args.format]
    for fmt in formats:
        for path in emit_report(report, fmt, args.output):
            print(f"Wrote: {path}")


def _cross_validate_all(report: ExperimentReport, ds: PLDataset, methods, metrics, args) -> list[CrossValResult]:
    results = []
    for method in methods:
        print(f"  {method.name}: {args.folds}-fold cross-validation")
        result = cross_validate(
            ds, method, k=args.folds, seed=args.seed, metrics=metrics,
            workers=args.workers, progress_callback=_progress,
        )
        for metric in result.scores:
            print(f"    {metric}: {result.mean(metric):.3f} +- {result.std(metric):.3f}")
        report.add(result)
        results.append(result)
    return results


# ==================== Subcommands ====================

def cmd_synth(args) -> None:
    clean = load_any(args.input, args.label_column, args.header)
    fmt = DatasetFormat(args.format)
    suffix = f".{fmt.value}"

    print("Synthesizing PL datasets")
    print("=" * 40)
    print(f"Input:   {args.input} (n={clean.n_instances}, d={clean.n_features}, L={clean.n_classes})")

    if args.standard:
        out_dir = args.output or Path("synthetic")
        configs = standard_configurations(args.seed)
        for cfg in configs:
            ds = synthesize(clean, cfg)
            path = write_dataset(ds, out_dir / f"{ds.name}{suffix}", fmt)
            print(f"  {cfg.tag():<24} mean candidates {ds.mean_candidates:.3f} -> {path}")
        print(f"\nWrote {len(configs)} datasets to {out_dir}")
        return

    if args.mode == "coupled":
        cfg = SynthConfig.coupled(args.epsilon, seed=args.seed, coupling=Coupling(args.coupling))
    else:
        cfg = SynthConfig.random(args.p, args.r, seed=args.seed)
    ds = synthesize(clean, cfg)
    output = args.output or Path(f"{ds.name}{suffix}")
    write_dataset(ds, output, fmt)
    print(f"Setting: {cfg.tag()}")
    print(f"Mean candidates per instance: {ds.mean_candidates:.3f}")
    print(f"Wrote:   {output}")


def cmd_train(args) -> None:
    ds = load_any(args.dataset)
    scaler = FeatureScaler.fit(ds.features)
    ds_norm = ds.with_features(scaler.transform(ds.features))
    variant = AblationVariant(args.variant)
    cfg = train_config(args)
    mcfg = model_config(args)

    print("MGPLL training")
    print("=" * 40)
    print(f"Dataset: {ds.name} (n={ds.n_instances}, d={ds.n_features}, L={ds.n_classes})")
    print(f"Variant: {variant.value}")

    if args.search:
        search = _search_config(args, workers=args.workers)
        print(f"Searching alpha, beta, gamma ({search.strategy.value}) over {list(search.grid)}")
        result = select_hyperparameters(ds_norm, cfg, search, mcfg, variant, _progress)
        alpha, beta, gamma = result.best
        mcfg = mcfg.replace(alpha=alpha, beta=beta, gamma=gamma)
        print(f"Selected alpha={alpha:g} beta={beta:g} gamma={gamma:g} ({result.trainings} trainings)")

    model, log = train(ds_norm, variant, cfg, mcfg, scaler=scaler, progress=args.progress,
                       progress_callback=_progress)
    last = log.records[-1]
    print(f"Epochs:  {log.epochs_run}{' (early stop)' if log.stopped_early else ''}")
    print(f"Final:   l_c={last.l_c:.6g} total={last.total:.6g}")
    if last.train_accuracy is not None:
        print(f"Training accuracy: {last.train_accuracy:.4f}")

    if args.checkpoint:
        save_checkpoint(model, args.checkpoint, log.rng_state,
                        extra={"variant": variant.value, "seed": cfg.seed, "dataset": ds.name})
        log.checkpoint = str(args.checkpoint)
        print(f"Checkpoint: {args.checkpoint}")
    if args.log:
        log.write_csv(args.log, include_wall_time=args.wall_time)
        print(f"Log:        {args.log}")


def _metrics(args) -> list[Metric]:
    return [Metric.parse(m) for m in args.metrics]


def _report(args) -> ExperimentReport:
    report = ExperimentReport(metadata={
        "seed": args.seed,
        "folds": args.folds,
        "train_config": train_config(args).to_dict(),
        "model_config": model_config(args).to_dict(),
    })
    search = _search_config(args)
    if search is not None:
        report.metadata["search"] = {"grid": list(search.grid), "strategy": search.strategy.value}
    return report


def cmd_eval(args) -> None:
    variant = AblationVariant(args.variant)
    methods = _methods(args, args.methods, variant)
    report = _report(args)
    report.reference = methods[0].name if len(methods) > 1 else None
    metrics = _metrics(args)

    print("Cross-validation")
    print("=" * 40)
    for path in args.datasets:
        ds = load_any(path)
        report.add_input_file(path)
        print(f"{ds.name} (n={ds.n_instances}, L={ds.n_classes})")
        _cross_validate_all(report, ds, methods, metrics, args)
    _write_report(report, args)


def cmd_ablate(args) -> None:
    variants = [AblationVariant(v) for v in args.variants]
    methods = [MgpllMethod(v, train_config(args), model_config(args), _search_config(args)) for v in variants]
    report = _report(args)
    report.reference = methods[0].name if len(methods) > 1 else None
    metrics = _metrics(args)

    print("Ablation study")
    print("=" * 40)
    for path in args.datasets:
        ds = load_any(path)
        report.add_input_file(path)
        print(f"{ds.name} (n={ds.n_instances}, L={ds.n_classes})")
        _cross_validate_all(report, ds, methods, metrics, args)
    _write_report(report, args)


def cmd_sweep(args) -> None:
    clean = load_any(args.dataset, args.label_column, args.header)
    methods = _methods(args, args.methods, AblationVariant(args.variant))
    report = _report(args)
    report.add_input_file(args.dataset)
    report.metadata["epsilons"] = list(args.epsilons)
    metric = Metric.accuracy()

    print("Coupled-label sweep")
    print("=" * 40)
    print(f"{clean.name} (n={clean.n_instances}, L={clean.n_classes})")
    for eps in args.epsilons:
        ds = synthesize(clean, SynthConfig.coupled(eps, seed=args.seed))
        for method in methods:
            result = cross_validate(ds, method, k=args.folds, seed=args.seed,
                                    metrics=[metric], workers=args.workers,
                                    progress_callback=_progress)
            scores = result.fold_scores(metric.name)
            report.sweep.append(SweepPoint(clean.name, method.name, eps, scores))
            print(f"  eps={eps:g} {method.name}: {result.mean():.3f} +- {result.std():.3f}")
    _write_report(report, args)


COMMANDS = {
    "synth": cmd_synth,
    "train": cmd_train,
    "eval": cmd_eval,
    "ablate": cmd_ablate,
    "sweep": cmd_sweep,
}


def _configure_logging(args) -> None:
    level = logging.WARNING
    if getattr(args, "debug", False):
        level = logging.DEBUG
    elif getattr(args, "verbose", False):
        level = logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[list[str]] = None) -> int:
    parser, subparsers = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help()
            return 2

        config_path = resolve_config_path(args.config)
        if config_path is not None:
            subparser = subparsers[args.command]
            subparser.set_defaults(**config_defaults(subparser, config_path))
            args = parser.parse_args(argv)

        _configure_logging(args)
        print(f"Seed: {args.seed}")
        COMMANDS[args.command](args)
        return 0
    except MgpllError as e:
        print(f"error[{e.category}]: {e}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        print("\nInterrupted", file=sys.stderr)
        return 130
    except Exception as e:
        print(f"error[internal]: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
