import csv

import numpy as np
import pytest

from run_mgpll import main
from src.mgpll.config import ENV_CONFIG, config_defaults, parse_bool, read_config_file
from src.mgpll.errors import ConfigError
from src.mgpll.model import load_checkpoint
from src.mgpll.pldata import load_dataset, write_dataset

from toydata import three_class

TINY = [
    "--epochs", "2", "--batch-size", "8", "--noise-dim", "2",
    "--generator-width", "4", "--predictor-width", "4", "--critic-width", "4",
]


def _write_clean_csv(path, n, n_classes):
    rng = np.random.default_rng(0)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        for i in range(n):
            label = i % n_classes
            writer.writerow([repr(float(v)) for v in rng.normal(label, 0.3, size=2)] + [f"c{label}"])
    return path


@pytest.fixture
def clean_csv(tmp_path):
    return _write_clean_csv(tmp_path / "clean.csv", 30, 3)


@pytest.fixture
def pl_file(tmp_path):
    return write_dataset(three_class(), tmp_path / "three.plcsv")


def _rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


# ==================== Exit codes ====================

def test_no_command_prints_help(capsys):
    assert main([]) == 2
    assert "synth" in capsys.readouterr().out


def test_bad_flag_is_an_argparse_error():
    with pytest.raises(SystemExit) as excinfo:
        main(["train", "x.plcsv", "--variant", "nope"])
    assert excinfo.value.code == 2


def test_missing_dataset_reports_category(tmp_path, capsys):
    assert main(["train", str(tmp_path / "missing.plcsv")]) == 2
    assert "error[dataset]" in capsys.readouterr().err


def test_malformed_dataset_reports_line(tmp_path, capsys):
    path = tmp_path / "bad.plcsv"
    path.write_text("2 2 2\n0.1,0.2 | 0\n0.3 | 1\n")
    assert main(["eval", str(path), "--methods", "pl-knn"]) == 2
    err = capsys.readouterr().err
    assert "error[dataset_format]" in err
    assert "bad.plcsv:3" in err


def test_eval_needs_ground_truth(tmp_path, capsys):
    path = tmp_path / "unlabeled.plcsv"
    path.write_text("4 1 2\n0.1 | 0\n0.2 | 1\n0.3 | 0,1\n0.4 | 1\n")
    assert main(["eval", str(path), "--methods", "pl-knn", "--folds", "2"]) == 2
    assert "error[dataset]" in capsys.readouterr().err


# ==================== Subcommands ====================

def test_synth_random(tmp_path, clean_csv, capsys):
    out = tmp_path / "noisy.plcsv"
    assert main(["synth", str(clean_csv), "-o", str(out), "--p", "0.5", "--r", "1"]) == 0
    ds = load_dataset(out)
    assert ds.n_instances == 30
    assert np.count_nonzero(ds.candidate_counts == 2) == 15
    assert ds.class_names == ("c0", "c1", "c2")
    assert "Seed: 0" in capsys.readouterr().out


def test_synth_standard_settings(tmp_path):
    clean = _write_clean_csv(tmp_path / "four.csv", 40, 4)
    out = tmp_path / "standard"
    assert main(["synth", str(clean), "--standard", "-o", str(out)]) == 0
    assert len(list(out.glob("*.plcsv"))) == 28


def test_train_writes_checkpoint_and_log(tmp_path, pl_file):
    ckpt = tmp_path / "model.npz"
    log = tmp_path / "log.csv"
    args = ["train", str(pl_file), "--checkpoint", str(ckpt), "--log", str(log), "--seed", "3"] + TINY
    assert main(args) == 0

    loaded = load_checkpoint(ckpt)
    assert loaded.model.n_classes == 3
    assert loaded.model.scaler is not None
    assert loaded.extra["seed"] == 3
    assert loaded.restore_rng() is not None
    assert len(_rows(log)) == 2

    first = log.read_bytes()
    assert main(args) == 0
    assert log.read_bytes() == first


def test_train_with_search(tmp_path, pl_file, capsys):
    args = ["train", str(pl_file), "--search", "--grid", "0.1,1"] + TINY
    assert main(args) == 0
    assert "Selected alpha=" in capsys.readouterr().out


def test_eval_reports_are_reproducible(tmp_path, pl_file):
    def run(out):
        return main([
            "eval", str(pl_file), "--methods", "mgpll", "pl-knn", "--folds", "3",
            "--knn-k", "3", "-o", str(out), "--format", "both",
        ] + TINY)

    assert run(tmp_path / "a") == 0
    assert run(tmp_path / "b") == 0
    for name in ("folds_v1.csv", "summary_v1.csv", "report.txt", "metadata.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    rows = _rows(tmp_path / "a" / "folds_v1.csv")
    assert len(rows) == 2 * 3
    summary = _rows(tmp_path / "a" / "summary_v1.csv")
    assert [r["method"] for r in summary] == ["mgpll", "pl-knn"]
    assert summary[1]["verdict"] in ("win", "tie", "loss")


def test_eval_and_ablate_search_per_fold(tmp_path, pl_file, monkeypatch):
    import json

    from src.mgpll.training import search

    grids = []

    def fake_train(dataset, variant, cfg, mcfg):
        grids.append((variant.value, mcfg.alpha))

        class Log:
            final_l_c = mcfg.alpha + mcfg.beta + mcfg.gamma

        return None, Log()

    monkeypatch.setattr(search, "train", fake_train)
    out = tmp_path / "eval"
    assert main([
        "eval", str(pl_file), "--methods", "mgpll", "--folds", "2", "--search", "--grid", "0.1,1",
        "-o", str(out), "--format", "csv",
    ] + TINY) == 0
    assert len(grids) == 2 * 4
    metadata = json.loads((out / "metadata.json").read_text())
    assert metadata["search"] == {"grid": [0.1, 1.0], "strategy": "coordinate"}

    grids.clear()
    assert main([
        "ablate", str(pl_file), "--variants", "cls", "--folds", "2", "--search", "--grid", "0.1,1",
    ] + TINY) == 0
    assert {v for v, _ in grids} == {"cls"}
    assert len(grids) == 2 * 4


def test_eval_with_mae_metrics(tmp_path):
    rng = np.random.default_rng(2)
    labels = np.arange(24) % 3
    from src.mgpll.pldata import from_labels
    ds = from_labels(rng.normal(labels[:, None], 0.2, size=(24, 2)), labels, class_names=("10", "12", "20"))
    path = write_dataset(ds, tmp_path / "ages.plcsv")
    assert main([
        "eval", str(path), "--methods", "pl-knn", "--folds", "2", "--metrics", "accuracy", "mae3",
        "-o", str(tmp_path / "out"), "--format", "csv",
    ]) == 0
    metrics = {r["metric"] for r in _rows(tmp_path / "out" / "summary_v1.csv")}
    assert metrics == {"accuracy", "mae3"}


def test_ablate(tmp_path, pl_file):
    out = tmp_path / "ablation"
    assert main([
        "ablate", str(pl_file), "--variants", "full", "cls", "--folds", "2",
        "-o", str(out), "--format", "csv",
    ] + TINY) == 0
    methods = [r["method"] for r in _rows(out / "summary_v1.csv")]
    assert methods == ["mgpll", "mgpll-cls"]


def test_sweep(tmp_path, clean_csv):
    out = tmp_path / "sweep"
    assert main([
        "sweep", str(clean_csv), "--epsilons", "0.3,0.6", "--methods", "pl-knn",
        "--folds", "2", "--knn-k", "3", "-o", str(out), "--format", "csv",
    ]) == 0
    rows = _rows(out / "sweep_v1.csv")
    assert [r["epsilon"] for r in rows] == ["0.3", "0.6"]
    assert all(r["method"] == "pl-knn" and r["folds"] == "2" for r in rows)


# ==================== Config files ====================

def test_config_file_sets_defaults_and_flags_win(tmp_path, pl_file):
    config = tmp_path / "run.cfg"
    config.write_text(
        "# tiny run\n"
        "epochs = 1\n"
        "batch-size = 8\n"
        "noise_dim = 2\n"
        "generator-width = 4\n"
        "predictor-width = 4\n"
        "critic-width = 4\n"
    )
    log = tmp_path / "log.csv"
    assert main(["train", str(pl_file), "--config", str(config), "--log", str(log)]) == 0
    assert len(_rows(log)) == 1

    assert main(["train", str(pl_file), "--config", str(config), "--log", str(log), "--epochs", "2"]) == 0
    assert len(_rows(log)) == 2


def test_config_file_from_environment(tmp_path, pl_file, monkeypatch, capsys):
    config = tmp_path / "env.cfg"
    config.write_text("seed = 9\nfolds = 2\nmethods = pl-knn\nknn-k = 3\n")
    monkeypatch.setenv(ENV_CONFIG, str(config))
    assert main(["eval", str(pl_file)]) == 0
    assert "Seed: 9" in capsys.readouterr().out


def test_unknown_config_key(tmp_path, pl_file, capsys):
    config = tmp_path / "bad.cfg"
    config.write_text("epochs = 1\nlearning-rate = 0.1\n")
    assert main(["train", str(pl_file), "--config", str(config)]) == 2
    err = capsys.readouterr().err
    assert "error[config]" in err
    assert "bad.cfg:2" in err


def test_config_value_coercion(tmp_path):
    import argparse

    parser = argparse.ArgumentParser()
    parser.add_argument("--epochs", type=int, default=5)
    parser.add_argument("--progress", action="store_true")
    parser.add_argument("--metrics", nargs="+", default=["accuracy"])
    parser.add_argument("--format", choices=["text", "csv"], default="text")

    config = tmp_path / "c.cfg"
    config.write_text("epochs = 7\nprogress = yes\nmetrics = accuracy, mae3\nformat = csv  # trailing comment\n")
    assert config_defaults(parser, config) == {
        "epochs": 7, "progress": True, "metrics": ["accuracy", "mae3"], "format": "csv",
    }

    config.write_text("format = pdf\n")
    with pytest.raises(ConfigError):
        config_defaults(parser, config)
    config.write_text("epochs = many\n")
    with pytest.raises(ConfigError):
        config_defaults(parser, config)


def test_config_file_syntax(tmp_path):
    path = tmp_path / "syntax.cfg"
    path.write_text("epochs 3\n")
    with pytest.raises(ConfigError):
        read_config_file(path)
    with pytest.raises(ConfigError):
        read_config_file(tmp_path / "missing.cfg")
    assert parse_bool("Off") is False
    with pytest.raises(ConfigError):
        parse_bool("maybe")
