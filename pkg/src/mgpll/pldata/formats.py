"""
On-disk formats for partial-label datasets.

PlCsv (``.plcsv``)::

    # comment lines start with '#'
    n d L
    @classes name_0,name_1,...        (optional)
    f_1,...,f_d | c_1,...,c_m | t     (one line per instance, t optional)

PlSparse (``.plsparse``) is identical except the feature field holds
whitespace-separated ``index:value`` pairs with 0-based indices; omitted
features are zero.

MAT (``.mat``) follows the layout the public PL benchmarks ship in:
``data`` (n x d), ``partial_target`` (L x n, often sparse) and optionally
``target`` (L x n).

Parsing is locale-independent; floats are written with repr() so a
write/load cycle is bit-exact.
"""

import csv
import math
from enum import Enum
from pathlib import Path
from typing import Optional, Union

import numpy as np

from ..errors import DatasetError, DatasetFormatError
from .dataset import PLDataset, from_labels


class DatasetFormat(Enum):
    """Supported dataset file formats."""
    PLCSV = "plcsv"
    PLSPARSE = "plsparse"
    MAT = "mat"


SUFFIX_MAP = {
    ".plcsv": DatasetFormat.PLCSV,
    ".plsparse": DatasetFormat.PLSPARSE,
    ".mat": DatasetFormat.MAT,
}

CLASSES_DIRECTIVE = "@classes"


def infer_format(path: Path) -> DatasetFormat:
    """Pick a format from the file suffix."""
    fmt = SUFFIX_MAP.get(Path(path).suffix.lower())
    if fmt is None:
        raise DatasetFormatError(
            path, None, f"cannot infer format from suffix {Path(path).suffix!r}; "
            f"expected one of {', '.join(SUFFIX_MAP)}"
        )
    return fmt


def load_dataset(
    path: Union[str, Path],
    fmt: Optional[DatasetFormat] = None,
    name: Optional[str] = None,
) -> PLDataset:
    """
    Load a PL dataset from disk.

    Args:
        path: File path
        fmt: File format (inferred from the suffix when None)
        name: Dataset name (defaults to the file stem)

    Returns:
        PLDataset whose n, d, L match the file header

    Raises:
        DatasetFormatError: Malformed header, bad row, dimension mismatch
            (reported with the 1-based line number)
        FileNotFoundError: If the file does not exist
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Dataset not found: {path}")
    fmt = fmt or infer_format(path)
    name = name or path.stem

    if fmt == DatasetFormat.MAT:
        return _load_mat(path, name)
    return _load_text(path, fmt, name)


def _parse_float(token: str, path: Path, line_no: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise DatasetFormatError(path, line_no, f"not a number: {token.strip()!r}")
    if not math.isfinite(value):
        raise DatasetFormatError(path, line_no, f"non-finite feature value {token.strip()!r}")
    return value


def _parse_int(token: str, path: Path, line_no: int, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise DatasetFormatError(path, line_no, f"{what} is not an integer: {token.strip()!r}")


def _load_text(path: Path, fmt: DatasetFormat, name: str) -> PLDataset:
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().split("\n")

    header = None
    class_names: tuple[str, ...] = ()
    features: list[list[float]] = []
    candidates: list[list[int]] = []
    truths: list[Optional[int]] = []
    truth_lines: list[int] = []

    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue

        if header is None:
            parts = line.split()
            if len(parts) != 3:
                raise DatasetFormatError(path, line_no, f"header must be 'n d L', got {line!r}")
            n, d, n_classes = (_parse_int(p, path, line_no, "header field") for p in parts)
            if n < 1 or d < 1 or n_classes < 1:
                raise DatasetFormatError(path, line_no, f"header values must be positive: {line!r}")
            header = (n, d, n_classes)
            continue

        n, d, n_classes = header
        if line.startswith(CLASSES_DIRECTIVE):
            names = [c.strip() for c in line[len(CLASSES_DIRECTIVE):].split(",")]
            if len(names) != n_classes:
                raise DatasetFormatError(
                    path, line_no, f"{len(names)} class names for {n_classes} classes"
                )
            class_names = tuple(names)
            continue

        fields = line.split("|")
        if len(fields) not in (2, 3):
            raise DatasetFormatError(
                path, line_no, "instance line must be 'features | candidates [| true label]'"
            )

        if fmt == DatasetFormat.PLCSV:
            tokens = [t for t in fields[0].split(",")]
            if len(tokens) != d:
                raise DatasetFormatError(path, line_no, f"expected {d} features, got {len(tokens)}")
            row = [_parse_float(t, path, line_no) for t in tokens]
        else:
            row = [0.0] * d
            for pair in fields[0].split():
                idx_str, sep, val_str = pair.partition(":")
                if not sep:
                    raise DatasetFormatError(path, line_no, f"sparse feature must be 'index:value', got {pair!r}")
                idx = _parse_int(idx_str, path, line_no, "feature index")
                if not 0 <= idx < d:
                    raise DatasetFormatError(path, line_no, f"feature index {idx} outside [0, {d})")
                row[idx] = _parse_float(val_str, path, line_no)

        cand_tokens = [t for t in fields[1].split(",") if t.strip()]
        if not cand_tokens:
            raise DatasetFormatError(path, line_no, f"instance {len(features)} has an empty candidate set")
        cands = [_parse_int(t, path, line_no, "candidate label") for t in cand_tokens]
        for c in cands:
            if not 0 <= c < n_classes:
                raise DatasetFormatError(path, line_no, f"candidate label {c} outside [0, {n_classes})")

        truth = None
        if len(fields) == 3 and fields[2].strip():
            truth = _parse_int(fields[2].strip(), path, line_no, "true label")
            if truth not in cands:
                raise DatasetFormatError(path, line_no, f"true label {truth} is not among the candidates")

        features.append(row)
        candidates.append(cands)
        truths.append(truth)
        truth_lines.append(line_no)

    if header is None:
        raise DatasetFormatError(path, None, "missing 'n d L' header")
    n, d, n_classes = header
    if len(features) != n:
        raise DatasetFormatError(path, None, f"header declares {n} instances, found {len(features)}")

    known = [t is not None for t in truths]
    if any(known) and not all(known):
        first = truth_lines[known.index(False)]
        raise DatasetFormatError(path, first, "true labels must be given for all instances or none")

    cand_matrix = np.zeros((n, n_classes))
    for i, cands in enumerate(candidates):
        cand_matrix[i, cands] = 1.0

    return PLDataset(
        features=np.array(features, dtype=np.float64).reshape(n, d),
        candidates=cand_matrix,
        true_labels=np.array(truths, dtype=np.int64) if all(known) else None,
        class_names=class_names,
        name=name,
    )


def _dense(matrix) -> np.ndarray:
    if hasattr(matrix, "toarray"):
        matrix = matrix.toarray()
    return np.asarray(matrix, dtype=np.float64)


def _load_mat(path: Path, name: str) -> PLDataset:
    from scipy.io import loadmat

    try:
        mat = loadmat(str(path))
    except (ValueError, OSError, NotImplementedError) as e:
        raise DatasetFormatError(path, None, f"unreadable MAT file: {e}")

    for key in ("data", "partial_target"):
        if key not in mat:
            raise DatasetFormatError(path, None, f"MAT file has no '{key}' variable")

    features = _dense(mat["data"])
    n = features.shape[0]
    partial = _dense(mat["partial_target"])
    # Stored as L x n; transpose unless already n x L
    if partial.shape[1] == n and partial.shape[0] != n or partial.shape == (n, n):
        partial = partial.T
    if partial.shape[0] != n:
        raise DatasetFormatError(
            path, None, f"partial_target shape {partial.shape} does not match {n} instances"
        )
    candidates = (partial > 0).astype(np.float64)

    true_labels = None
    if "target" in mat:
        target = _dense(mat["target"])
        if target.shape != partial.shape:
            target = target.T
        if target.shape != partial.shape:
            raise DatasetFormatError(path, None, f"target shape {target.shape} does not match candidates")
        true_labels = np.argmax(target, axis=1)

    try:
        return PLDataset(features=features, candidates=candidates, true_labels=true_labels, name=name)
    except DatasetError as e:
        raise DatasetFormatError(path, None, str(e))


def write_dataset(
    ds: PLDataset,
    path: Union[str, Path],
    fmt: Optional[DatasetFormat] = None,
) -> Path:
    """
    Write a dataset in PlCsv or PlSparse format.

    Args:
        ds: Dataset to write
        path: Output path
        fmt: PLCSV or PLSPARSE (inferred from the suffix when None)

    Returns:
        The written path
    """
    path = Path(path)
    fmt = fmt or infer_format(path)
    if fmt == DatasetFormat.MAT:
        raise DatasetFormatError(path, None, "writing MAT files is not supported")

    default_names = tuple(str(j) for j in range(ds.n_classes))
    for class_name in ds.class_names:
        if "," in class_name or "\n" in class_name or class_name != class_name.strip():
            raise DatasetError(f"class name {class_name!r} cannot be written to {fmt.value}")

    lines = [f"# {ds.name}", f"{ds.n_instances} {ds.n_features} {ds.n_classes}"]
    if ds.class_names != default_names:
        lines.append(f"{CLASSES_DIRECTIVE} " + ",".join(ds.class_names))

    for i in range(ds.n_instances):
        row = ds.features[i]
        if fmt == DatasetFormat.PLCSV:
            feature_field = ",".join(repr(float(v)) for v in row)
        else:
            feature_field = " ".join(f"{j}:{float(row[j])!r}" for j in np.flatnonzero(row))
        cand_field = ",".join(str(int(j)) for j in np.flatnonzero(ds.candidates[i]))
        line = f"{feature_field} | {cand_field}"
        if ds.true_labels is not None:
            line += f" | {int(ds.true_labels[i])}"
        lines.append(line)

    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")
    return path


def load_labeled_csv(
    path: Union[str, Path],
    label_column: int = -1,
    has_header: bool = False,
    name: Optional[str] = None,
) -> PLDataset:
    """
    Load a clean, single-label CSV (UCI style) as a clean PL dataset.

    Labels may be arbitrary strings; class names are sorted numerically
    when every label is an integer and lexically otherwise.

    Args:
        path: CSV file with numeric features and one label column
        label_column: Index of the label column (negative counts from the end)
        has_header: Skip the first non-comment row
        name: Dataset name (defaults to the file stem)

    Returns:
        PLDataset with singleton candidate sets and true labels
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Dataset not found: {path}")

    rows: list[list[float]] = []
    labels: list[str] = []
    width = None
    skipped_header = not has_header
    with open(path, "r", encoding="utf-8", newline="") as f:
        for line_no, record in enumerate(csv.reader(f), start=1):
            if not record or not "".join(record).strip() or record[0].lstrip().startswith("#"):
                continue
            if not skipped_header:
                skipped_header = True
                continue
            if width is None:
                width = len(record)
                if width < 2:
                    raise DatasetFormatError(path, line_no, "need at least one feature and a label column")
            elif len(record) != width:
                raise DatasetFormatError(path, line_no, f"expected {width} fields, got {len(record)}")
            label_idx = label_column % width
            labels.append(record[label_idx].strip())
            rows.append([
                _parse_float(tok, path, line_no)
                for j, tok in enumerate(record) if j != label_idx
            ])

    if not rows:
        raise DatasetFormatError(path, None, "no data rows")

    unique = set(labels)
    try:
        class_names = sorted(unique, key=int)
    except ValueError:
        class_names = sorted(unique)
    index = {c: j for j, c in enumerate(class_names)}
    return from_labels(
        features=np.array(rows, dtype=np.float64),
        labels=[index[label] for label in labels],
        n_classes=len(class_names),
        class_names=class_names,
        name=name or path.stem,
    )
