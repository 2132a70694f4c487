"""Labeled matrix ingestion and two-group extraction."""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .exceptions import DataError

__all__ = [
    "LabeledDataset",
    "TwoGroupData",
    "load_dataset",
    "write_dataset",
    "split_two_groups",
    "check_dataset",
]


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Sample-by-feature matrix with one class label per sample."""

    values: np.ndarray
    labels: tuple
    sample_ids: Optional[tuple] = None
    feature_names: Optional[tuple] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape[1] < 1:
            raise DataError(f"values must be a 2-D matrix with at least one feature, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            i, j = np.argwhere(~np.isfinite(values))[0]
            raise DataError(f"non-finite value at sample {i}, feature {j}")
        labels = tuple(str(lab) for lab in self.labels)
        if len(labels) != values.shape[0]:
            raise DataError(f"{len(labels)} labels for {values.shape[0]} samples")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", labels)
        if self.sample_ids is not None:
            ids = tuple(str(s) for s in self.sample_ids)
            if len(ids) != values.shape[0]:
                raise DataError(f"{len(ids)} sample ids for {values.shape[0]} samples")
            object.__setattr__(self, "sample_ids", ids)
        if self.feature_names is not None:
            names = tuple(str(s) for s in self.feature_names)
            if len(names) != values.shape[1]:
                raise DataError(f"{len(names)} feature names for {values.shape[1]} features")
            object.__setattr__(self, "feature_names", names)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    @property
    def classes(self) -> list[str]:
        """Distinct labels in order of first appearance."""
        return list(dict.fromkeys(self.labels))

    def class_counts(self) -> dict[str, int]:
        return dict(Counter(self.labels))


@dataclass(frozen=True, eq=False)
class TwoGroupData:
    """Rows of class +1 (``x``, m x d) and class -1 (``y``, n x d)."""

    x: np.ndarray
    y: np.ndarray
    label_x: str = "x"
    label_y: str = "y"
    _stacked: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.x, dtype=float))
        y = np.atleast_2d(np.asarray(self.y, dtype=float))
        if x.ndim != 2 or y.ndim != 2:
            raise DataError("groups must be 2-D matrices")
        if x.shape[1] != y.shape[1]:
            raise DataError(f"groups differ in dimension: {x.shape[1]} vs {y.shape[1]}")
        for name, g in ((self.label_x, x), (self.label_y, y)):
            if g.shape[0] < 2:
                raise DataError(f"class {name} has < 2 samples")
            if not np.all(np.isfinite(g)):
                raise DataError(f"class {name} contains non-finite values")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "_stacked", np.vstack([x, y]))

    @property
    def m(self) -> int:
        return self.x.shape[0]

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    @property
    def stacked(self) -> np.ndarray:
        """``x`` rows followed by ``y`` rows."""
        return self._stacked

    def swapped(self) -> "TwoGroupData":
        return TwoGroupData(self.y, self.x, self.label_y, self.label_x)


def check_dataset(ds: LabeledDataset) -> LabeledDataset:
    """Enforce the invariants required of an analysable dataset."""
    if ds.n_samples < 4:
        raise DataError(f"need at least 4 samples, got {ds.n_samples}")
    counts = ds.class_counts()
    if len(counts) < 2:
        raise DataError(f"need at least 2 distinct labels, got {sorted(counts)}")
    small = sorted(lab for lab, c in counts.items() if c < 2)
    if small:
        raise DataError(f"label(s) with < 2 samples: {', '.join(small)}")
    return ds


def split_two_groups(ds: LabeledDataset, a: str, b: str) -> TwoGroupData:
    """Rows labeled ``a`` become ``x`` and rows labeled ``b`` become ``y``, order preserved."""
    a, b = str(a), str(b)
    if a == b:
        raise DataError(f"cannot compare class {a!r} with itself")
    labels = np.asarray(ds.labels, dtype=object)
    for lab in (a, b):
        if lab not in ds.labels:
            raise DataError(f"unknown label {lab!r}; available: {', '.join(ds.classes)}")
    return TwoGroupData(ds.values[labels == a], ds.values[labels == b], a, b)


def _sniff_delimiter(path: Path, delimiter: Optional[str]) -> str:
    if delimiter:
        return delimiter
    if path.suffix.lower() in (".tsv", ".tab"):
        return "\t"
    with open(path, encoding="utf-8", newline="") as fh:
        first = fh.readline()
    return "\t" if "\t" in first else ","


def _read_rows(path: Path, delimiter: Optional[str]) -> list[list[str]]:
    if not path.is_file():
        raise DataError(f"file not found: {path}")
    delim = _sniff_delimiter(path, delimiter)
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [row for row in csv.reader(fh, delimiter=delim)]
    rows = [row for row in rows if any(cell.strip() for cell in row)]
    if not rows:
        raise DataError(f"{path}: empty file")
    return rows


def _parse_cell(text: str, where: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise DataError(f"non-numeric value {text!r} at {where}") from None
    if not math.isfinite(v):
        raise DataError(f"non-finite value {text!r} at {where}")
    return v


def _read_sidecar(path: Path, delimiter: Optional[str]) -> dict[str, str]:
    rows = _read_rows(Path(path), delimiter)
    header = [h.strip() for h in rows[0]]
    if header[:2] != ["sample_id", "label"]:
        raise DataError(f"{path}: label file header must be 'sample_id,label', got {','.join(header)}")
    mapping = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) < 2:
            raise DataError(f"{path}: line {lineno} has {len(row)} column(s), expected 2")
        sid, lab = row[0].strip(), row[1].strip()
        if sid in mapping:
            raise DataError(f"{path}: duplicate sample_id {sid!r} at line {lineno}")
        mapping[sid] = lab
    return mapping


def load_dataset(
    path,
    *,
    label_column: str = "label",
    labels_path=None,
    id_column: Optional[str] = None,
    transpose: bool = False,
    delimiter: Optional[str] = None,
) -> LabeledDataset:
    """Read a delimited matrix with a header row.

    Samples are rows by default.  With ``transpose=True`` the file holds features
    as rows: the header carries sample ids and an optional row whose first cell is
    ``label_column`` carries labels.  A sidecar label file (``sample_id,label``)
    overrides any in-file labels.
    """
    path = Path(path)
    rows = _read_rows(path, delimiter)
    sidecar = _read_sidecar(labels_path, delimiter) if labels_path is not None else None
    if transpose:
        ids, labels, names, values = _parse_transposed(path, rows, label_column)
    else:
        ids, labels, names, values = _parse_rowwise(path, rows, label_column, id_column, sidecar is not None)

    if sidecar is not None:
        if ids is None:
            raise DataError(f"{path}: a label file needs sample ids in the matrix (id column or transposed header)")
        missing = [s for s in ids if s not in sidecar]
        if missing:
            raise DataError(f"{labels_path}: no label for sample(s) {', '.join(missing[:5])}")
        labels = [sidecar[s] for s in ids]
    if labels is None:
        raise DataError(f"{path}: label column {label_column!r} not found and no label file given")

    ds = LabeledDataset(
        np.array(values, dtype=float).reshape(len(labels), -1),
        tuple(labels),
        None if ids is None else tuple(ids),
        tuple(names),
    )
    return check_dataset(ds)


def _parse_rowwise(path, rows, label_column, id_column, have_sidecar):
    header = [h.strip() for h in rows[0]]
    width = len(header)
    if id_column is None and "sample_id" in header:
        id_column = "sample_id"
    if id_column is not None and id_column not in header:
        raise DataError(f"{path}: id column {id_column!r} not in header")
    label_idx = header.index(label_column) if label_column in header else None
    id_idx = header.index(id_column) if id_column is not None else None
    feat_idx = [j for j in range(width) if j not in (label_idx, id_idx)]
    if not feat_idx:
        raise DataError(f"{path}: no feature columns")
    ids, labels, values = [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise DataError(f"{path}: line {lineno} has {len(row)} columns, header has {width} (ragged row)")
        for j in feat_idx:
            values.append(_parse_cell(row[j].strip(), f"line {lineno}, column {header[j]!r}"))
        if label_idx is not None:
            labels.append(row[label_idx].strip())
        if id_idx is not None:
            ids.append(row[id_idx].strip())
    if len(rows) < 2:
        raise DataError(f"{path}: no data rows")
    if label_idx is None:
        labels = None
    return (ids if id_idx is not None else None), labels, [header[j] for j in feat_idx], values


def _parse_transposed(path, rows, label_column):
    header = [h.strip() for h in rows[0]]
    width = len(header)
    ids = header[1:]
    if not ids:
        raise DataError(f"{path}: transposed header has no sample columns")
    labels, names, columns = None, [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise DataError(f"{path}: line {lineno} has {len(row)} columns, header has {width} (ragged row)")
        name = row[0].strip()
        if name == label_column:
            labels = [c.strip() for c in row[1:]]
            continue
        names.append(name)
        columns.append([_parse_cell(row[j].strip(), f"line {lineno}, column {header[j]!r}") for j in range(1, width)])
    if not columns:
        raise DataError(f"{path}: no feature rows")
    values = np.array(columns, dtype=float).T.ravel().tolist()
    return ids, labels, names, values


def write_dataset(ds: LabeledDataset, path, *, delimiter: str = ",") -> None:
    """Write samples as rows; floats use ``repr`` so a reload is bitwise identical."""
    names = ds.feature_names or tuple(f"f{j}" for j in range(ds.n_features))
    ids = ds.sample_ids or tuple(f"s{i}" for i in range(ds.n_samples))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        w.writerow(["sample_id", "label", *names])
        for sid, lab, row in zip(ids, ds.labels, ds.values):
            w.writerow([sid, lab, *(repr(float(v)) for v in row)])


def from_arrays(x: np.ndarray, y: Sequence, sample_ids=None) -> LabeledDataset:
    """Convenience constructor from an array and label vector."""
    return LabeledDataset(np.asarray(x, dtype=float), tuple(str(v) for v in y), sample_ids)
