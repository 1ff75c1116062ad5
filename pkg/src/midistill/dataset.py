"""Tabular dataset container: CSV ingestion, splitting, normalization and
the random-feature tampering columns.

A Dataset is an immutable bundle of named numeric columns plus a binary
label vector (1 = malware, 0 = legitimate).  All transformations return new
Dataset instances and record what they did in ``meta``.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DataError,
    MalformedHeader,
    NameCollision,
    NonBinaryLabel,
    NonNumericValue,
    TooFewSamples,
    UnknownFeature,
)

RESERVED_RANDOM_NAMES = ("__rand1", "__rand2", "__rand3")

VALIDATION_FRACTION = 0.15
TEST_FRACTION = 0.15


@dataclass(frozen=True)
class Dataset:
    """Feature matrix (n_samples, n_features), column-aligned names, labels."""

    feature_names: tuple[str, ...]
    X: np.ndarray
    labels: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        labels = np.asarray(self.labels)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "labels", labels.astype(np.int64))
        if X.ndim != 2:
            raise DataError("feature matrix must be 2-dimensional")
        if len(self.feature_names) != X.shape[1]:
            raise DataError("feature_names not aligned with columns")
        if len(set(self.feature_names)) != len(self.feature_names):
            raise DataError("duplicate feature names")
        if labels.shape != (X.shape[0],):
            raise DataError("labels length must equal n_samples")
        if not np.all(np.isfinite(X)):
            raise DataError("NaN/infinite values in feature matrix")
        if not np.all((self.labels == 0) | (self.labels == 1)):
            raise DataError("labels must be 0/1")
        X.setflags(write=False)
        self.labels.setflags(write=False)

    @property
    def n_samples(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def column(self, name: str) -> np.ndarray:
        try:
            return self.X[:, self.feature_names.index(name)]
        except ValueError:
            raise UnknownFeature(name) from None

    def select_features(self, names, note: str | None = None) -> "Dataset":
        """Project onto the given feature columns, preserving sample order."""
        missing = [n for n in names if n not in self.feature_names]
        if missing:
            raise UnknownFeature(", ".join(missing))
        idx = [self.feature_names.index(n) for n in names]
        meta = dict(self.meta)
        meta["selected_features"] = list(names)
        if note:
            meta["selection_note"] = note
        return Dataset(tuple(names), self.X[:, idx], self.labels, meta)

    def take(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset(self.feature_names, self.X[rows], self.labels[rows], dict(self.meta))

    def with_meta(self, **extra) -> "Dataset":
        meta = dict(self.meta)
        meta.update(extra)
        return Dataset(self.feature_names, self.X, self.labels, meta)


@dataclass(frozen=True)
class DataSplit:
    """Disjoint learn/test/validation index sets covering all samples."""

    learn_idx: np.ndarray
    test_idx: np.ndarray
    validation_idx: np.ndarray
    seed: int

    def __post_init__(self):
        for name in ("learn_idx", "test_idx", "validation_idx"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.int64))


def load_csv(path, label_column: str) -> Dataset:
    """Read an RFC-4180 CSV with a header row into a Dataset.

    Rows with missing or unparseable numeric values are hard errors; the
    source is expected to be a fully preprocessed numeric table.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedHeader("empty file") from None
        if len(header) != len(set(header)) or any(not h.strip() for h in header):
            raise MalformedHeader("duplicate or blank column names")
        if label_column not in header:
            raise MalformedHeader(f"label column {label_column!r} not in header")
        label_pos = header.index(label_column)
        names = [h for i, h in enumerate(header) if i != label_pos]

        rows, labels = [], []
        for rownum, record in enumerate(reader, start=2):
            if len(record) != len(header):
                raise NonNumericValue(rownum, "<row length>")
            raw_label = record[label_pos].strip()
            if raw_label not in ("0", "1"):
                try:
                    lv = float(raw_label)
                except ValueError:
                    raise NonBinaryLabel(rownum, raw_label) from None
                if lv not in (0.0, 1.0):
                    raise NonBinaryLabel(rownum, raw_label)
            labels.append(int(float(raw_label)))
            values = []
            for i, cell in enumerate(record):
                if i == label_pos:
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    raise NonNumericValue(rownum, header[i]) from None
                if not math.isfinite(v):
                    raise NonNumericValue(rownum, header[i])
                values.append(v)
            rows.append(values)

    X = np.asarray(rows, dtype=np.float64).reshape(len(rows), len(names))
    meta = {
        "source_path": str(path),
        "source_sha256": _file_sha256(path),
        "label_column": label_column,
        "transforms": [],
    }
    return Dataset(tuple(names), X, np.asarray(labels), meta)


def write_csv(dataset: Dataset, path, label_column: str | None = None) -> None:
    """Write the dataset back to CSV plus a ``<name>.meta.json`` sidecar."""
    label_column = label_column or dataset.meta.get("label_column", "label")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(dataset.feature_names) + [label_column])
        for row, lab in zip(dataset.X, dataset.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(lab)])
    sidecar = os.fspath(path) + ".meta.json"
    with open(sidecar, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(dataset.meta), fh, indent=2, sort_keys=True)


def split(dataset: Dataset, seed: int) -> DataSplit:
    """Deterministic learn/test/validation split.

    validation = 15% of all samples; of the remainder, test = 15% and learn
    the rest.  Fractional counts round up, the remainder goes to learn,
    which reproduces the 46639/8231/9684 partition of a 64554-sample table.
    """
    n = dataset.n_samples
    if n < 10:
        raise TooFewSamples(f"need at least 10 samples, got {n}")
    n_val = math.ceil(VALIDATION_FRACTION * n)
    n_test = math.ceil(TEST_FRACTION * (n - n_val))
    perm = np.random.default_rng(seed).permutation(n)
    val = np.sort(perm[:n_val])
    test = np.sort(perm[n_val:n_val + n_test])
    learn = np.sort(perm[n_val + n_test:])
    return DataSplit(learn, test, val, seed)


def fit_minmax(dataset: Dataset, rows=None) -> dict:
    """Per-column min/max parameters, optionally fit on a row subset."""
    X = dataset.X if rows is None else dataset.X[np.asarray(rows, dtype=np.int64)]
    return {
        name: (float(X[:, i].min()), float(X[:, i].max()))
        for i, name in enumerate(dataset.feature_names)
    }


def apply_minmax(dataset: Dataset, params: dict) -> Dataset:
    """Affinely map each column to [0,1] using stored (min, max) parameters.

    Constant columns (max == min) map to 0.  Out-of-range held-out values
    are clipped so downstream sigmoid/AE inputs stay in [0,1].
    """
    cols = []
    for name in dataset.feature_names:
        lo, hi = params[name]
        col = dataset.column(name)
        if hi > lo:
            cols.append(np.clip((col - lo) / (hi - lo), 0.0, 1.0))
        else:
            cols.append(np.zeros_like(col))
    meta = dict(dataset.meta)
    meta.setdefault("transforms", [])
    meta["transforms"] = list(meta["transforms"]) + ["minmax"]
    meta["minmax_params"] = {k: list(v) for k, v in params.items()}
    return Dataset(dataset.feature_names, np.column_stack(cols), dataset.labels, meta)


def minmax_normalize(dataset: Dataset, fit_rows=None) -> Dataset:
    """Min-max normalize; parameters fit on ``fit_rows`` (default: all rows)."""
    return apply_minmax(dataset, fit_minmax(dataset, fit_rows))


def inject_random_features(dataset: Dataset, seed: int) -> Dataset:
    """Append the three label-independent tampering columns.

    1. standard Gaussian draws (quantile-class generator shape),
    2. a mixture of three isotropic Gaussian clusters at -5/0/+5,
    3. uniform samples on [0, 1).
    """
    for name in RESERVED_RANDOM_NAMES:
        if name in dataset.feature_names:
            raise NameCollision(name)
    n = dataset.n_samples
    rng = np.random.default_rng(seed)
    rand1 = rng.standard_normal(n)
    centers = np.array([-5.0, 0.0, 5.0])
    rand2 = centers[rng.integers(0, 3, size=n)] + rng.standard_normal(n)
    rand3 = rng.random(n)
    X = np.column_stack([dataset.X, rand1, rand2, rand3])
    meta = dict(dataset.meta)
    meta["random_features_seed"] = int(seed)
    return Dataset(dataset.feature_names + RESERVED_RANDOM_NAMES, X, dataset.labels, meta)


def _file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj
