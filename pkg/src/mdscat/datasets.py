"""Loaders for USPS and the UCI sets, stratified folds and standardisation."""

from __future__ import annotations

import gzip
import hashlib
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import ConfigError, DataError

DATA_ENV = "MDSCAT_DATA"
USPS_SIZES = (7291, 2007)


def data_root() -> Path:
    """Directory holding the raw data files.

    ``$MDSCAT_DATA`` wins; otherwise the ``data/`` folder of the source
    checkout, falling back to ``./data``.
    """
    env = os.environ.get(DATA_ENV)
    if env:
        return Path(env)
    repo = Path(__file__).resolve().parents[2] / "data"
    return repo if repo.is_dir() else Path.cwd() / "data"


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _read_text(path: Path) -> str:
    if not path.exists():
        raise DataError(f"data file {path} not found")
    if path.suffix == ".gz":
        with gzip.open(path, "rt") as fh:
            return fh.read()
    return path.read_text()


@dataclass(frozen=True)
class Dataset:
    """Samples stacked along axis 0 with integer labels indexing ``class_names``."""

    name: str
    samples: np.ndarray
    labels: np.ndarray
    class_names: tuple
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.samples) == 0:
            raise DataError(f"{self.name}: dataset is empty")
        if len(self.samples) != len(self.labels):
            raise DataError(f"{self.name}: {len(self.samples)} samples but {len(self.labels)} labels")
        if not np.all(np.isfinite(self.samples)):
            raise DataError(f"{self.name}: non-finite sample values")

    def __len__(self):
        return len(self.labels)

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def subset(self, idx, name: Optional[str] = None) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(name or self.name, self.samples[idx], self.labels[idx],
                       self.class_names, dict(self.provenance, subset=len(idx)))

    def head(self, n: int) -> "Dataset":
        """First ``n`` samples in file order."""
        return self.subset(np.arange(min(n, len(self))), f"{self.name}[:{n}]")

    def checksum(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.samples, dtype=np.float64).tobytes())
        h.update(np.ascontiguousarray(self.labels, dtype=np.int64).tobytes())
        return h.hexdigest()


# ---------------------------------------------------------------------------
# USPS

def load_usps_file(path, name: str = "usps") -> Dataset:
    """Parse one USPS file: per line a digit label then 256 values in [-1, 1].

    Pixels are mapped to [0, 1] and reshaped to 16 x 16.
    """
    path = Path(path)
    labels, rows = [], []
    for lineno, line in enumerate(_read_text(path).splitlines(), start=1):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != 257:
            raise DataError(f"{path}:{lineno}: expected 257 fields, found {len(fields)}")
        try:
            values = [float(v) for v in fields]
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: non-numeric field ({exc})") from None
        label = values[0]
        if label != int(label) or not 0 <= label <= 9:
            raise DataError(f"{path}:{lineno}: label {fields[0]!r} is not a digit")
        labels.append(int(label))
        rows.append(values[1:])
    if not rows:
        raise DataError(f"{path}: no samples")
    pixels = (np.array(rows) + 1.0) / 2.0
    return Dataset(name, pixels.reshape(-1, 16, 16), np.array(labels), tuple(str(d) for d in range(10)),
                   {"path": str(path), "sha256": _sha256(path)})


def load_usps(train_path, test_path, expected: Optional[Sequence[int]] = USPS_SIZES):
    """Train and test splits; sizes are checked against ``expected`` unless it is None."""
    train = load_usps_file(train_path, "usps-train")
    test = load_usps_file(test_path, "usps-test")
    if expected is not None and (len(train), len(test)) != tuple(expected):
        raise DataError(f"USPS split sizes {(len(train), len(test))} differ from {tuple(expected)}")
    return train, test


# ---------------------------------------------------------------------------
# UCI

@dataclass(frozen=True)
class UciSchema:
    """Column layout of a UCI file.

    ``delimiter`` None splits on whitespace. Labels are matched against
    ``class_names`` after numeric normalisation ("1." and "1" are the same).
    """

    name: str
    n_attributes: int
    class_names: tuple
    label_column: int = -1
    drop_columns: tuple = ()
    delimiter: Optional[str] = ","
    expected_samples: Optional[int] = None

    @property
    def n_columns(self) -> int:
        return self.n_attributes + 1 + len(self.drop_columns)


def _norm_label(s: str) -> str:
    s = s.strip().strip('"').strip("'")
    try:
        f = float(s)
    except ValueError:
        return s
    return str(int(f)) if f == int(f) else s


SCHEMAS = {
    "glass": UciSchema("glass", 9, ("1", "2", "3", "5", "6", "7"), drop_columns=(0,),
                       expected_samples=214),
    "yeast": UciSchema("yeast", 8, ("CYT", "NUC", "MIT", "ME3", "ME2", "ME1", "EXC", "VAC", "POX", "ERL"),
                       drop_columns=(0,), delimiter=None, expected_samples=1484),
    "isolet": UciSchema("isolet", 617, tuple(str(i) for i in range(1, 27)), expected_samples=7797),
}


def load_uci(paths, schema: UciSchema) -> Dataset:
    """Load one or more delimited files (concatenated in the given order)."""
    if isinstance(paths, (str, Path)):
        paths = [paths]
    paths = [Path(p) for p in paths]
    label_of = {name: i for i, name in enumerate(schema.class_names)}
    label_col = schema.label_column % schema.n_columns
    keep = [c for c in range(schema.n_columns) if c != label_col and c not in schema.drop_columns]
    rows, labels = [], []
    for path in paths:
        for lineno, line in enumerate(_read_text(path).splitlines(), start=1):
            if not line.strip():
                continue
            fields = [f.strip() for f in line.split(schema.delimiter)] if schema.delimiter else line.split()
            if len(fields) != schema.n_columns:
                raise DataError(f"{path}:{lineno}: expected {schema.n_columns} columns, found {len(fields)}")
            label = _norm_label(fields[label_col])
            if label not in label_of:
                raise DataError(f"{path}:{lineno}: unknown class label {fields[label_col]!r}")
            try:
                rows.append([float(fields[c]) for c in keep])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: non-numeric attribute ({exc})") from None
            labels.append(label_of[label])
    if not rows:
        raise DataError(f"{schema.name}: no samples in {[str(p) for p in paths]}")
    if schema.expected_samples is not None and len(rows) != schema.expected_samples:
        raise DataError(f"{schema.name}: expected {schema.expected_samples} samples, found {len(rows)}")
    return Dataset(schema.name, np.array(rows), np.array(labels), schema.class_names,
                   {"path": [str(p) for p in paths], "sha256": [_sha256(p) for p in paths]})


# ---------------------------------------------------------------------------
# folds and standardisation

@dataclass(frozen=True)
class FoldPlan:
    folds: tuple
    seed: int
    small_classes: tuple = ()

    @property
    def k(self) -> int:
        return len(self.folds)

    def splits(self) -> Iterator[tuple]:
        """``(train_idx, test_idx)`` per fold, indices sorted."""
        for i, test in enumerate(self.folds):
            train = np.sort(np.concatenate([f for j, f in enumerate(self.folds) if j != i]))
            yield train, test


def kfold(labels, k: int, seed: int = 42) -> FoldPlan:
    """Stratified k-fold partition.

    Each class is shuffled with ``seed`` and dealt round-robin, continuing
    where the previous class stopped, so per-class and total fold sizes both
    differ by at most one. Classes with fewer than ``k`` members are allowed
    and listed in ``small_classes``.
    """
    labels = np.asarray(labels)
    if k < 2:
        raise ConfigError(f"k must be >= 2, got {k}")
    if k > len(labels):
        raise ConfigError(f"k = {k} exceeds the sample count {len(labels)}")
    rng = np.random.default_rng(seed)
    order = np.concatenate([rng.permutation(np.flatnonzero(labels == c)) for c in np.unique(labels)])
    assignment = np.arange(len(order)) % k
    folds = tuple(np.sort(order[assignment == f]) for f in range(k))
    classes, counts = np.unique(labels, return_counts=True)
    return FoldPlan(folds, seed, tuple(int(c) for c, n in zip(classes, counts) if n < k))


@dataclass(frozen=True)
class StandardStats:
    mean: np.ndarray
    std: np.ndarray


def standardize_fit(train, min_std: float = 1e-12) -> StandardStats:
    """Per-column mean and (population) std; std below ``min_std`` becomes 1."""
    x = np.asarray(train, dtype=np.float64)
    if x.ndim != 2 or len(x) == 0:
        raise DataError(f"expected a non-empty 2D feature matrix, got shape {x.shape}")
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std = np.where(std < min_std, 1.0, std)
    return StandardStats(mean, std)


def standardize_apply(stats: StandardStats, features) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64)
    if x.shape[-1] != len(stats.mean):
        raise DataError(f"feature width {x.shape[-1]} does not match the statistics ({len(stats.mean)})")
    return (x - stats.mean) / stats.std
