"""Binary classification datasets: loading, standardization and splitting.

Everything is stored densely. Labels are always mapped onto {-1, +1} with
the smaller raw label value becoming -1, whatever the input encoding.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataFormatError, DomainError

__all__ = [
    "Dataset",
    "SplitSpec",
    "FeatureScaling",
    "load_libsvm",
    "load_csv",
    "load_dataset",
    "write_libsvm",
    "standardize",
    "split",
    "split_indices",
    "BENCHMARK_FILES",
    "load_benchmark",
    "default_data_dir",
]


@dataclass(frozen=True, eq=False)
class Dataset:
    """Dense feature matrix with labels in {-1, +1}.

    ``source`` records where the rows came from (a file path, or a short
    description of the transformation that produced them).
    """

    features: np.ndarray
    labels: np.ndarray
    name: str = "dataset"
    source: str = ""

    def __post_init__(self):
        X = np.ascontiguousarray(self.features, dtype=np.float64)
        y = np.ascontiguousarray(self.labels, dtype=np.float64)
        if X.ndim != 2:
            raise DomainError(f"features must be 2-D, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise DomainError(
                f"labels shape {y.shape} does not match {X.shape[0]} rows"
            )
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise DomainError(f"empty dataset of shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise DomainError("features contain NaN or Inf")
        if not np.all((y == 1.0) | (y == -1.0)):
            raise DomainError("labels must be exactly +1 or -1")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def subset(self, indices, name=None) -> "Dataset":
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(
            self.features[idx],
            self.labels[idx],
            name=name or self.name,
            source=self.source,
        )

    def __repr__(self):
        return f"Dataset(name={self.name!r}, n={self.n}, d={self.d})"


def _remap_labels(raw, path=None):
    classes = np.unique(raw)
    if classes.size != 2:
        raise DomainError(
            f"{path or 'data'}: expected exactly 2 label classes, "
            f"found {classes.size}: {classes[:10].tolist()}"
        )
    return np.where(raw == classes[0], -1.0, 1.0)


def _check_min_rows(X, path):
    if X.shape[0] < 2:
        raise DomainError(f"{path}: need at least 2 samples, found {X.shape[0]}")


def _read_libsvm(path):
    labels = []
    rows = []
    max_index = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            try:
                labels.append(float(tokens[0]))
            except ValueError:
                raise DataFormatError(
                    f"bad label {tokens[0]!r}", path=path, line=lineno
                ) from None
            idx = []
            val = []
            prev = 0
            for tok in tokens[1:]:
                key, sep, value = tok.partition(":")
                if not sep:
                    raise DataFormatError(
                        f"expected idx:val, got {tok!r}", path=path, line=lineno
                    )
                try:
                    j = int(key)
                    v = float(value)
                except ValueError:
                    raise DataFormatError(
                        f"bad pair {tok!r}", path=path, line=lineno
                    ) from None
                if j <= prev:
                    raise DataFormatError(
                        f"indices must be 1-based and strictly ascending at {tok!r}",
                        path=path,
                        line=lineno,
                    )
                prev = j
                idx.append(j - 1)
                val.append(v)
            max_index = max(max_index, prev)
            rows.append((idx, val))
    if not rows:
        raise DataFormatError("no samples found", path=path)
    return labels, rows, max_index


def load_libsvm(path, n_features=None, name=None, extra_paths=()) -> Dataset:
    """Read a LIBSVM/svmlight text file into a dense :class:`Dataset`.

    Each non-blank line is ``label idx:val idx:val ...`` with 1-based,
    strictly ascending indices; a trailing ``# comment`` is ignored. The
    feature dimension is the largest index seen, or ``n_features`` if given.
    Rows from ``extra_paths`` are appended before labels are remapped.
    """
    path = Path(path)
    labels, rows, max_index = _read_libsvm(path)
    sources = [str(path)]
    for extra in extra_paths:
        more_labels, more_rows, more_max = _read_libsvm(Path(extra))
        labels += more_labels
        rows += more_rows
        max_index = max(max_index, more_max)
        sources.append(str(extra))
    d = max_index if n_features is None else int(n_features)
    if d < max_index:
        raise DataFormatError(
            f"feature index {max_index} exceeds n_features={d}", path=path
        )
    if d < 1:
        raise DataFormatError("no features found", path=path)
    X = np.zeros((len(rows), d))
    for i, (idx, val) in enumerate(rows):
        X[i, idx] = val
    _check_min_rows(X, path)
    y = _remap_labels(np.asarray(labels), path)
    return Dataset(X, y, name=name or path.stem, source="+".join(sources))


def write_libsvm(ds: Dataset, path) -> None:
    """Write ``ds`` in LIBSVM format; zero entries are omitted."""
    with open(path, "w", encoding="utf-8") as fh:
        for x, label in zip(ds.features, ds.labels):
            pairs = " ".join(
                f"{j + 1}:{float(x[j])!r}" for j in np.flatnonzero(x)
            )
            fh.write(f"{int(label):+d} {pairs}".rstrip() + "\n")


def _is_number(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def load_csv(path, label_column=-1, delimiter=",", name=None) -> Dataset:
    """Read a rectangular numeric CSV; one column holds the binary label.

    A header row is assumed when the first line contains a non-numeric cell.
    ``label_column`` may be negative (counted from the end).
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = [
            (lineno, r)
            for lineno, r in enumerate(csv.reader(fh, delimiter=delimiter), 1)
            if r and any(c.strip() for c in r)
        ]
    if rows and not all(_is_number(c.strip()) for c in rows[0][1]):
        rows = rows[1:]
    if not rows:
        raise DataFormatError("no samples found", path=path)
    width = len(rows[0][1])
    if width < 2:
        raise DataFormatError("need a label column and at least one feature", path=path)
    col = label_column if label_column >= 0 else width + label_column
    if not 0 <= col < width:
        raise DomainError(f"label_column {label_column} out of range for {width} columns")
    values = np.empty((len(rows), width))
    for i, (lineno, r) in enumerate(rows):
        if len(r) != width:
            raise DataFormatError(
                f"ragged row: {len(r)} fields, expected {width}", path=path, line=lineno
            )
        try:
            values[i] = [float(c) for c in r]
        except ValueError:
            raise DataFormatError("non-numeric field", path=path, line=lineno) from None
    X = np.delete(values, col, axis=1)
    _check_min_rows(X, path)
    y = _remap_labels(values[:, col], path)
    return Dataset(X, y, name=name or path.stem, source=str(path))


def load_dataset(path, fmt="auto", label_column=-1, name=None) -> Dataset:
    """Dispatch to :func:`load_csv` or :func:`load_libsvm` by ``fmt``.

    With ``fmt="auto"`` a ``.csv`` suffix selects CSV, anything else LIBSVM.
    """
    path = Path(path)
    if fmt == "auto":
        fmt = "csv" if path.suffix.lower() == ".csv" else "libsvm"
    if fmt == "csv":
        return load_csv(path, label_column=label_column, name=name)
    if fmt == "libsvm":
        return load_libsvm(path, name=name)
    raise DomainError(f"unknown dataset format {fmt!r}")


@dataclass(frozen=True, eq=False)
class FeatureScaling:
    """Per-feature mean and population standard deviation."""

    mean: np.ndarray
    std: np.ndarray

    def apply(self, ds: Dataset) -> Dataset:
        scale = np.where(self.std > 0, self.std, 1.0)
        X = (ds.features - self.mean) / scale
        return Dataset(X, ds.labels, name=ds.name, source=ds.source)


def standardize(ds: Dataset):
    """Center each column and scale it to unit population std.

    Zero-variance columns end up identically 0. Returns the transformed
    dataset and the :class:`FeatureScaling` so held-out data can reuse the
    training statistics.
    """
    if ds.n < 2:
        raise DomainError("standardize needs at least 2 samples")
    mean = ds.features.mean(axis=0)
    centered = ds.features - mean
    std = np.sqrt(np.mean(centered * centered, axis=0))
    # Columns that are constant up to rounding count as zero-variance.
    std = np.where(std > 1e-12 * np.maximum(1.0, np.abs(mean)), std, 0.0)
    scaling = FeatureScaling(mean, std)
    return scaling.apply(ds), scaling


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.2
    seed: int = 0
    shuffle: bool = True


def split_indices(n: int, spec: SplitSpec):
    """Return ``(train_idx, test_idx)``; the test part has floor(fraction*n) rows."""
    f = spec.test_fraction
    if not 0.0 < f < 1.0:
        raise DomainError(f"test_fraction must lie in (0, 1), got {f}")
    n_test = math.floor(f * n + 1e-9)
    if f * n < 1 - 1e-9 or (1.0 - f) * n < 1 - 1e-9 or n - n_test < 1:
        raise DomainError(
            f"test_fraction={f} leaves an empty side for n={n}"
        )
    if spec.shuffle:
        order = np.random.default_rng(spec.seed).permutation(n)
    else:
        order = np.arange(n)
    n_train = n - n_test
    return np.sort(order[:n_train]), np.sort(order[n_train:])


def split(ds: Dataset, spec: SplitSpec):
    train_idx, test_idx = split_indices(ds.n, spec)
    return (
        ds.subset(train_idx, name=f"{ds.name}-train"),
        ds.subset(test_idx, name=f"{ds.name}-test"),
    )


# name -> (file names tried in order, format)
BENCHMARK_FILES = {
    "spambase": (("spambase.csv",), "csv"),
    "german": (("german.csv", "german.numer"), None),
    "svmguide3": (("svmguide3", "svmguide3.csv"), None),
    "pima": (("pima.csv", "diabetes.csv"), None),
}

DATA_DIR_ENV = "RFFSGM_DATA_DIR"


def default_data_dir() -> Path:
    """Directory searched for named datasets.

    ``$RFFSGM_DATA_DIR`` when set, otherwise ``data/`` next to the source tree.
    """
    env = os.environ.get(DATA_DIR_ENV)
    if env:
        return Path(env)
    return Path(__file__).resolve().parents[2] / "data"


def load_benchmark(name: str, data_dir=None) -> Dataset:
    """Load one of the four benchmark datasets by short name.

    For svmguide3 a companion ``svmguide3.t`` file, if present, is appended
    to the training file (the public distribution ships the two halves
    separately).
    """
    key = name.lower()
    if key not in BENCHMARK_FILES:
        raise DomainError(f"unknown dataset {name!r}; known: {sorted(BENCHMARK_FILES)}")
    data_dir = Path(data_dir) if data_dir is not None else default_data_dir()
    candidates, fmt = BENCHMARK_FILES[key]
    for fname in candidates:
        path = data_dir / fname
        if path.exists():
            break
    else:
        raise FileNotFoundError(
            f"dataset {name!r} not found in {data_dir} (looked for {', '.join(candidates)})"
        )
    extra = path.with_name(path.name + ".t")
    if key == "svmguide3" and path.suffix != ".csv" and extra.exists():
        return load_libsvm(path, name=key, extra_paths=[extra])
    return load_dataset(path, fmt=fmt or "auto", name=key)
