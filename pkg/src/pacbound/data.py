"""Dataset loading, deterministic splitting and feature standardization.

Datasets are immutable containers of an n x d feature matrix plus a
length-n vector of +-1 labels.  Two on-disk formats are supported:

* csv    -- comma separated, last column is the label, no header unless
            the caller skips one.
* libsvm -- ``label idx:val idx:val ...`` with 1-based indices; absent
            indices are zero and the dimension is the largest index seen.

Labels in {0, 1} are remapped to {-1, +1} (0 -> -1) so common binary
exports load unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np


class DataError(ValueError):
    """Malformed file, bad label, or degenerate split."""


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray  # (n, d) float64
    labels: np.ndarray    # (n,) float64, entries exactly -1.0 or +1.0
    name: str = ""
    standardized: bool = False

    def __post_init__(self):
        x = np.ascontiguousarray(np.asarray(self.features, dtype=np.float64))
        y = np.asarray(self.labels, dtype=np.float64)
        if x.ndim != 2:
            raise DataError("features must be a 2-d matrix")
        if y.shape != (x.shape[0],):
            raise DataError("labels must be a vector matching the feature rows")
        if x.shape[0] < 2:
            raise DataError("dataset needs at least 2 rows")
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise DataError("labels must be exactly -1 or +1")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise DataError("train_fraction must lie in (0, 1)")


@dataclass(frozen=True)
class Standardizer:
    """Per-column affine map fitted on the training split only.

    ``scale`` holds 1/std (population std); constant columns get scale 0,
    which maps them to exactly zero.
    """

    mean: np.ndarray
    scale: np.ndarray

    def apply(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.mean) * self.scale


def _parse_label(tok: str, where: str) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise DataError(f"{where}: label {tok!r} is not numeric") from None
    if v in (-1.0, 1.0):
        return v
    if v == 0.0:
        return -1.0
    raise DataError(f"{where}: label {v} outside {{-1, 0, +1}}")


def load_dataset(path, format: str, name: str = "", header: bool = False) -> Dataset:
    """Read a dataset from ``path`` in the given format ("csv" or "libsvm")."""
    if format == "csv":
        return _load_csv(path, name or str(path), header)
    if format == "libsvm":
        return _load_libsvm(path, name or str(path), header)
    raise DataError(f"unknown format {format!r}")


def _load_csv(path, name, header):
    rows, labels = [], []
    width = None
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            if header and lineno == 1:
                continue
            line = line.strip()
            if not line:
                continue
            toks = line.split(",")
            if len(toks) < 2:
                raise DataError(f"{path}:{lineno}: expected at least one feature and a label")
            try:
                vals = [float(t) for t in toks[:-1]]
            except ValueError:
                raise DataError(f"{path}:{lineno}: malformed feature value") from None
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise DataError(f"{path}:{lineno}: expected {width} features, got {len(vals)}")
            rows.append(vals)
            labels.append(_parse_label(toks[-1], f"{path}:{lineno}"))
    if not rows:
        raise DataError(f"{path}: empty dataset")
    return Dataset(np.array(rows), np.array(labels), name=name)


def _load_libsvm(path, name, header):
    entries, labels = [], []
    dim = 0
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            if header and lineno == 1:
                continue
            line = line.strip()
            if not line:
                continue
            toks = line.split()
            labels.append(_parse_label(toks[0], f"{path}:{lineno}"))
            row = {}
            for tok in toks[1:]:
                try:
                    idx_s, val_s = tok.split(":")
                    idx, val = int(idx_s), float(val_s)
                except ValueError:
                    raise DataError(f"{path}:{lineno}: malformed entry {tok!r}") from None
                if idx < 1:
                    raise DataError(f"{path}:{lineno}: indices are 1-based")
                row[idx - 1] = val
                dim = max(dim, idx)
            entries.append(row)
    if not entries:
        raise DataError(f"{path}: empty dataset")
    x = np.zeros((len(entries), dim))
    for i, row in enumerate(entries):
        for j, v in row.items():
            x[i, j] = v
    return Dataset(x, np.array(labels), name=name)


def save_dataset(ds: Dataset, path, format: str) -> None:
    """Write ``ds`` so that a reload reproduces it bit-identically."""
    if format == "csv":
        with open(path, "w") as fh:
            for xi, yi in zip(ds.features, ds.labels):
                fh.write(",".join(repr(float(v)) for v in xi))
                fh.write(f",{int(yi):+d}\n")
    elif format == "libsvm":
        with open(path, "w") as fh:
            for i, (xi, yi) in enumerate(zip(ds.features, ds.labels)):
                parts = [f"{int(yi):+d}"]
                for j, v in enumerate(xi):
                    if v != 0.0:
                        parts.append(f"{j + 1}:{repr(float(v))}")
                # keep the dimension recoverable when the last column is all zero
                if i == 0 and ds.d >= 1 and xi[ds.d - 1] == 0.0:
                    parts.append(f"{ds.d}:0.0")
                fh.write(" ".join(parts) + "\n")
    else:
        raise DataError(f"unknown format {format!r}")


def split(ds: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Seeded Fisher-Yates split; identical (seed, n) gives identical parts.

    Both parts must be valid datasets, so sizes below 2 are degenerate.
    """
    n_train = math.floor(spec.train_fraction * ds.n)
    n_test = ds.n - n_train
    if n_train < 2 or n_test < 2:
        raise DataError(f"degenerate split sizes ({n_train}, {n_test}) for n={ds.n}")
    perm = np.random.default_rng(spec.seed).permutation(ds.n)
    tr, te = perm[:n_train], perm[n_train:]
    return (
        Dataset(ds.features[tr], ds.labels[tr], name=f"{ds.name}/train",
                standardized=ds.standardized),
        Dataset(ds.features[te], ds.labels[te], name=f"{ds.name}/test",
                standardized=ds.standardized),
    )


def fit_standardizer(train: Dataset, var_floor: float = 1e-24) -> Standardizer:
    mean = train.features.mean(axis=0)
    var = train.features.var(axis=0)  # population variance
    safe = np.where(var > var_floor, var, 1.0)
    scale = np.where(var > var_floor, 1.0 / np.sqrt(safe), 0.0)
    return Standardizer(mean=mean, scale=scale)


def apply_standardizer(ds: Dataset, st: Standardizer) -> Dataset:
    return replace(ds, features=st.apply(ds.features), standardized=True)


def standardize(train: Dataset, test: Dataset) -> tuple[Dataset, Dataset]:
    """Fit per-column affine map on train only, apply to both splits."""
    st = fit_standardizer(train)
    return apply_standardizer(train, st), apply_standardizer(test, st)
