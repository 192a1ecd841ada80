"""CSV ingestion, imputation / encoding / scaling, and stratified folds."""

from __future__ import annotations

import csv
import math
import os
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, InvalidData

NUMERIC = "numeric"
CATEGORICAL = "categorical"
MISSING_TOKENS = ("", "?")
STD_FLOOR = 1e-12


class DataFileNotFound(InvalidData):
    pass


class MissingLabelColumn(InvalidData):
    pass


class RaggedRows(InvalidData):
    pass


class TooFewRows(InvalidData):
    pass


class TooFewClasses(InvalidData):
    pass


@dataclass(frozen=True)
class Column:
    name: str
    kind: str
    values: np.ndarray  # float with nan for numeric, object with None for categorical

    @property
    def missing(self) -> np.ndarray:
        if self.kind == NUMERIC:
            return np.isnan(self.values)
        return np.array([v is None for v in self.values], dtype=bool)


@dataclass(frozen=True)
class Dataset:
    """Feature columns plus (optionally) one class name per row."""

    columns: tuple
    y: tuple | None = None

    @property
    def m(self) -> int:
        if self.columns:
            return len(self.columns[0].values)
        return 0 if self.y is None else len(self.y)

    @property
    def names(self) -> list:
        return [c.name for c in self.columns]

    @property
    def kinds(self) -> dict:
        return {c.name: c.kind for c in self.columns}

    @property
    def classes(self) -> list:
        return sorted(set(self.y), key=str) if self.y is not None else []

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=int)
        cols = tuple(Column(c.name, c.kind, c.values[rows]) for c in self.columns)
        y = None if self.y is None else tuple(self.y[i] for i in rows)
        return Dataset(cols, y)

    def select(self, names) -> "Dataset":
        by_name = {c.name: c for c in self.columns}
        missing = [n for n in names if n not in by_name]
        if missing:
            raise InvalidArgument(f"unknown feature column(s): {', '.join(missing)}")
        return Dataset(tuple(by_name[n] for n in names), self.y)


def _is_missing(cell: str) -> bool:
    return cell.strip() in MISSING_TOKENS


def _parse_float(cell: str):
    try:
        v = float(cell)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def read_schema(path) -> dict:
    """Sidecar type hints: ``column_name=numeric|categorical`` per line."""
    hints = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            name, sep, kind = line.partition("=")
            kind = kind.strip()
            if not sep or kind not in (NUMERIC, CATEGORICAL):
                raise InvalidData(f"{path}:{lineno}: expected name=numeric|categorical")
            hints[name.strip()] = kind
    return hints


def _build_column(name, cells, kind):
    if kind == NUMERIC:
        vals = np.array([np.nan if _is_missing(c) or _parse_float(c) is None else _parse_float(c)
                         for c in cells], dtype=float)
        return Column(name, NUMERIC, vals)
    vals = np.empty(len(cells), dtype=object)
    for i, c in enumerate(cells):
        vals[i] = None if _is_missing(c) else c.strip()
    return Column(name, CATEGORICAL, vals)


def _infer_kind(cells) -> str:
    present = [c for c in cells if not _is_missing(c)]
    if present and all(_parse_float(c) is not None for c in present):
        return NUMERIC
    return CATEGORICAL


def load_table(path, label_column=None, type_hints=None, drop=()) -> Dataset:
    """Read a CSV into a :class:`Dataset` without class-count checks.

    The label column (if named and present) is split off into ``y``.
    """
    type_hints = dict(type_hints or {})
    if not os.path.exists(path):
        raise DataFileNotFound(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows:
        raise TooFewRows(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    for lineno, r in enumerate(body, 2):
        if len(r) != len(header):
            raise RaggedRows(f"{path}:{lineno}: {len(r)} fields, header has {len(header)}")
    y = None
    if label_column is not None and label_column in header:
        li = header.index(label_column)
        y = []
        for lineno, r in enumerate(body, 2):
            if _is_missing(r[li]):
                raise InvalidData(f"{path}:{lineno}: missing class label")
            y.append(r[li].strip())
        y = tuple(y)
    cols = []
    for j, name in enumerate(header):
        if name == label_column or name in drop:
            continue
        cells = [r[j] for r in body]
        kind = type_hints.get(name) or _infer_kind(cells)
        cols.append(_build_column(name, cells, kind))
    return Dataset(tuple(cols), y)


def load_csv(path, label_column, type_hints=None, drop=()) -> Dataset:
    """Read a labelled two-class CSV (first row header, "" or "?" = missing)."""
    if not os.path.exists(path):
        raise DataFileNotFound(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh), [])
    if label_column not in [h.strip() for h in header]:
        raise MissingLabelColumn(f"{path}: label column {label_column!r} not in header")
    ds = load_table(path, label_column, type_hints, drop)
    if ds.m < 2:
        raise TooFewRows(f"{path}: need at least 2 rows, found {ds.m}")
    n_classes = len(set(ds.y))
    if n_classes != 2:
        raise TooFewClasses(f"{path}: expected exactly two classes, found {n_classes}")
    return ds


def write_csv(path, ds: Dataset, label_column="class"):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ds.names + ([label_column] if ds.y is not None else []))
        for i in range(ds.m):
            row = []
            for c in ds.columns:
                v = c.values[i]
                if c.kind == NUMERIC:
                    row.append("" if np.isnan(v) else repr(float(v)))
                else:
                    row.append("" if v is None else v)
            if ds.y is not None:
                row.append(ds.y[i])
            w.writerow(row)


# -- preprocessing ---------------------------------------------------------------

@dataclass
class ColumnStats:
    name: str
    kind: str
    fill: object = None  # mean (numeric) or most frequent category
    mean: float = 0.0
    std: float = 1.0
    vocabulary: list = field(default_factory=list)

    @property
    def width(self) -> int:
        return 1 if self.kind == NUMERIC else len(self.vocabulary)


@dataclass
class Preprocessor:
    columns: list
    standardize: bool = True
    fitted: bool = False

    @property
    def output_dim(self) -> int:
        return sum(c.width for c in self.columns)

    @property
    def kinds(self) -> dict:
        return {c.name: c.kind for c in self.columns}

    def feature_names(self) -> list:
        out = []
        for c in self.columns:
            if c.kind == NUMERIC:
                out.append(c.name)
            else:
                out.extend(f"{c.name}={v}" for v in c.vocabulary)
        return out

    def to_dict(self) -> dict:
        cols = []
        for c in self.columns:
            if c.kind == NUMERIC:
                cols.append({"name": c.name, "kind": c.kind, "fill": c.fill, "mean": c.mean, "std": c.std})
            else:
                cols.append({"name": c.name, "kind": c.kind, "fill": c.fill, "vocabulary": list(c.vocabulary)})
        return {"standardize": self.standardize, "columns": cols}

    @classmethod
    def from_dict(cls, doc) -> "Preprocessor":
        cols = [ColumnStats(**c) for c in doc["columns"]]
        return cls(cols, bool(doc["standardize"]), fitted=True)


def fit_preprocessor(train: Dataset, standardize: bool = True) -> Preprocessor:
    """Imputation, one-hot vocabularies and z-score parameters from ``train`` only."""
    stats = []
    for col in train.columns:
        present = ~col.missing
        if col.kind == NUMERIC:
            if not present.any():
                raise InvalidData(f"numeric column {col.name!r} has no observed values")
            mean = float(np.mean(col.values[present]))
            filled = np.where(present, col.values, mean)
            mu = float(np.mean(filled))
            sd = float(np.std(filled))  # population
            stats.append(ColumnStats(col.name, NUMERIC, fill=mean, mean=mu, std=sd))
        else:
            seen = [v for v in col.values[present]]
            counts = Counter(seen)
            vocab = sorted(counts)
            fill = min(counts, key=lambda v: (-counts[v], v)) if counts else None
            stats.append(ColumnStats(col.name, CATEGORICAL, fill=fill, vocabulary=vocab))
    return Preprocessor(stats, standardize, fitted=True)


def transform(p: Preprocessor, d: Dataset) -> np.ndarray:
    """Fully numeric, finite design matrix for ``d``."""
    if not p.fitted:
        raise InvalidArgument("preprocessor is not fitted")
    by_name = {c.name: c for c in d.columns}
    blocks = []
    for st in p.columns:
        col = by_name.get(st.name)
        if col is None:
            raise InvalidArgument(f"column {st.name!r} is missing from the input")
        if col.kind != st.kind:
            raise InvalidArgument(f"column {st.name!r} is {col.kind}, expected {st.kind}")
        if st.kind == NUMERIC:
            v = np.where(np.isnan(col.values), st.fill, col.values)
            if p.standardize:
                v = (v - st.mean) / st.std if st.std > STD_FLOOR else np.zeros_like(v)
            blocks.append(v[:, None])
        else:
            index = {v: i for i, v in enumerate(st.vocabulary)}
            block = np.zeros((d.m, len(st.vocabulary)))
            for i, v in enumerate(col.values):
                if v is None:
                    v = st.fill
                j = index.get(v)
                if j is not None:
                    block[i, j] = 1.0
            blocks.append(block)
    if not blocks:
        return np.zeros((d.m, 0))
    return np.hstack(blocks)


# -- folds -----------------------------------------------------------------------

@dataclass(frozen=True)
class FoldSplit:
    folds: tuple

    @property
    def k(self) -> int:
        return len(self.folds)

    def train_test(self, i):
        test = np.asarray(self.folds[i], dtype=int)
        train = np.sort(np.concatenate([np.asarray(f, dtype=int) for j, f in enumerate(self.folds) if j != i]))
        return train, test


def stratified_kfold(y, k: int, seed: int) -> FoldSplit:
    """Shuffle each class with a seeded generator and deal it round-robin into ``k`` folds.

    Dealing continues from the fold where the previous class stopped, so total
    fold sizes stay balanced as well.
    """
    if k < 2:
        raise InvalidArgument(f"k must be >= 2, got {k}")
    y = list(y)
    by_class = {}
    for i, v in enumerate(y):
        by_class.setdefault(v, []).append(i)
    for cls in sorted(by_class, key=str):
        if len(by_class[cls]) < k:
            raise InvalidArgument(f"class {cls!r} has {len(by_class[cls])} members, fewer than k={k}")
    rng = np.random.default_rng(seed)
    folds = [[] for _ in range(k)]
    nxt = 0
    for cls in sorted(by_class, key=str):
        idx = np.array(by_class[cls])
        rng.shuffle(idx)
        for i in idx:
            folds[nxt].append(int(i))
            nxt = (nxt + 1) % k
    return FoldSplit(tuple(tuple(sorted(f)) for f in folds))
