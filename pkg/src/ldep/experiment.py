"""Run manifests, cross-validation and the multi-dataset benchmark table."""

from __future__ import annotations

import dataclasses
import logging
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import data as dp
from .ccp import (LabeledData, TrainConfig, TrainReport, encode_labels, train_dep, train_ldep,
                  train_morph_perceptron)
from .errors import InvalidArgument, InvalidData, LdepError, SolverError
from .metrics import accuracy, aggregate, confusion, f1
from .morph import LabelMap, as_ldep

log = logging.getLogger(__name__)

MODEL_KINDS = ("ldep", "dep", "dilation", "erosion")
CONFIG_FIELDS = {f.name: f.type for f in dataclasses.fields(TrainConfig)}


@dataclass
class RunManifest:
    data: str = ""
    labels: str = "class"
    positive_class: str | None = None
    model: str = "ldep"
    beta: float = 0.5
    folds: int = 5
    seed: int = 0
    standardize: bool = True
    schema: str | None = None
    features: list | None = None
    name: str | None = None
    config: TrainConfig = field(default_factory=TrainConfig)

    @property
    def display_name(self) -> str:
        return self.name or os.path.splitext(os.path.basename(self.data))[0]

    def train_config(self) -> TrainConfig:
        # the run seed drives initialisation as well as the folds
        return dataclasses.replace(self.config, seed=self.seed)


def read_keyvalue(path) -> list:
    """Ordered ``(key, value)`` pairs from a flat key=value file."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise InvalidArgument(f"{path}:{lineno}: expected key=value")
            pairs.append((key.strip().replace("-", "_"), value.strip()))
    return pairs


def _to_bool(v) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("on", "true", "yes", "1"):
        return True
    if s in ("off", "false", "no", "0"):
        return False
    raise InvalidArgument(f"expected on/off, got {v!r}")


def _coerce(tp, v):
    if isinstance(tp, str):
        tp = {"int": int, "float": float, "str": str}[tp]
    return tp(v)


def build_manifest(settings: dict, base_dir: str | None = None) -> RunManifest:
    """Manifest from a flat mapping; relative paths resolve against ``base_dir``."""
    m = RunManifest()
    cfg = {}
    for key, value in settings.items():
        if value is None:
            continue
        key = key.replace("-", "_")
        if key in CONFIG_FIELDS:
            cfg[key] = _coerce(CONFIG_FIELDS[key], value)
        elif key in ("data", "schema"):
            path = str(value)
            if base_dir and not os.path.isabs(path):
                path = os.path.join(base_dir, path)
            setattr(m, key, path)
        elif key in ("labels", "positive_class", "name"):
            setattr(m, key, str(value))
        elif key == "model":
            if value not in MODEL_KINDS:
                raise InvalidArgument(f"model must be one of {MODEL_KINDS}, got {value!r}")
            m.model = value
        elif key == "beta":
            m.beta = float(value)
        elif key in ("folds", "seed"):
            setattr(m, key, int(value))
        elif key == "standardize":
            m.standardize = _to_bool(value)
        elif key == "features":
            m.features = [f.strip() for f in value.split(",") if f.strip()] if isinstance(value, str) else list(value)
        elif key == "dataset":
            continue
        else:
            raise InvalidArgument(f"unknown manifest key {key!r}")
    m.config = TrainConfig(**cfg)
    return m


def load_dataset(m: RunManifest) -> dp.Dataset:
    if not m.data:
        raise InvalidArgument("no dataset given (--data or data= in the manifest)")
    hints = dp.read_schema(m.schema) if m.schema else None
    ds = dp.load_csv(m.data, m.labels, hints)
    if m.features:
        ds = ds.select(m.features)
    return ds


def fit_model(kind, X, y, labels: LabelMap, config: TrainConfig, beta=0.5, on_subproblem=None):
    """Train one classifier of ``kind`` and return it in max-affine form."""
    data = LabeledData(X, y)
    if kind == "ldep":
        model, rep = train_ldep(data, config, labels, on_subproblem=on_subproblem)
    elif kind == "dep":
        model, rep = train_dep(data, beta, config, labels, on_subproblem=on_subproblem)
    elif kind in ("dilation", "erosion"):
        model, rep = train_morph_perceptron(data, kind, config, labels, on_subproblem=on_subproblem)
    else:
        raise InvalidArgument(f"unknown model kind {kind!r}")
    if all(s == "subproblem_failed" for s in rep.restart_status):
        raise SolverError(f"every restart failed to solve its LP subproblem ({kind})")
    return as_ldep(model), rep


def positive_class(m: RunManifest, ds: dp.Dataset) -> str:
    if m.positive_class is None:
        raise InvalidArgument(f"positive class not set; classes are {ds.classes}")
    if m.positive_class not in ds.classes:
        raise InvalidData(f"positive class {m.positive_class!r} not among {ds.classes}")
    return m.positive_class


@dataclass
class FoldResult:
    fold: int
    f1: float
    accuracy: float
    train_seconds: float
    report: TrainReport | None = None


def crossval(m: RunManifest, ds: dp.Dataset | None = None) -> list:
    """Stratified k-fold scores; preprocessing is refitted on each training part."""
    ds = ds if ds is not None else load_dataset(m)
    pos = positive_class(m, ds)
    y_all, labels = encode_labels(list(ds.y), pos)
    try:
        split = dp.stratified_kfold(ds.y, m.folds, m.seed)
    except InvalidArgument as exc:
        raise InvalidData(str(exc)) from None
    config = m.train_config()
    results = []
    for i in range(split.k):
        tr, te = split.train_test(i)
        train, test = ds.subset(tr), ds.subset(te)
        pre = dp.fit_preprocessor(train, m.standardize)
        X_tr, X_te = dp.transform(pre, train), dp.transform(pre, test)
        t0 = time.perf_counter()
        model, rep = fit_model(m.model, X_tr, y_all[tr], labels, config, m.beta)
        secs = time.perf_counter() - t0
        pred = np.where(model.decision_function(X_te) >= 0, 1, -1)
        cm = confusion(y_all[te], pred)
        results.append(FoldResult(i, f1(cm), accuracy(cm), secs, rep))
        log.info("%s fold %d: F1 %.4f acc %.4f (%.1fs)", m.display_name, i, results[-1].f1,
                 results[-1].accuracy, secs)
    return results


def results_csv_rows(name, results, timing=True) -> list:
    return [f"{name},{r.fold},{r.f1!r},{r.accuracy!r},{(r.train_seconds if timing else 0.0):.3f}"
            for r in results]


RESULTS_HEADER = "dataset,fold,f1,accuracy,train_seconds"


def fold_table(name, results) -> str:
    lines = [f"dataset: {name}", f"{'fold':>4}  {'f1':>8}  {'accuracy':>8}"]
    for r in results:
        lines.append(f"{r.fold:>4}  {r.f1:>8.4f}  {r.accuracy:>8.4f}")
    mean, std, med, mad = aggregate([r.f1 for r in results])
    lines.append(f"F1 mean {mean:.4f} std {std:.4f} median {med:.4f} mad {mad:.4f}")
    am, asd, _, _ = aggregate([r.accuracy for r in results])
    lines.append(f"accuracy mean {am:.4f} std {asd:.4f}")
    return "\n".join(lines) + "\n"


@dataclass
class BenchmarkRow:
    name: str
    results: list | None = None
    error: str | None = None
    seconds: float = 0.0

    @property
    def f1_scores(self):
        return [r.f1 for r in self.results] if self.results else []


def suite_manifests(path, overrides: dict) -> list:
    """Expand a suite file into per-dataset manifests.

    Suite keys other than ``dataset`` are defaults for every entry; each
    ``dataset=<manifest>`` line adds one entry, in file order.  Entry
    manifests override suite defaults and ``overrides`` (command-line flags)
    override both.
    """
    base = os.path.dirname(os.path.abspath(path))
    pairs = read_keyvalue(path)
    defaults = {k: v for k, v in pairs if k != "dataset"}
    out = []
    for k, v in pairs:
        if k != "dataset":
            continue
        mpath = v if os.path.isabs(v) else os.path.join(base, v)
        entry = dict(defaults)
        try:
            entry_pairs = read_keyvalue(mpath)
        except OSError as exc:
            out.append((v, None, f"cannot read manifest: {exc.strerror}"))
            continue
        entry_base = os.path.dirname(mpath)
        resolved = dict(entry_pairs)
        for key in ("data", "schema"):
            if key in resolved and not os.path.isabs(resolved[key]):
                resolved[key] = os.path.join(entry_base, resolved[key])
            elif key in entry and not os.path.isabs(entry[key]):
                entry[key] = os.path.join(base, entry[key])
        entry.update(resolved)
        entry.update({k2: v2 for k2, v2 in overrides.items() if v2 is not None})
        try:
            out.append((v, build_manifest(entry), None))
        except LdepError as exc:
            out.append((v, None, str(exc)))
    return out


def run_benchmark(entries, timing=True) -> list:
    rows = []
    for label, m, err in entries:
        if err is not None:
            rows.append(BenchmarkRow(label, error=err))
            continue
        t0 = time.perf_counter()
        try:
            res = crossval(m)
        except (LdepError, OSError) as exc:
            log.error("%s failed: %s", m.display_name, exc)
            rows.append(BenchmarkRow(m.display_name, error=str(exc)))
            continue
        secs = time.perf_counter() - t0 if timing else 0.0
        rows.append(BenchmarkRow(m.display_name, res, seconds=secs))
    return rows


def benchmark_table(rows, timing=True) -> str:
    """Per-dataset F1 (percent, mean +- std) with MEAN +- STD and MEDIAN +- MAD rows."""
    width = max([len(r.name) for r in rows] + [14])
    head = f"{'dataset':<{width}}  {'F1 (%)':>14}"
    lines = [head + (f"  {'train s/fold':>12}" if timing else "")]
    means = []
    for r in rows:
        if r.error is not None:
            lines.append(f"{r.name:<{width}}  ERROR: {r.error}")
            continue
        mean, std, _, _ = aggregate(r.f1_scores)
        means.append(100 * mean)
        line = f"{r.name:<{width}}  {100 * mean:>6.1f} +- {100 * std:<4.1f}"
        if timing:
            line += f"  {np.mean([x.train_seconds for x in r.results]):>12.2f}"
        lines.append(line)
    if means:
        mean, std, med, mad = aggregate(means)
        lines.append(f"{'MEAN +- STD':<{width}}  {mean:>6.1f} +- {std:<4.1f}")
        lines.append(f"{'MEDIAN +- MAD':<{width}}  {med:>6.1f} +- {mad:<4.1f}")
    else:
        lines.append(f"{'MEAN +- STD':<{width}}  n/a")
        lines.append(f"{'MEDIAN +- MAD':<{width}}  n/a")
    return "\n".join(lines) + "\n"
