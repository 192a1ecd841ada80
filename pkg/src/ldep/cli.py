"""Command-line entry point: ``ldep {train,predict,crossval,benchmark,plot}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 solver/training error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile

import numpy as np

from . import data as dp
from .ccp import encode_labels
from .errors import InvalidArgument, InvalidData, LdepError, SolverError
from .experiment import (MODEL_KINDS, RESULTS_HEADER, benchmark_table, build_manifest, crossval,
                         fit_model, fold_table, load_dataset, positive_class, read_keyvalue,
                         results_csv_rows, run_benchmark, suite_manifests)
from .lp import dump_problem
from .morph import dumps_model, loads_model
from .plot import render_boundary_svg

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SOLVER = 0, 1, 2, 3

log = logging.getLogger("ldep")


class UsageError(LdepError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _atomic_write(path, text):
    """Write via a temporary file so a failed run leaves no partial output."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _run_flags(p):
    p.add_argument("--manifest", help="flat key=value run manifest; flags override it")
    p.add_argument("--data", help="CSV file (header row, '' or '?' = missing)")
    p.add_argument("--labels", help="name of the class-label column (default: class)")
    p.add_argument("--positive-class", help="class mapped to +1 (the F1 positive class)")
    p.add_argument("--model", choices=MODEL_KINDS)
    p.add_argument("--beta", type=float, help="DEP mixing weight (model=dep)")
    p.add_argument("--r1", type=int)
    p.add_argument("--r2", type=int)
    p.add_argument("--folds", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--max-ccp-iter", type=int)
    p.add_argument("--standardize", choices=("on", "off"))
    p.add_argument("--schema", help="sidecar type hints: column=numeric|categorical per line")
    p.add_argument("--features", help="comma-separated subset of feature columns")
    p.add_argument("--lp-backend", choices=("auto", "simplex", "highs"))


FLAG_KEYS = ("data", "labels", "positive_class", "model", "beta", "r1", "r2", "folds", "seed",
             "restarts", "max_ccp_iter", "standardize", "schema", "features", "lp_backend")


def _manifest_from_args(args):
    settings = {}
    base = None
    if args.manifest:
        try:
            settings.update(read_keyvalue(args.manifest))
        except OSError as exc:
            raise InvalidData(f"cannot read manifest {args.manifest}: {exc.strerror}") from None
        base = os.path.dirname(os.path.abspath(args.manifest))
    manifest = build_manifest(settings, base)
    flags = {k: getattr(args, k) for k in FLAG_KEYS if getattr(args, k, None) is not None}
    if flags:
        merged = dict(settings)
        merged.update(flags)
        # flag paths are relative to the working directory, manifest paths to the manifest
        for key in ("data", "schema"):
            if key in flags:
                merged[key] = os.path.abspath(flags[key])
            elif key in merged and base and not os.path.isabs(merged[key]):
                merged[key] = os.path.join(base, merged[key])
        manifest = build_manifest(merged, None)
    return manifest


def cmd_train(args) -> int:
    m = _manifest_from_args(args)
    ds = load_dataset(m)
    pos = positive_class(m, ds)
    y, labels = encode_labels(list(ds.y), pos)
    pre = dp.fit_preprocessor(ds, m.standardize)
    X = dp.transform(pre, ds)
    last_lp = []

    def keep_last(sub):
        last_lp[:] = [sub]

    hook = keep_last if args.dump_lp else None
    try:
        model, rep = fit_model(m.model, X, y, labels, m.train_config(), m.beta, on_subproblem=hook)
    finally:
        if args.dump_lp and last_lp:
            _atomic_write(args.dump_lp, dump_problem(last_lp[-1].lp))
    extra = {"label_column": m.labels, "preprocessing": pre.to_dict(),
             "train_status": rep.status}
    if m.model == "dep":
        extra["beta"] = m.beta
    out = args.out or "model.json"
    report = args.report or out + ".report.txt"
    _atomic_write(out, dumps_model(model, extra))
    _atomic_write(report, rep.to_table())
    final = rep.hinge_history[-1] if rep.hinge_history else float("nan")
    print(f"trained {m.model} on {ds.m} rows x {X.shape[1]} features: status={rep.status} "
          f"iterations={rep.iterations} hinge={final:.6g}")
    print(f"model -> {out}\nreport -> {report}")
    return EXIT_OK


def _load_model_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InvalidData(f"cannot read model file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InvalidData(f"{path} is not a model document: {exc}") from None
    model = loads_model(json.dumps(doc))
    if "preprocessing" not in doc:
        raise InvalidData(f"{path} carries no preprocessing section")
    pre = dp.Preprocessor.from_dict(doc["preprocessing"])
    if pre.output_dim != model.input_dim:
        raise InvalidData(f"{path}: preprocessing yields {pre.output_dim} features, model expects {model.input_dim}")
    return model, pre, doc


def _features_for(pre, path, label_column):
    ds = dp.load_table(path, label_column, pre.kinds)
    try:
        return ds, dp.transform(pre, ds)
    except InvalidArgument as exc:
        raise InvalidData(f"{path}: {exc}") from None


def cmd_predict(args) -> int:
    model, pre, doc = _load_model_file(args.model_file)
    ds, X = _features_for(pre, args.data, doc.get("label_column"))
    preds = model.predict(X) if ds.m else []
    lines = ["prediction"] + [str(p) for p in preds]
    text = "\n".join(lines) + "\n"
    if args.out:
        _atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_crossval(args) -> int:
    m = _manifest_from_args(args)
    results = crossval(m)
    timing = args.timing == "on"
    sys.stdout.write(fold_table(m.display_name, results))
    if args.out:
        rows = [RESULTS_HEADER] + results_csv_rows(m.display_name, results, timing)
        _atomic_write(args.out, "\n".join(rows) + "\n")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    overrides = {k: getattr(args, k) for k in FLAG_KEYS if getattr(args, k, None) is not None}
    for key in ("data", "schema"):
        if key in overrides:
            overrides[key] = os.path.abspath(overrides[key])
    try:
        entries = suite_manifests(args.suite, overrides)
    except OSError as exc:
        raise InvalidData(f"cannot read suite {args.suite}: {exc.strerror}") from None
    timing = args.timing == "on"
    rows = run_benchmark(entries, timing)
    table = benchmark_table(rows, timing)
    sys.stdout.write(table)
    if args.out:
        _atomic_write(args.out, table)
    if args.results:
        lines = [RESULTS_HEADER]
        for r in rows:
            if r.results:
                lines += results_csv_rows(r.name, r.results, timing)
        _atomic_write(args.results, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_plot(args) -> int:
    model, pre, doc = _load_model_file(args.model_file)
    label_col = doc.get("label_column")
    numeric = [c for c in pre.columns if c.kind == dp.NUMERIC]
    if model.input_dim != 2 or len(pre.columns) != 2 or len(numeric) != 2:
        raise UsageError(f"model has {model.input_dim} input features; boundary plots need exactly two "
                         "numeric features (train with --features a,b)")
    ds, X = _features_for(pre, args.data, label_col)
    names = [c.name for c in pre.columns]
    by_name = {c.name: c for c in ds.columns}
    raw = np.column_stack([np.where(np.isnan(by_name[st.name].values), st.fill, by_name[st.name].values)
                           for st in pre.columns])

    def decision(P):
        grid = dp.Dataset(tuple(dp.Column(n, dp.NUMERIC, P[:, i]) for i, n in enumerate(names)))
        return model.decision_function(dp.transform(pre, grid))

    if ds.y is not None:
        signs = [1 if v == model.labels.positive_label else -1 for v in ds.y]
    else:
        signs = [1 if t >= 0 else -1 for t in model.decision_function(X)]
    svg = render_boundary_svg(decision, raw, signs,
                              (model.labels.positive_label, model.labels.negative_label),
                              grid=args.grid, feature_names=names)
    _atomic_write(args.out, svg)
    return EXIT_OK


def build_parser():
    ap = _Parser(prog="ldep", description="Linear dilation-erosion perceptron toolkit.")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train on a full dataset and write a model file")
    _run_flags(p)
    p.add_argument("--out", help="model file (default model.json)")
    p.add_argument("--report", help="training report table (default <out>.report.txt)")
    p.add_argument("--dump-lp", help="write the last LP subproblem here in plain text")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict class names for the rows of a CSV")
    p.add_argument("model_file")
    p.add_argument("--data", required=True)
    p.add_argument("--out", help="predictions CSV (default: standard output)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("crossval", help="stratified k-fold F1 / accuracy")
    _run_flags(p)
    p.add_argument("--out", help="results CSV (dataset,fold,f1,accuracy,train_seconds)")
    p.add_argument("--timing", choices=("on", "off"), default="on",
                   help="record wall-clock training time (off writes 0.000)")
    p.set_defaults(func=cmd_crossval)

    p = sub.add_parser("benchmark", help="cross-validate every dataset of a suite file")
    p.add_argument("suite")
    _run_flags(p)
    p.add_argument("--out", help="write the summary table here as well")
    p.add_argument("--results", help="per-fold results CSV")
    p.add_argument("--timing", choices=("on", "off"), default="on")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("plot", help="SVG of the decision regions of a 2-feature model")
    p.add_argument("model_file")
    p.add_argument("--data", required=True, help="CSV with the two features (labels optional)")
    p.add_argument("--out", required=True)
    p.add_argument("--grid", type=int, default=200)
    p.set_defaults(func=cmd_plot)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"ldep: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvalidData as exc:
        print(f"ldep: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SolverError as exc:
        print(f"ldep: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except InvalidArgument as exc:
        print(f"ldep: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
