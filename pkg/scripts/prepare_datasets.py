"""Convert raw benchmark downloads into the CSV + manifest layout used by ``ldep``.

Sub-commands:

  banknote RAW     UCI ``data_banknote_authentication.txt`` (5 comma-separated
                   numbers per line, no header) -> data/banknote.csv
  acute RAW        UCI ``diagnosis.data`` (UTF-16, tab-separated, decimal
                   commas) -> data/acute-inflammations.csv, class = the
                   bladder-inflammation decision
  keel SOURCE      a directory of KEEL ``.dat`` files or the keel-ds wheel ->
                   data/keel/<name>.csv plus one manifest each and
                   data/suites/keel.suite

Every CSV has a header row and a ``class`` column; manifests sit in
data/manifests/ and reference the CSV relative to themselves.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import zipfile
from collections import Counter

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DATA = os.path.join(ROOT, "data")
MANIFESTS = os.path.join(DATA, "manifests")
SUITES = os.path.join(DATA, "suites")

# KEEL file name -> benchmark display name
BENCHMARK_KEEL = {
    "australian": "Australian", "banana": "Banana", "bands": "Cylinder Bands",
    "wisconsin": "Breast Cancer Wisconsin", "chess": "Chess", "crx": "Credit Approval",
    "german": "Credit-g", "pima": "Diabetes", "haberman": "Haberman", "ionosphere": "Ionosphere",
    "monk-2": "Monks-2", "mushroom": "Mushroom", "phoneme": "Phoneme", "sonar": "Sonar",
    "spambase": "Spambase", "tic-tac-toe": "Tic-Tac-Toe", "titanic": "Titanic",
}

ACUTE_COLUMNS = ["temperature", "nausea", "lumbar_pain", "urine_pushing", "micturition_pains",
                 "burning_urethra"]


def write_table(path, header, rows):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {path} ({len(rows)} rows)")


def write_manifest(name, csv_path, positive, extra=()):
    os.makedirs(MANIFESTS, exist_ok=True)
    rel = os.path.relpath(csv_path, MANIFESTS)
    lines = [f"name={name}", f"data={rel}", "labels=class", f"positive_class={positive}", *extra]
    path = os.path.join(MANIFESTS, f"{name}.manifest")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def banknote(raw):
    rows = []
    with open(raw, encoding="utf-8") as fh:
        for line in fh:
            parts = [p.strip() for p in line.split(",")]
            if len(parts) == 5:
                rows.append(parts)
    out = os.path.join(DATA, "banknote.csv")
    write_table(out, ["variance", "skewness", "curtosis", "entropy", "class"], rows)
    write_manifest("banknote", out, "1")


def _read_text_any(path):
    raw = open(path, "rb").read()
    if raw[:2] in (b"\xff\xfe", b"\xfe\xff"):
        return raw.decode("utf-16")
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError:
        return raw.decode("latin-1")


def acute(raw):
    rows = []
    for line in _read_text_any(raw).splitlines():
        parts = [p.strip() for p in line.replace("\t", " ").split()]
        if len(parts) != 8:
            continue
        temp = parts[0].replace(",", ".")
        rows.append([temp, *parts[1:6], parts[6]])  # parts[7] is the nephritis decision, unused
    out = os.path.join(DATA, "acute-inflammations.csv")
    write_table(out, ACUTE_COLUMNS + ["class"], rows)
    write_manifest("acute-inflammations", out, "yes")


def _keel_sources(source):
    """(name, text) for each benchmark dataset among the raw KEEL .dat files.

    ``source`` is a directory of .dat files or the keel-ds wheel; the wheel
    keeps haberman under its imbalanced collection only.
    """
    found = {}
    if os.path.isdir(source):
        for fn in sorted(os.listdir(source)):
            if fn.endswith(".dat") and fn[:-4] in BENCHMARK_KEEL:
                with open(os.path.join(source, fn), encoding="utf-8") as fh:
                    found[fn[:-4]] = fh.read()
    else:
        with zipfile.ZipFile(source) as z:
            for n in sorted(z.namelist()):
                name = os.path.basename(n)[:-4]
                if "/raw/" in n and n.endswith(".dat") and name in BENCHMARK_KEEL and name not in found:
                    found[name] = z.read(n).decode("utf-8")
    yield from sorted(found.items())


def keel(source):
    entries = []
    for name, text in _keel_sources(source):
        rows = []
        for rec in csv.reader(io.StringIO(text), skipinitialspace=True):
            if not rec or rec[0].startswith("@"):
                continue
            rows.append(["" if v.strip() in ("?", "<null>") else v.strip() for v in rec])
        if not rows:
            continue
        width = len(rows[0])
        classes = Counter(r[-1] for r in rows)
        if len(classes) != 2 or any(len(r) != width for r in rows):
            print(f"skip {name}: {len(classes)} classes", file=sys.stderr)
            continue
        # "positive" when KEEL names it so, otherwise the minority class
        positive = "positive" if "positive" in classes else min(sorted(classes), key=lambda c: classes[c])
        out = os.path.join(DATA, "keel", f"{name}.csv")
        write_table(out, [f"f{i + 1}" for i in range(width - 1)] + ["class"], rows)
        write_manifest(f"keel-{name}", out, positive)
        entries.append(f"keel-{name}")
    os.makedirs(SUITES, exist_ok=True)
    with open(os.path.join(SUITES, "keel.suite"), "w", encoding="utf-8") as fh:
        fh.write("# KEEL copies of the benchmark datasets (not acceptance-gated)\nfolds=5\nr1=10\nr2=10\n")
        fh.writelines(f"dataset=../manifests/{e}.manifest\n" for e in entries)
    print(f"wrote {len(entries)} manifests and data/suites/keel.suite")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="cmd", required=True)
    for cmd in ("banknote", "acute", "keel"):
        sub.add_parser(cmd).add_argument("source")
    args = ap.parse_args(argv)
    {"banknote": banknote, "acute": acute, "keel": keel}[args.cmd](args.source)


if __name__ == "__main__":
    main()
