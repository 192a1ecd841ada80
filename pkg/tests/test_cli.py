import json
import os
import shutil
import subprocess
import xml.etree.ElementTree as ET

import pytest

from ldep import ccp, cli
from ldep.lp import LpSolution, load_problem, lp_solve
from ldep.plot import NEG_FILL, POS_FILL

FAST = ["--r1", "2", "--r2", "2", "--restarts", "1"]


@pytest.fixture
def run(capsys):
    def _run(*argv):
        code = cli.main([str(a) for a in argv])
        out, err = capsys.readouterr()
        return code, out, err
    return _run


@pytest.fixture
def work(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


def toy_pair(d):
    return write(d / "pair.csv", "x,class\n-1,neg\n1,pos\n")


def toy_clusters(d, name="clusters.csv", shift=0.0):
    """Two clusters of repeated points: every held-out row duplicates a training row."""
    rows = ["a,b,class"]
    rows += [f"{-1 + shift},{-1 - shift},neg"] * 4 + [f"{1 + shift},{1 + shift},pos"] * 4
    return write(d / name, "\n".join(rows) + "\n")


def toy_xor(d):
    return write(d / "xor.csv", "a,b,class\n0,0,n\n1,1,n\n1,0,p\n0,1,p\n")


# -- train ---------------------------------------------------------------------------------

def test_train_separable_pair(run, work):
    data = toy_pair(work)
    code, out, _ = run("train", "--data", data, "--positive-class", "pos", "--r1", 1, "--r2", 1,
                       "--restarts", 1, "--out", "m.json")
    assert code == 0
    doc = json.loads((work / "m.json").read_text())
    assert doc["input_dim"] == 1 and doc["positive_label"] == "pos"
    table = (work / "m.json.report.txt").read_text().splitlines()
    assert table[0].startswith("# status=converged")
    assert float(table[-1].split()[1]) == 0.0  # final hinge
    code, out, _ = run("predict", "m.json", "--data", data)
    assert out.splitlines() == ["prediction", "neg", "pos"]


def test_train_malformed_csv_leaves_no_model(run, work):
    bad = write(work / "bad.csv", "x,class\n1,a\n2\n3,b\n")
    code, _, err = run("train", "--data", bad, "--positive-class", "a", "--out", "m.json")
    assert code == 2 and "data error" in err
    assert not (work / "m.json").exists()
    assert not [p for p in os.listdir(work) if p.startswith(".tmp-")]


def test_train_is_byte_identical_across_runs(run, work):
    data = toy_xor(work)
    for out in ("a.json", "b.json"):
        assert run("train", "--data", data, "--positive-class", "p", *FAST, "--seed", 4, "--out", out)[0] == 0
    assert (work / "a.json").read_bytes() == (work / "b.json").read_bytes()
    assert (work / "a.json.report.txt").read_bytes() == (work / "b.json.report.txt").read_bytes()


def test_manifest_with_flag_override(run, work):
    toy_pair(work)
    write(work / "run.manifest", "data=pair.csv\npositive_class=pos\nr1=1\nr2=1\nrestarts=3\nmodel=dep\n")
    code, out, _ = run("train", "--manifest", "run.manifest", "--model", "ldep", "--restarts", 1)
    assert code == 0 and "trained ldep" in out
    assert json.loads((work / "model.json").read_text())["kind"] == "ldep"


def test_dump_lp(run, work):
    data = toy_pair(work)
    code, _, _ = run("train", "--data", data, "--positive-class", "pos", "--r1", 1, "--r2", 1,
                     "--restarts", 1, "--dump-lp", "last.lp")
    assert code == 0
    p = load_problem((work / "last.lp").read_text())
    assert p.n_vars == 10 and p.n_rows == 4
    assert lp_solve(p).status == "optimal"


@pytest.mark.parametrize("kind", ["dep", "dilation", "erosion"])
def test_train_baselines(run, work, kind):
    code, _, _ = run("train", "--data", toy_pair(work), "--positive-class", "pos", "--model", kind,
                     "--restarts", 1)
    assert code == 0
    assert json.loads((work / "model.json").read_text())["kind"] == kind


# -- predict -------------------------------------------------------------------------------

def test_predict_header_only_and_unseen_category(run, work):
    data = write(work / "c.csv", "k,x,class\nred,-1,n\nblue,1,p\nred,-2,n\nblue,2,p\n")
    assert run("train", "--data", data, "--positive-class", "p", *FAST, "--out", "m.json")[0] == 0
    empty = write(work / "empty.csv", "k,x\n")
    code, _, _ = run("predict", "m.json", "--data", empty, "--out", "pred.csv")
    assert code == 0 and (work / "pred.csv").read_text() == "prediction\n"
    unseen = write(work / "u.csv", "k,x\ngreen,3\n")
    code, out, _ = run("predict", "m.json", "--data", unseen)
    assert code == 0 and len(out.splitlines()) == 2 and out.splitlines()[1] in ("n", "p")


def test_predict_schema_mismatch_names_column(run, work):
    assert run("train", "--data", toy_pair(work), "--positive-class", "pos", "--r1", 1, "--r2", 1,
               "--restarts", 1, "--out", "m.json")[0] == 0
    other = write(work / "o.csv", "y\n1\n")
    code, _, err = run("predict", "m.json", "--data", other)
    assert code == 2 and "'x'" in err


# -- crossval and benchmark -----------------------------------------------------------------

def test_crossval_toy_k2(run, work):
    data = toy_clusters(work)
    code, out, _ = run("crossval", "--data", data, "--positive-class", "pos", "--folds", 2, *FAST,
                       "--out", "res.csv", "--timing", "off")
    assert code == 0
    lines = (work / "res.csv").read_text().splitlines()
    assert lines[0] == "dataset,fold,f1,accuracy,train_seconds"
    assert len(lines) == 3
    assert all(float(l.split(",")[2]) == 1.0 for l in lines[1:])
    assert "F1 mean 1.0000" in out


def test_crossval_is_byte_identical(run, work):
    data = write(work / "x2.csv", "a,b,class\n" + "".join(
        f"{a + 0.01 * i},{b},{c}\n" for i in range(3) for a, b, c in ((0, 0, "n"), (1, 1, "n"), (1, 0, "p"), (0, 1, "p"))))
    outs = []
    for name in ("r1.csv", "r2.csv"):
        code, out, _ = run("crossval", "--data", data, "--positive-class", "p", "--folds", 3, *FAST,
                           "--out", name, "--timing", "off")
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1]
    assert (work / "r1.csv").read_bytes() == (work / "r2.csv").read_bytes()


def test_crossval_class_smaller_than_k(run, work):
    code, _, err = run("crossval", "--data", toy_pair(work), "--positive-class", "pos", "--folds", 2)
    assert code == 2 and "fewer than k" in err


def make_suite(work, broken=False):
    for i in range(3):
        toy_clusters(work, f"d{i}.csv", shift=0.1 * i)
        write(work / f"d{i}.manifest", f"data=d{i}.csv\npositive_class=pos\nname=toy{i}\n")
    lines = ["folds=2", "r1=2", "r2=2", "restarts=1"] + [f"dataset=d{i}.manifest" for i in range(3)]
    if broken:
        lines.append("dataset=missing.manifest")
    return write(work / "suite.txt", "\n".join(lines) + "\n")


def test_benchmark_layout(run, work):
    suite = make_suite(work)
    code, out, _ = run("benchmark", suite, "--timing", "off", "--out", "table.txt", "--results", "res.csv")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 1 + 3 + 2
    assert [l.split()[0] for l in lines[1:4]] == ["toy0", "toy1", "toy2"]
    assert lines[-2].startswith("MEAN +- STD") and lines[-1].startswith("MEDIAN +- MAD")
    assert (work / "table.txt").read_text() == out
    assert len((work / "res.csv").read_text().splitlines()) == 1 + 3 * 2
    code, out2, _ = run("benchmark", suite, "--timing", "off")
    assert out2 == out


def test_benchmark_records_row_errors(run, work):
    suite = make_suite(work, broken=True)
    code, out, _ = run("benchmark", suite, "--timing", "off")
    assert code == 0
    assert any("ERROR:" in l for l in out.splitlines())
    assert len(out.splitlines()) == 1 + 4 + 2


# -- plot --------------------------------------------------------------------------------

def field_colour(svg_text, px, py):
    """Fill of the field rect under SVG coordinate (px, py)."""
    ns = {"s": "http://www.w3.org/2000/svg"}
    root = ET.fromstring(svg_text)
    for rect in root.find("s:g[@id='field']", ns):
        x, y, w, h = (float(rect.get(k)) for k in ("x", "y", "width", "height"))
        if x <= px < x + w and y <= py < y + h:
            return rect.get("fill")
    raise AssertionError("point outside field")


def test_plot_xor(run, work):
    data = toy_xor(work)
    assert run("train", "--data", data, "--positive-class", "p", *FAST, "--restarts", 5, "--out", "m.json")[0] == 0
    assert run("plot", "m.json", "--data", data, "--out", "a.svg", "--grid", 60)[0] == 0
    assert run("plot", "m.json", "--data", data, "--out", "b.svg", "--grid", 60)[0] == 0
    text = (work / "a.svg").read_text()
    assert (work / "b.svg").read_text() == text
    root = ET.fromstring(text)
    circles = [c for c in root.iter("{http://www.w3.org/2000/svg}circle")]
    assert len(circles) == 4
    expected = [NEG_FILL, NEG_FILL, POS_FILL, POS_FILL]  # file order: (0,0) (1,1) (1,0) (0,1)
    for c, fill in zip(circles, expected):
        assert field_colour(text, float(c.get("cx")), float(c.get("cy"))) == fill


def test_plot_constant_sign_field(run, work):
    data = toy_xor(work)
    assert run("train", "--data", data, "--positive-class", "p", *FAST, "--out", "m.json")[0] == 0
    doc = json.loads((work / "m.json").read_text())
    doc["W"] = [[0.0, 0.0]] * doc["r1"]
    doc["c"] = [0.0] * doc["r1"]
    doc["M"] = [[0.0, 0.0]] * doc["r2"]
    doc["d"] = [5.0] * doc["r2"]  # negative block dominates everywhere
    (work / "neg.json").write_text(json.dumps(doc))
    assert run("plot", "neg.json", "--data", data, "--out", "c.svg", "--grid", 20)[0] == 0
    root = ET.fromstring((work / "c.svg").read_text())
    fills = {r.get("fill") for r in root.find("{http://www.w3.org/2000/svg}g[@id='field']")}
    assert fills == {NEG_FILL}


def test_plot_rejects_non_2d_model(run, work):
    data = toy_pair(work)
    assert run("train", "--data", data, "--positive-class", "pos", "--r1", 1, "--r2", 1, "--restarts", 1,
               "--out", "m.json")[0] == 0
    code, _, err = run("plot", "m.json", "--data", data, "--out", "p.svg")
    assert code == 1 and "--features" in err
    assert not (work / "p.svg").exists()


# -- exit codes ----------------------------------------------------------------------------

def test_usage_errors_exit_1(run, work):
    with pytest.raises(SystemExit) as info:
        cli.main(["train", "--model", "svm"])
    assert info.value.code == 1
    code, _, err = run("train", "--data", toy_pair(work))  # positive class missing
    assert code == 1 and "positive class" in err


def test_missing_file_exit_2(run, work):
    code, _, err = run("train", "--data", "nope.csv", "--positive-class", "a")
    assert code == 2


def test_solver_failure_exit_3(run, work, monkeypatch):
    monkeypatch.setattr(ccp, "lp_solve", lambda *a, **k: LpSolution("infeasible"))
    code, _, err = run("train", "--data", toy_pair(work), "--positive-class", "pos", "--restarts", 1,
                       "--out", "m.json")
    assert code == 3 and "solver error" in err
    assert not (work / "m.json").exists()


@pytest.mark.skipif(shutil.which("ldep") is None, reason="console script not installed")
def test_console_script(work):
    toy_pair(work)
    res = subprocess.run(["ldep", "train", "--data", "pair.csv", "--positive-class", "pos", "--r1", "1",
                          "--r2", "1", "--restarts", "1"], capture_output=True, text=True)
    assert res.returncode == 0 and (work / "model.json").exists()
