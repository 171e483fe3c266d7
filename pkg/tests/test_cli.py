import json
import math
import subprocess
import sys

import numpy as np
import pytest

from gyromat import io, kgc
from gyromat.cli import main

E = math.e


@pytest.fixture
def files(tmp_path):
    def make(name, obj):
        path = tmp_path / name
        path.write_text(json.dumps(obj))
        return str(path)

    return make


def spd_doc(A):
    A = np.asarray(A, dtype=float)
    return {"kind": "spd", "n": A.shape[0], "data": A.tolist()}


def onb_doc(U):
    U = np.asarray(U, dtype=float)
    return {"kind": "onb", "n": U.shape[0], "p": U.shape[1], "data": U.tolist()}


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_spd_add(files, capsys):
    a = files("a.json", spd_doc(np.diag([E, 1.0])))
    b = files("b.json", spd_doc(np.diag([1.0, E])))
    code, out, err = run(["spd", "add", "--metric", "le", "-A", a, "-B", b], capsys)
    assert code == 0 and err == ""
    doc = json.loads(out)
    assert doc["kind"] == "spd"
    assert np.allclose(doc["data"], E * np.eye(2), rtol=1e-15)


@pytest.mark.parametrize(
    "argv_tail, expected",
    [
        (["inv", "--metric", "lc", "-A", "{a}"], None),
        (["scale", "--metric", "ai", "-A", "{a}", "-t", "2"], None),
        (["gyr", "--metric", "ai", "-A", "{a}", "-B", "{b}", "-C", "{a}"], None),
        (["dist", "--metric", "le", "-A", "{a}", "-B", "{b}"], math.sqrt(2.0)),
        (["angle", "--metric", "le", "-A", "{i}", "-B", "{a}", "-C", "{b}"], math.pi / 2),
    ],
)
def test_spd_ops(files, capsys, argv_tail, expected):
    paths = {
        "a": files("a.json", spd_doc(np.diag([E, 1.0]))),
        "b": files("b.json", spd_doc(np.diag([1.0, E]))),
        "i": files("i.json", spd_doc(np.eye(2))),
    }
    argv = ["spd"] + [t.format(**paths) for t in argv_tail]
    code, out, _ = run(argv, capsys)
    assert code == 0
    if expected is None:
        assert json.loads(out)["kind"] == "spd"
    else:
        assert float(out) == pytest.approx(expected, rel=1e-14)


def test_output_file(files, capsys, tmp_path):
    a = files("a.json", spd_doc(np.diag([4.0, 1.0])))
    target = str(tmp_path / "out.json")
    code, out, _ = run(["spd", "inv", "--metric", "le", "-A", a, "-o", target], capsys)
    assert code == 0 and out == ""
    assert np.allclose(io.load_matrix(target).data, np.diag([0.25, 1.0]))


def test_domain_error_exit_code(files, capsys):
    bad = files("bad.json", {"kind": "spd", "n": 2, "data": [[1, 0], [0, -1]]})
    code, out, err = run(["spd", "inv", "--metric", "le", "-A", bad], capsys)
    assert code == 2 and out == "" and "KindViolation" in err


def test_usage_errors(capsys):
    assert run(["spd", "add", "--metric", "xx", "-A", "a", "-B", "b"], capsys)[0] == 1
    assert run([], capsys)[0] == 1
    assert run(["verify", "--suite", "kernels", "--trials", "0"], capsys)[0] == 1
    assert run(["verify", "--suite", "gr_axioms", "--dims", "4-2"], capsys)[0] == 1


def test_help_exits_cleanly(capsys):
    assert run(["--help"], capsys)[0] == 0


def test_mlr_fit_zero_samples(capsys):
    code, out, err = run(["spd", "mlr-fit", "--demo", "--samples", "0"], capsys)
    assert code == 1 and out == ""


def test_mlr_fit_requires_demo(capsys):
    assert run(["spd", "mlr-fit"], capsys)[0] == 1


def test_mlr_fit_demo_small(capsys, tmp_path):
    report = str(tmp_path / "fit.json")
    argv = ["spd", "mlr-fit", "--demo", "--metrics", "le", "--samples", "60", "--epochs", "10", "--report", report]
    code, out, err = run(argv, capsys)
    assert code == 0 and out.startswith("le: train accuracy")
    first = open(report).read()
    run(argv, capsys)
    assert open(report).read() == first


def test_mlr_fit_too_large_is_usage_error(capsys):
    assert run(["spd", "mlr-fit", "--demo", "--n", "6"], capsys)[0] == 1


def test_mlr_dist(files, capsys):
    plane = files("h.json", {"kind": "plane", "metric": "le", "P": np.eye(2).tolist(), "W": [[1, 0], [0, -1]]})
    x = files("x.json", spd_doc(np.diag([E * E, 1.0])))
    code, out, _ = run(["spd", "mlr-dist", "--plane", plane, "-X", x], capsys)
    assert code == 0 and float(out) == pytest.approx(math.sqrt(2.0), rel=1e-14)


def test_mlr_dist_blocks(files, capsys):
    block = {"P": np.eye(2).tolist(), "W": [[1, 0], [0, -1]]}
    plane = files("h.json", {"kind": "plane", "metric": "le", "blocks": [block, block]})
    X = np.diag([E * E, 1.0]).tolist()
    x = files("x.json", {"kind": "spd_blocks", "blocks": [X, X]})
    code, out, _ = run(["spd", "mlr-dist", "--plane", plane, "-X", x, "--blocks"], capsys)
    assert code == 0 and float(out) == pytest.approx(2.0, rel=1e-14)
    assert run(["spd", "mlr-dist", "--plane", plane, "-X", x], capsys)[0] == 1


def test_gr_cut_locus(files, capsys):
    cut = files("c.json", onb_doc([[0.0], [1.0]]))
    base = files("b.json", onb_doc([[1.0], [0.0]]))
    code, out, err = run(["gr", "add", "--perspective", "onb", "-A", cut, "-B", base], capsys)
    assert code == 2 and "CutLocus" in err and out == ""


def test_gr_ops(files, capsys):
    u = files("u.json", onb_doc([[math.cos(0.3)], [math.sin(0.3)]]))
    v = files("v.json", onb_doc([[math.cos(0.5)], [math.sin(0.5)]]))
    code, out, _ = run(["gr", "add", "--perspective", "onb", "-A", u, "-B", v], capsys)
    U = np.array(json.loads(out)["data"])
    assert code == 0 and abs(abs(U[0, 0]) - math.cos(0.8)) < 1e-14
    P = {"kind": "projector", "n": 2, "p": 1, "data": (U @ U.T).tolist()}
    p = files("p.json", P)
    code, out, _ = run(["gr", "inv", "--perspective", "proj", "-A", p], capsys)
    assert code == 0 and json.loads(out)["kind"] == "projector"
    code, out, _ = run(["gr", "dist", "--perspective", "onb", "-A", u, "-B", v], capsys)
    assert float(out) == pytest.approx(0.2 * math.sqrt(2), rel=1e-12)
    code, out, _ = run(["gr", "gyr", "--perspective", "onb", "-A", u, "-B", v, "-C", u], capsys)
    assert code == 0
    code, out, _ = run(["gr", "pangle", "-U", u, "-V", v], capsys)
    assert float(out) == pytest.approx(0.2, rel=1e-12)


def test_gr_wrong_kind(files, capsys):
    s = files("s.json", spd_doc(np.eye(2)))
    assert run(["gr", "inv", "--perspective", "proj", "-A", s], capsys)[0] == 2


def test_kgc_score(files, capsys):
    z = np.zeros((1, 2))
    model = kgc.KgcModel(
        3, 1, {"a": kgc.EntityEmbedding(z, 0.5), "b": kgc.EntityEmbedding(z, 0.25)},
        {"r": kgc.RelationEmbedding(np.ones((1, 2)), z)},
    )
    path = files("m.json", io.kgc_model_to_dict(model))
    code, out, _ = run(["kgc", "score", "--model", path, "--triple", "a,r,b"], capsys)
    assert code == 0 and float(out) == 0.75
    assert run(["kgc", "score", "--model", path, "--triple", "a,r"], capsys)[0] == 1
    assert run(["kgc", "score", "--model", path, "--triple", "a,q,b"], capsys)[0] == 1


def test_verify_pass_and_report(capsys, tmp_path):
    report = str(tmp_path / "r.json")
    argv = ["verify", "--suite", "spd_axioms", "--trials", "5", "--seed", "42", "--dims", "2,3", "--report", report]
    code, out, _ = run(argv, capsys)
    assert code == 0 and out.rstrip().endswith("suite spd_axioms: PASS")
    doc = json.loads(open(report).read())
    assert doc["pass"] is True and doc["seed"] == 42


def test_verify_failure_exit_code(capsys):
    code, out, _ = run(["verify", "--suite", "kernels", "--trials", "2", "--tol", "1e-30"], capsys)
    assert code == 0  # every kernel check carries a fixed tolerance
    code, out, _ = run(["verify", "--suite", "gr_isometries", "--trials", "2", "--tol", "1e-30"], capsys)
    assert code == 3 and "FAIL" in out


def test_verify_reports_match_across_workers(tmp_path, capsys):
    paths = []
    for w in ("1", "3"):
        path = str(tmp_path / f"r{w}.json")
        run(["verify", "--suite", "gr_axioms", "--trials", "3", "--seed", "7", "--workers", w, "--report", path], capsys)
        paths.append(open(path, "rb").read())
    assert paths[0] == paths[1]


def test_module_entry_point(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "gyromat.cli", "gr", "pangle", "-U", "missing.json", "-V", "missing.json"],
        capture_output=True,
        text=True,
        cwd=tmp_path,
    )
    assert out.returncode == 2 and "ParseError" in out.stderr and out.stdout == ""
