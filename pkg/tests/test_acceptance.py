"""Acceptance criteria, one test each. Every test records one PASS/FAIL line."""

import math
import time

import numpy as np

from gyromat import grassmann as gr
from gyromat import kgc, mlr, verify
from gyromat.cli import main as cli_main
from gyromat.errors import CutLocus
from gyromat.verify import SuiteConfig, run_suite


def summarize(reports):
    worst = max(c.max_residual for r in reports for c in r.checks if c.max_residual is not None)
    failed = [c.name for r in reports for c in r.checks if not c.passed]
    return worst, failed


AXIOM_CHECKS = {"G1", "G2", "G3", "G4", "gyrocommutative", "V1", "V2", "V3", "V4", "V5", "left_cancellation"}


def test_axiom_suites(acceptance):
    spd_names = tuple(
        c.name for c in verify.suite_checks("spd_axioms") if c.name.split(".", 1)[1] in AXIOM_CHECKS
    )
    t0 = time.perf_counter()
    reports = [
        run_suite(SuiteConfig("spd_axioms", trials=500, seed=1, tol=1e-8, dims=(2, 3, 5, 8), checks=spd_names)),
        run_suite(SuiteConfig("gr_axioms", trials=500, seed=1, tol=1e-8)),
    ]
    elapsed = time.perf_counter() - t0
    worst, failed = summarize(reports)
    assert len(spd_names) == 33
    ok = not failed and elapsed < 180
    acceptance(1, ok, f"SPD and Grassmann axioms, 500 trials: max residual {worst:.2e}, {elapsed:.0f} s")
    assert ok, failed


def test_isometries_preserve_distance(acceptance):
    spd_names = tuple(
        c.name for c in verify.suite_checks("spd_isometries") if c.name.endswith("isometry")
    )
    gr_names = ("gr.translation_isometry", "gr.gyration_isometry", "gr.inverse_isometry")
    reports = [
        run_suite(SuiteConfig("spd_isometries", trials=500, seed=2, tol=1e-8, checks=spd_names)),
        run_suite(SuiteConfig("gr_isometries", trials=500, seed=2, tol=1e-8, checks=gr_names)),
    ]
    worst, failed = summarize(reports)
    ok = not failed and worst < 1e-8
    acceptance(2, ok, f"gyroisometries preserve distance, 500 trials: max residual {worst:.2e}")
    assert ok, failed


def test_diffeomorphism_squares(acceptance):
    reports = [
        run_suite(
            SuiteConfig("gr_onb_consistency", trials=200, seed=3, tol=1e-9, checks=("tau.add", "tau.scale", "tau.gyr"))
        ),
        run_suite(SuiteConfig("spd_axioms", trials=200, seed=3, tol=1e-9, checks=("lc.cholesky_square",))),
    ]
    worst, failed = summarize(reports)
    ok = not failed and worst < 1e-9
    acceptance(3, ok, f"tau and Cholesky commuting squares, 200 trials: max residual {worst:.2e}")
    assert ok, failed


def test_gyrotriangle_laws(acceptance):
    # 125 trials at each of four orders: 500 triangles per metric
    report = run_suite(
        SuiteConfig("spd_isometries", trials=125, seed=4, tol=1e-8, checks=("le.gyrotriangle_laws", "lc.gyrotriangle_laws"))
    )
    worst, failed = summarize([report])
    ok = not failed and worst < 1e-8
    acceptance(4, ok, f"gyrocosine and gyrosine laws, 500 LE and 500 LC triangles: max residual {worst:.2e}")
    assert ok, failed


def test_hypergyroplane_distances(acceptance):
    bound = run_suite(
        SuiteConfig(
            "spd_mlr",
            trials=10,
            seed=5,
            checks=("le.plane_lower_bound", "lc.plane_lower_bound", "le.plane_minimum", "lc.plane_minimum"),
        )
    )
    # 25 instances at each of n = 2 and n = 3
    ai = run_suite(SuiteConfig("spd_mlr", trials=25, seed=5, dims=(2, 3), checks=("ai.pseudo_distance",)))
    blocks = run_suite(
        SuiteConfig("spd_mlr", trials=50, seed=5, checks=("le.blockdiag", "lc.blockdiag", "ai.blockdiag"))
    )
    parts = {
        "a": all(c.passed for c in bound.checks),
        "b": all(c.passed for c in ai.checks),
        "c": all(c.passed for c in blocks.checks),
    }
    minimum = max(c.max_residual for c in bound.checks if c.name.endswith("minimum"))
    ai_err = ai.checks[0].max_residual
    block_err = max(c.max_residual for c in blocks.checks)
    ok = all(parts.values())
    acceptance(
        5,
        ok,
        f"plane distances: (a) lower bound holds, refined minimum rel err {minimum:.1e}; "
        f"(b) AI numeric oracle rel err {ai_err:.1e} on 50 instances; (c) block-diagonal err {block_err:.1e}",
    )
    assert ok, parts


def test_kernel_convergence(acceptance):
    report = run_suite(
        SuiteConfig(
            "kernels", trials=50, seed=6, checks=("dlog_second_order", "exp_log_roundtrip", "cholesky_roundtrip")
        )
    )
    res = {c.name: c.max_residual for c in report.checks}
    ok = report.passed and res["exp_log_roundtrip"] < 1e-10 and res["cholesky_roundtrip"] < 1e-10
    acceptance(
        6,
        ok,
        f"Dlog second order, exp/log roundtrip {res['exp_log_roundtrip']:.1e}, Cholesky roundtrip {res['cholesky_roundtrip']:.1e}",
    )
    assert ok


def test_grassmann_maps(acceptance):
    roundtrip = run_suite(SuiteConfig("gr_onb_consistency", trials=100, seed=7, checks=("gr.exp_log",)))
    rt = roundtrip.checks[0].max_residual

    cut = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    raised = 0
    for _ in range(3):
        try:
            gr.gr_log_identity(gr.tau(cut))
        except CutLocus:
            raised += 1

    e1 = np.array([[1.0], [0.0]])
    angle_err = max(
        abs(gr.principal_angle_distance(e1, np.array([[math.cos(t)], [math.sin(t)]])) - t)
        for t in np.arange(1, 16) / 10
    )
    ok = roundtrip.passed and rt < 1e-9 and raised == 3 and angle_err < 1e-10
    acceptance(
        7,
        ok,
        f"Grassmann Exp/Log roundtrip {rt:.1e}, CutLocus raised {raised}/3, principal-angle error {angle_err:.1e}",
    )
    assert ok


def test_mlr_demo(acceptance):
    t0 = time.perf_counter()
    summary = mlr.demo_mlr(metrics=("le", "ai"), n=3, K=3, samples=300, seed=7)
    elapsed = time.perf_counter() - t0
    acc = {r["metric"]: r["accuracy"] for r in summary["results"]}
    ok = min(acc.values()) >= 0.95 and elapsed < 60
    acceptance(8, ok, f"MLR demo train accuracy LE {acc['le']:.3f}, AI {acc['ai']:.3f} in {elapsed:.0f} s")
    assert ok


def brute_force_rank(scores, truth):
    ranked = sorted(range(len(scores)), key=lambda i: -scores[i])
    worst_tie = max(pos for pos, i in enumerate(ranked) if scores[i] == scores[truth])
    return worst_tie + 1


def test_kgc(acceptance):
    z = np.zeros((2, 3))
    s = kgc.EntityEmbedding(z, 0.375)
    o = kgc.EntityEmbedding(z, -1.25)
    r = kgc.RelationEmbedding(np.ones((2, 3)), z)
    trivial = kgc.score(s, r, o) == 0.375 + -1.25

    rot = run_suite(SuiteConfig("kgc", trials=100, seed=9, checks=("kgc.object_rotation",)))
    rot_err = rot.checks[0].max_residual

    rng = np.random.default_rng(9)
    scores, truths, ranks = [], [], []
    for _ in range(100):
        cand = rng.integers(0, 8, size=int(rng.integers(1, 30))).astype(float)
        t = int(rng.integers(len(cand)))
        scores.append(cand)
        truths.append(t)
        ranks.append(brute_force_rank(list(cand), t))
    ranks = np.array(ranks)
    oracle = (
        float(np.mean(1.0 / ranks)),
        float(np.mean(ranks <= 1)),
        float(np.mean(ranks <= 3)),
        float(np.mean(ranks <= 10)),
    )
    exact = kgc.rank_metrics(scores, truths) == oracle
    ok = trivial and rot_err < 1e-10 and exact
    acceptance(
        9, ok, f"KGC trivial score exact: {trivial}, rotation invariance {rot_err:.1e}, ranks match brute force: {exact}"
    )
    assert ok


def test_determinism(acceptance, tmp_path, capsys):
    texts = []
    for workers in (1, 1, 4):
        path = tmp_path / f"report{len(texts)}.json"
        argv = ["verify", "--suite", "spd_axioms", "--trials", "20", "--seed", "42", "--dims", "2,3",
                "--tol", "1e-8", "--workers", str(workers), "--report", str(path)]
        cli_main(argv)
        texts.append(path.read_bytes())
    capsys.readouterr()
    cfg = SuiteConfig("gr_onb_consistency", trials=10, seed=11)
    lib = {run_suite(cfg, workers=w).to_json() for w in (1, 2, 4)}
    ok = texts[0] == texts[1] == texts[2] and len(lib) == 1
    acceptance(10, ok, "verify reports byte-identical across runs and thread counts")
    assert ok
