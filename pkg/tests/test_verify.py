import numpy as np
import pytest

from gyromat import grassmann as gr
from gyromat import matker as mk
from gyromat import verify
from gyromat.errors import ConfigError, GeneratorStall


def test_gen_spd_deterministic_and_valid():
    a = verify.gen_spd(np.random.default_rng(42), 3)
    b = verify.gen_spd(np.random.default_rng(42), 3)
    c = verify.gen_spd(np.random.default_rng(43), 3)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert mk.is_spd(a)


def test_gen_onb_valid():
    rng = np.random.default_rng(5)
    U = verify.gen_onb(rng, 6, 2)
    assert np.linalg.norm(U.T @ U - np.eye(2)) < 1e-12
    assert np.linalg.svd(U[:2], compute_uv=False)[-1] > 1e-8
    assert np.array_equal(U, verify.gen_onb(np.random.default_rng(5), 6, 2))


def test_gen_onb_stalls(monkeypatch):
    monkeypatch.setattr(gr, "CUT_LOCUS_TOL", 2.0)
    with pytest.raises(GeneratorStall):
        verify.gen_onb(np.random.default_rng(0), 4, 2)


def test_gen_onb_near_bounds_angles():
    rng = np.random.default_rng(1)
    for _ in range(20):
        U = verify.gen_onb_near(rng, 6, 3, max_angle=0.5)
        assert np.max(gr.principal_angles(gr.base_frame(6, 3), U)) <= 0.5 + 1e-12


def test_every_invariant_is_covered_by_exactly_one_suite():
    owners = {}
    for suite in verify.SUITES:
        for check in verify.suite_checks(suite):
            owners.setdefault(check.covers, set()).add(suite)
    declared = {key for keys in verify.INVARIANTS.values() for key in keys}
    assert set(owners) == declared
    for key, suites in owners.items():
        assert len(suites) == 1, f"{key} is covered by {sorted(suites)}"


def test_check_names_unique_within_suite():
    for suite in verify.SUITES:
        names = [c.name for c in verify.suite_checks(suite)]
        assert len(names) == len(set(names))


def test_spd_axioms_small_run_passes():
    report = verify.run_suite(verify.SuiteConfig("spd_axioms", trials=20, seed=3, dims=(2, 3)))
    assert report.passed
    assert all(c.trials == 40 for c in report.checks)
    assert all(c.max_condition >= 1.0 for c in report.checks)


def test_unattainable_tolerance_reports_failure():
    report = verify.run_suite(verify.SuiteConfig("gr_isometries", trials=3, seed=0, tol=1e-30))
    assert not report.passed
    d = report.to_dict()
    assert d["pass"] is False
    assert all(c["max_residual"] is not None for c in d["checks"])


def test_report_identical_across_runs_and_workers():
    cfg = verify.SuiteConfig("spd_isometries", trials=5, seed=99, dims=(2, 3))
    a = verify.run_suite(cfg).to_json()
    b = verify.run_suite(cfg).to_json()
    c = verify.run_suite(cfg, workers=4).to_json()
    assert a == b == c
    assert '"seed": 99' in a


def test_different_seeds_differ():
    a = verify.run_suite(verify.SuiteConfig("kernels", trials=3, seed=1)).to_json()
    b = verify.run_suite(verify.SuiteConfig("kernels", trials=3, seed=2)).to_json()
    assert a != b


def test_check_filter():
    cfg = verify.SuiteConfig("kgc", trials=2, checks=("kgc.zero_relation",))
    report = verify.run_suite(cfg)
    assert [c.name for c in report.checks] == ["kgc.zero_relation"]
    with pytest.raises(ConfigError):
        verify.run_suite(verify.SuiteConfig("kgc", trials=2, checks=("nope",)))


@pytest.mark.parametrize(
    "kwargs",
    [
        {"suite": "nope"},
        {"suite": "kernels", "trials": 0},
        {"suite": "kernels", "tol": 0.0},
        {"suite": "kernels", "seed": -1},
        {"suite": "gr_axioms", "dims": [(3, 3)]},
        {"suite": "spd_axioms", "dims": [0]},
        {"suite": "spd_axioms", "dims": []},
    ],
)
def test_invalid_configs(kwargs):
    with pytest.raises(ConfigError):
        verify.SuiteConfig(**kwargs)


def test_domain_errors_are_counted(monkeypatch):
    def boom(rng, n):
        raise GeneratorStall("stalled")

    checks = [verify.Check("boom", "always fails", boom, "exp_log_roundtrip")]
    monkeypatch.setitem(verify.SUITES, "kernels", (lambda: checks, (2,)))
    report = verify.run_suite(verify.SuiteConfig("kernels", trials=3))
    (c,) = report.checks
    assert c.errors == 3 and not c.passed and c.first_error.startswith("GeneratorStall")
