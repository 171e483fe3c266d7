import math

import numpy as np
import pytest
from conftest import random_spd, random_sym
from scipy.special import softmax

from gyromat import mlr
from gyromat.errors import ConfigError, DegeneratePlane, DimMismatch, NonConvergence

E = math.e
W0 = np.diag([1.0, -1.0])


def plane(m, P=None, W=W0):
    return mlr.Hypergyroplane(m, np.eye(2) if P is None else P, W)


def random_plane(rng, m, n):
    return mlr.Hypergyroplane(m, random_spd(rng, n), random_sym(rng, n))


def blockdiag(*mats):
    n = sum(M.shape[0] for M in mats)
    out = np.zeros((n, n))
    i = 0
    for M in mats:
        k = M.shape[0]
        out[i : i + k, i : i + k] = M
        i += k
    return out


def test_residual_examples():
    H = plane("le")
    assert mlr.plane_residual(H, np.eye(2)) == 0.0
    assert mlr.plane_residual(H, np.diag([E, E])) == pytest.approx(0.0, abs=1e-15)
    assert mlr.plane_residual(H, np.diag([E, 1.0])) == pytest.approx(1.0, rel=1e-15)


@pytest.mark.parametrize("m", ["le", "lc", "ai"])
def test_plane_samples_lie_on_plane(m, rng):
    H = random_plane(rng, m, 3)
    for _ in range(20):
        Q = mlr.plane_sample(H, rng)
        assert abs(mlr.plane_residual(H, Q)) < 1e-9
    assert np.allclose(mlr.plane_sample(H, rng, scale=0.0), H.P)
    assert not np.allclose(mlr.plane_sample(H, rng), mlr.plane_sample(H, rng))


def test_closed_form_examples():
    X = np.diag([E * E, 1.0])
    assert mlr.dist_le(plane("le"), X) == pytest.approx(math.sqrt(2.0), rel=1e-14)
    assert mlr.dist_lc(plane("lc"), X) == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-14)
    assert mlr.pseudodist_ai(plane("ai"), X) == pytest.approx(math.sqrt(2.0), rel=1e-14)


def test_lc_example_against_sampled_minimum(rng):
    from gyromat.verify import refined_plane_minimum

    H = plane("lc")
    X = np.diag([E * E, 1.0])
    assert refined_plane_minimum(H, X, rng) == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-6)


@pytest.mark.parametrize("m", ["le", "lc", "ai"])
def test_point_on_plane_has_zero_distance(m, rng):
    H = random_plane(rng, m, 3)
    assert mlr.plane_distance(H, H.P) < 1e-14
    assert mlr.plane_distance(H, mlr.plane_sample(H, rng)) < 1e-9


def test_metric_specific_entry_points_check_metric():
    with pytest.raises(ConfigError):
        mlr.dist_le(plane("ai"), np.eye(2))
    with pytest.raises(ConfigError):
        mlr.pseudodist_ai(plane("lc"), np.eye(2))


@pytest.mark.parametrize("m", ["le", "lc", "ai"])
def test_degenerate_plane(m):
    with pytest.raises(DegeneratePlane):
        mlr.Hypergyroplane(m, np.eye(2), np.zeros((2, 2)))


@pytest.mark.parametrize("m", ["le", "lc"])
def test_closed_form_is_sampled_lower_bound(m, rng):
    H = random_plane(rng, m, 3)
    X = random_spd(rng, 3)
    f = mlr.plane_distance(H, X)
    d = [H.space.distance(X, mlr.plane_sample(H, rng)) for _ in range(300)]
    assert min(d) >= f - 1e-9


@pytest.mark.parametrize("m", ["le", "lc", "ai"])
def test_numeric_oracle_matches_closed_form(m, rng):
    H = random_plane(rng, m, 2)
    X = random_spd(rng, 2)
    f = mlr.plane_distance(H, X)
    g = mlr.pseudodist_numeric(H, X, budget=2000, seed=3)
    assert abs(g - f) / f < 1e-3


def test_numeric_oracle_zero_on_plane(rng):
    H = random_plane(rng, "ai", 2)
    assert mlr.pseudodist_numeric(H, H.P, budget=100) == 0.0


@pytest.mark.parametrize("m", ["le", "lc", "ai"])
def test_blockdiag_matches_assembled(m, rng):
    planes = [random_plane(rng, m, k) for k in (2, 3, 2)]
    X = [random_spd(rng, k) for k in (2, 3, 2)]
    big = mlr.Hypergyroplane(m, blockdiag(*(h.P for h in planes)), blockdiag(*(h.W for h in planes)))
    direct = mlr.plane_distance(big, blockdiag(*X))
    assert abs(mlr.blockdiag_dist(m, planes, X) - direct) <= 1e-9 * (1 + direct)
    # a single block is the single-matrix value
    assert mlr.blockdiag_dist(m, planes[:1], X[:1]) == pytest.approx(mlr.plane_distance(planes[0], X[0]))


def test_blockdiag_all_on_plane(rng):
    planes = [random_plane(rng, "le", 2) for _ in range(3)]
    X = [h.P for h in planes]
    assert mlr.blockdiag_dist("le", planes, X) == 0.0


def test_blockdiag_mismatch(rng):
    with pytest.raises(DimMismatch):
        mlr.blockdiag_dist("le", [random_plane(rng, "le", 2)], [np.eye(2), np.eye(2)])


def test_logits_uniform_on_all_planes():
    model = mlr.MlrModel("le", (plane("le"), plane("le", W=np.diag([2.0, -2.0])), plane("le", W=np.diag([0.0, 1.0]))))
    assert mlr.mlr_logits(model, np.eye(2)).tolist() == [0.0, 0.0, 0.0]
    assert np.allclose(mlr.mlr_probs(model, np.eye(2)), 1.0 / 3.0)


def test_two_class_softmax_oracle():
    H = plane("le")
    model = mlr.MlrModel("le", (H, plane("le", P=np.diag([E * E, 1.0]))))
    X = np.diag([E * E, 1.0])
    logits = mlr.mlr_logits(model, X)
    # sign(2) * ||W|| * sqrt2 = 2, and X lies on the second plane
    assert logits == pytest.approx([2.0, 0.0], abs=1e-14)
    p = mlr.mlr_probs(model, X)
    assert p[0] == pytest.approx(1.0 / (1.0 + math.exp(-2.0)), rel=1e-14)
    assert sum(p) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("m", ["le", "lc", "ai"])
def test_logit_equals_signed_residual(m, rng):
    classes = tuple(random_plane(rng, m, 3) for _ in range(3))
    model = mlr.MlrModel(m, classes)
    X = random_spd(rng, 3)
    residuals = [mlr.plane_residual(H, X) for H in classes]
    assert np.allclose(mlr.mlr_logits(model, X), residuals, rtol=1e-9, atol=1e-12)


def test_permuting_classes_permutes_probs(rng):
    classes = [random_plane(rng, "ai", 2) for _ in range(4)]
    X = random_spd(rng, 2)
    p = mlr.mlr_probs(mlr.MlrModel("ai", tuple(classes)), X)
    perm = [2, 0, 3, 1]
    q = mlr.mlr_probs(mlr.MlrModel("ai", tuple(classes[i] for i in perm)), X)
    assert np.allclose(q, p[perm], rtol=1e-14)
    assert np.allclose(p, softmax(mlr.mlr_logits(mlr.MlrModel("ai", tuple(classes)), X)))


def test_model_needs_two_classes():
    with pytest.raises(ConfigError):
        mlr.MlrModel("le", (plane("le"),))


def test_fit_rejects_single_class(rng):
    X = np.stack([random_spd(rng, 2) for _ in range(10)])
    with pytest.raises(ConfigError):
        mlr.mlr_fit_fd(X, np.zeros(10, dtype=int), mlr.FitConfig(epochs=5))


def test_fit_separates_diagonal_clusters():
    rng = np.random.default_rng(1)
    logs = np.concatenate([rng.normal(-1.0, 0.3, (40, 2)), rng.normal(1.0, 0.3, (40, 2))])
    X = np.stack([np.diag(np.exp(v)) for v in logs])
    y = np.repeat([0, 1], 40)
    fit = mlr.mlr_fit_fd(X, y, mlr.FitConfig(epochs=40))
    assert fit.accuracy >= 0.95
    assert fit.model.final_loss == fit.losses[-1] < fit.losses[0]


def test_fit_on_inseparable_data():
    X = np.stack([np.diag([2.0, 3.0])] * 20)
    y = np.arange(20) % 2
    try:
        fit = mlr.mlr_fit_fd(X, y, mlr.FitConfig(epochs=10))
    except NonConvergence:
        return
    assert fit.accuracy <= 0.5


def test_demo_is_deterministic():
    a = mlr.demo_mlr(metrics=("le",), samples=60, config=mlr.FitConfig(epochs=10))
    b = mlr.demo_mlr(metrics=("le",), samples=60, config=mlr.FitConfig(epochs=10))
    assert a == b
