"""Seedable property verification of every operation in the library.

A suite is a list of checks. Each check turns an RNG and a dimension into a
non-negative residual. Trials are independent: trial ``t`` of check ``c`` on
dimension ``d`` draws from ``SeedSequence(seed, spawn_key=(c, d, t))``, so the
report does not depend on how trials are scheduled across threads.
"""

import json
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import softmax

from gyromat import grassmann as gr
from gyromat import kgc
from gyromat import matker as mk
from gyromat import mlr
from gyromat.errors import ConfigError, GeneratorStall, GyroError
from gyromat.spd import SpdMetric, lt_add, spd_space, triangle_report

# Largest principal angle of generated Grassmann points in the axiom suites.
# Compositions of up to four such points stay clear of the cut locus.
SAFE_ANGLE = math.pi / 8

SPD_DIMS = (2, 3, 5, 8)
GR_DIMS = ((4, 2), (6, 2), (6, 3))


# -- generators ----------------------------------------------------------------


_trial_state = threading.local()


def gen_spd(rng, n):
    """``A A^T + 0.1 I`` with standard normal ``A``.

    The condition number is recorded so the report can show the worst
    conditioning a check has seen.
    """
    A = rng.standard_normal((n, n))
    P = mk.symmetrize(A @ A.T) + 0.1 * np.eye(n)
    worst = getattr(_trial_state, "cond", None)
    if worst is not None:
        _trial_state.cond = max(worst, condition_number(P))
    return P


def condition_number(P):
    _, w = mk.sym_eig(P)
    return float(w[0] / w[-1])


def gen_sym(rng, n):
    A = rng.standard_normal((n, n))
    return 0.5 * (A + A.T)


def gen_onb(rng, n, p, max_redraws=100):
    """Orthonormalized Gaussian frame outside the cut locus of the base frame."""
    if not 1 <= p < n:
        raise ConfigError(f"need 1 <= p < n, got n={n}, p={p}")
    for _ in range(max_redraws):
        U, _ = np.linalg.qr(rng.standard_normal((n, p)))
        if np.linalg.svd(U[:p], compute_uv=False)[-1] > gr.CUT_LOCUS_TOL:
            return U
    raise GeneratorStall(f"no frame outside the cut locus after {max_redraws} draws")


def gen_onb_near(rng, n, p, max_angle=SAFE_ANGLE):
    """Random frame whose principal angles to the base are at most ``max_angle``.

    The frame is rotated by a random ``p x p`` orthogonal matrix so that frame
    representatives are not canonical.
    """
    B = rng.standard_normal((p, n - p))
    B *= rng.uniform(0.0, max_angle) / np.linalg.norm(B, 2)
    E = mk.mat_exp(mk.commutator(gr.tangent_from_block(B), gr.identity_projector(n, p)))
    O, _ = np.linalg.qr(rng.standard_normal((p, p)))
    return E[:, :p] @ O


def _rel(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return float(np.linalg.norm(a - b) / (1.0 + np.linalg.norm(b)))


def _srel(a, b):
    return abs(a - b) / (1.0 + abs(b))


# -- registry ------------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    name: str
    statement: str
    trial: object
    covers: str
    tol: float = None  # fixed tolerance; None means the suite tolerance

    def tolerance(self, suite_tol):
        return suite_tol if self.tol is None else self.tol


# Every documented invariant, by module. ``covers`` keys of checks refer to these.
INVARIANTS = {
    "matker": ("exp_log_roundtrip", "cholesky_roundtrip", "dlog_second_order", "dexp_inverts_dlog"),
    "spd_gyro": (
        "gyrogroup_axioms",
        "gyrovector_axioms",
        "left_cancellation",
        "spd_gyroisometries",
        "transport_reconstruction",
        "cholesky_square",
        "gyrotriangle_laws",
        "distance_symmetry",
    ),
    "spd_mlr": (
        "plane_lower_bound",
        "pseudo_equals_true",
        "ai_formula_fidelity",
        "blockdiag_consistency",
        "softmax_normalization",
    ),
    "grassmann": (
        "gr_gyrogroup_axioms",
        "gr_translation_isometry",
        "gr_gyration_isometry",
        "gr_inverse_isometry",
        "tau_squares",
        "subspace_invariance",
        "gr_exp_log_roundtrip",
    ),
    "kgc": ("object_rotation_invariance", "zero_relation_reduction", "rank_permutation_equivariance"),
}


def _spd_axiom_checks():
    checks = []
    for m in SpdMetric:
        g = spd_space(m)
        tag = m.value

        def pts(rng, n, k=3):
            return [gen_spd(rng, n) for _ in range(k)]

        def scalars(rng):
            return rng.uniform(-2.0, 2.0, size=2)

        def g1(rng, n, g=g):
            (P,) = pts(rng, n, 1)
            return _rel(g.add(np.eye(n), P), P)

        def g2(rng, n, g=g):
            (P,) = pts(rng, n, 1)
            return _rel(g.add(g.inverse(P), P), np.eye(n))

        def g3(rng, n, g=g):
            P, Q, R = pts(rng, n)
            return _rel(g.add(P, g.add(Q, R)), g.add(g.add(P, Q), g.gyr(P, Q, R)))

        def g4(rng, n, g=g):
            P, Q, R = pts(rng, n)
            return _rel(g.gyr(P, Q, R), g.gyr(g.add(P, Q), Q, R))

        def comm(rng, n, g=g):
            P, Q = pts(rng, n, 2)
            return _rel(g.add(P, Q), g.gyr(P, Q, g.add(Q, P)))

        def v1(rng, n, g=g):
            (P,) = pts(rng, n, 1)
            t = rng.uniform(-2.0, 2.0)
            I = np.eye(n)
            return max(
                _rel(g.scale(1.0, P), P),
                _rel(g.scale(0.0, P), I),
                _rel(g.scale(t, I), I),
                _rel(g.scale(-1.0, P), g.inverse(P)),
            )

        def v2(rng, n, g=g):
            (P,) = pts(rng, n, 1)
            s, t = scalars(rng)
            return _rel(g.scale(s + t, P), g.add(g.scale(s, P), g.scale(t, P)))

        def v3(rng, n, g=g):
            (P,) = pts(rng, n, 1)
            s, t = scalars(rng)
            return _rel(g.scale(s * t, P), g.scale(s, g.scale(t, P)))

        def v4(rng, n, g=g):
            P, Q, R = pts(rng, n)
            _, t = scalars(rng)
            return _rel(g.gyr(P, Q, g.scale(t, R)), g.scale(t, g.gyr(P, Q, R)))

        def v5(rng, n, g=g):
            P, R = pts(rng, n, 2)
            s, t = scalars(rng)
            return _rel(g.gyr(g.scale(s, P), g.scale(t, P), R), R)

        def cancel(rng, n, g=g):
            P, Q = pts(rng, n, 2)
            return _rel(g.add(g.inverse(P), g.add(P, Q)), Q)

        def scalar_construction(rng, n, g=g):
            (P,) = pts(rng, n, 1)
            t = rng.uniform(-2.0, 2.0)
            I = np.eye(n)
            return _rel(g.exp(I, t * g.log(I, P)), g.scale(t, P))

        def transport(rng, n, g=g):
            P, Q = pts(rng, n, 2)
            I = np.eye(n)
            return _rel(g.exp(P, g.transport(P, g.log(I, Q))), g.add(P, Q))

        def log_exp(rng, n, g=g):
            P, Q = pts(rng, n, 2)
            return _rel(g.exp(P, g.log(P, Q)), Q)

        checks += [
            Check(f"{tag}.G1", "I + P = P", g1, "gyrogroup_axioms"),
            Check(f"{tag}.G2", "(-P) + P = I", g2, "gyrogroup_axioms"),
            Check(f"{tag}.G3", "P + (Q + R) = (P + Q) + gyr[P,Q]R", g3, "gyrogroup_axioms"),
            Check(f"{tag}.G4", "gyr[P,Q] = gyr[P + Q, Q]", g4, "gyrogroup_axioms"),
            Check(f"{tag}.gyrocommutative", "P + Q = gyr[P,Q](Q + P)", comm, "gyrogroup_axioms"),
            Check(f"{tag}.V1", "1*P = P, 0*P = t*I = I, (-1)*P = -P", v1, "gyrovector_axioms"),
            Check(f"{tag}.V2", "(s+t)*P = s*P + t*P", v2, "gyrovector_axioms"),
            Check(f"{tag}.V3", "(st)*P = s*(t*P)", v3, "gyrovector_axioms"),
            Check(f"{tag}.V4", "gyr[P,Q](t*R) = t*gyr[P,Q]R", v4, "gyrovector_axioms"),
            Check(f"{tag}.V5", "gyr[s*P, t*P] = Id", v5, "gyrovector_axioms"),
            Check(f"{tag}.scalar_construction", "t*P = Exp_I(t Log_I P)", scalar_construction, "gyrovector_axioms"),
            Check(f"{tag}.left_cancellation", "(-P) + (P + Q) = Q", cancel, "left_cancellation"),
            Check(f"{tag}.transport", "Exp_P(T_{I->P} Log_I Q) = P + Q", transport, "transport_reconstruction"),
            Check(f"{tag}.exp_log", "Exp_P(Log_P Q) = Q", log_exp, "transport_reconstruction"),
        ]
        if m is not SpdMetric.AI:

            def flat(rng, n, g=g):
                P, Q, R = pts(rng, n)
                return _rel(g.gyr(P, Q, R), R)

            checks.append(Check(f"{tag}.flat_gyration", "gyr[P,Q]R = R", flat, "gyrogroup_axioms"))
        if m is SpdMetric.LC:

            def square(rng, n, g=g):
                P, Q = pts(rng, n, 2)
                lhs = mk.cholesky(np.asarray(g.add(P, Q)))
                return _rel(lhs, lt_add(mk.cholesky(P), mk.cholesky(Q)))

            checks.append(
                Check("lc.cholesky_square", "chol(P + Q) = chol(P) + chol(Q)", square, "cholesky_square")
            )
    return checks


def _spd_isometry_checks():
    checks = []
    for m in SpdMetric:
        g = spd_space(m)
        tag = m.value

        def translation(rng, n, g=g):
            A, P, Q = (gen_spd(rng, n) for _ in range(3))
            d = g.distance(P, Q)
            return _srel(g.distance(g.add(A, P), g.add(A, Q)), d)

        def gyration(rng, n, g=g):
            A, B, P, Q = (gen_spd(rng, n) for _ in range(4))
            d = g.distance(P, Q)
            return _srel(g.distance(g.gyr(A, B, P), g.gyr(A, B, Q)), d)

        def inverse(rng, n, g=g):
            P, Q = (gen_spd(rng, n) for _ in range(2))
            return _srel(g.distance(g.inverse(P), g.inverse(Q)), g.distance(P, Q))

        def symmetry(rng, n, g=g):
            P, Q = (gen_spd(rng, n) for _ in range(2))
            return _srel(g.distance(P, Q), g.distance(Q, P))

        checks += [
            Check(f"{tag}.translation_isometry", "d(A+P, A+Q) = d(P,Q)", translation, "spd_gyroisometries"),
            Check(f"{tag}.gyration_isometry", "d(gyr[A,B]P, gyr[A,B]Q) = d(P,Q)", gyration, "spd_gyroisometries"),
            Check(f"{tag}.inverse_isometry", "d(-P, -Q) = d(P,Q)", inverse, "spd_gyroisometries"),
            Check(f"{tag}.distance_symmetry", "d(P,Q) = d(Q,P)", symmetry, "distance_symmetry"),
        ]
        if m is not SpdMetric.AI:

            def triangle(rng, n, g=g):
                P, Q, R = (gen_spd(rng, n) for _ in range(3))
                return triangle_report(g, P, Q, R).max_residual

            checks.append(
                Check(
                    f"{tag}.gyrotriangle_laws",
                    "cosine and sine laws of gyrotriangles",
                    triangle,
                    "gyrotriangle_laws",
                )
            )
    return checks


def _random_plane(rng, m, n):
    while True:
        W = gen_sym(rng, n)
        try:
            return mlr.Hypergyroplane(m, gen_spd(rng, n), W)
        except GyroError:
            continue


def refined_plane_minimum(H, X, rng, samples=200):
    """Smallest ``d(X, Q)`` over plane points ``Q``: best random sample, then BFGS."""
    g = H.space
    basis = mlr.complement_basis(H)
    flat = basis.reshape(basis.shape[0], -1)
    n = H.n
    exp_at = g.exp_map(H.P)
    from_x = g.translation(g.inverse(X))

    def dist(c):
        V = (c @ flat).reshape(n, n)
        return float(np.linalg.norm(g.coords(from_x(exp_at(0.5 * (V + V.T))))))

    starts = rng.standard_normal((samples, basis.shape[0]))
    vals = [dist(c) for c in starts]
    c0 = starts[int(np.argmin(vals))]
    res = minimize(dist, c0, method="BFGS", options={"gtol": 1e-10})
    return min(float(res.fun), min(vals))


def _spd_mlr_checks():
    checks = []
    for m in SpdMetric:
        tag = m.value

        if m is not SpdMetric.AI:

            def lower_bound(rng, n, m=m):
                H = _random_plane(rng, m, n)
                X = gen_spd(rng, n)
                f = mlr.plane_distance(H, X)
                g = H.space
                draw = mlr.plane_sampler(H)
                from_x = g.translation(g.inverse(X))
                shortest = min(g.norm(from_x(draw(rng))) for _ in range(1000))
                return max(0.0, f - shortest)

            def sampled_minimum(rng, n, m=m):
                H = _random_plane(rng, m, n)
                X = gen_spd(rng, n)
                f = mlr.plane_distance(H, X)
                return abs(refined_plane_minimum(H, X, rng) - f) / max(f, 1e-12)

            checks += [
                Check(
                    f"{tag}.plane_lower_bound",
                    "d(X, Q) >= d(X, H) for 1000 sampled Q in H",
                    lower_bound,
                    "plane_lower_bound",
                    tol=1e-9,
                ),
                Check(
                    f"{tag}.plane_minimum",
                    "refined min over H of d(X, Q) equals d(X, H)",
                    sampled_minimum,
                    "plane_lower_bound",
                    tol=1e-3,
                ),
            ]

        def numeric(rng, n, m=m):
            H = _random_plane(rng, m, n)
            X = gen_spd(rng, n)
            f = mlr.plane_distance(H, X)
            seed = int(rng.integers(2**32))
            return abs(mlr.pseudodist_numeric(H, X, seed=seed) - f) / max(f, 1e-12)

        covers = "ai_formula_fidelity" if m is SpdMetric.AI else "pseudo_equals_true"
        checks.append(
            Check(
                f"{tag}.pseudo_distance",
                "sin(max gyroangle) d(X,P) matches the closed form",
                numeric,
                covers,
                tol=1e-3,
            )
        )

        def blocks(rng, n, m=m):
            N = int(rng.integers(1, 4))
            planes = [_random_plane(rng, m, n) for _ in range(N)]
            X = [gen_spd(rng, n) for _ in range(N)]
            big = mlr.Hypergyroplane(
                m, _blockdiag([h.P for h in planes]), _blockdiag([h.W for h in planes])
            )
            direct = mlr.plane_distance(big, _blockdiag(X))
            return _srel(mlr.blockdiag_dist(m, planes, X), direct)

        def softmax_check(rng, n, m=m):
            K = int(rng.integers(2, 5))
            model = mlr.MlrModel(m, tuple((_random_plane(rng, m, n),) for _ in range(K)))
            X = gen_spd(rng, n)
            logits = mlr.mlr_logits(model, X)
            residuals = np.array([mlr.plane_residual(c[0], X) for c in model.classes])
            probs = mlr.mlr_probs(model, X)
            shifted = softmax(logits + rng.normal() * 10.0)
            argmax_moved = float(np.argmax(shifted) != np.argmax(probs))
            return max(
                abs(float(np.sum(probs)) - 1.0),
                _rel(logits, residuals),
                float(np.max(np.abs(shifted - probs))),
                argmax_moved,
            )

        checks += [
            Check(
                f"{tag}.blockdiag",
                "per-block aggregation equals the assembled block-diagonal formula",
                blocks,
                "blockdiag_consistency",
                tol=1e-9,
            ),
            Check(
                f"{tag}.softmax",
                "probabilities sum to 1, logits equal signed residuals, shift invariance",
                softmax_check,
                "softmax_normalization",
            ),
        ]
    return checks


def _blockdiag(mats):
    n = sum(M.shape[0] for M in mats)
    out = np.zeros((n, n))
    i = 0
    for M in mats:
        k = M.shape[0]
        out[i : i + k, i : i + k] = M
        i += k
    return out


def _frames(rng, dim, k):
    n, p = dim
    return [gen_onb_near(rng, n, p) for _ in range(k)]


def _gr_axiom_checks():
    def proj(rng, dim, k):
        return [gr.tau(U) for U in _frames(rng, dim, k)]

    def pg1(rng, dim):
        (P,) = proj(rng, dim, 1)
        return _rel(gr.gr_add(gr.identity_projector(*dim), P), P)

    def pg2(rng, dim):
        (P,) = proj(rng, dim, 1)
        return _rel(gr.gr_add(gr.gr_inverse(P), P), gr.identity_projector(*dim))

    def pg3(rng, dim):
        P, Q, R = proj(rng, dim, 3)
        return _rel(gr.gr_add(P, gr.gr_add(Q, R)), gr.gr_add(gr.gr_add(P, Q), gr.gr_gyr(P, Q, R)))

    def pg4(rng, dim):
        P, Q, R = proj(rng, dim, 3)
        return _rel(gr.gr_gyr(P, Q, R), gr.gr_gyr(gr.gr_add(P, Q), Q, R))

    def pcomm(rng, dim):
        P, Q = proj(rng, dim, 2)
        return _rel(gr.gr_add(P, Q), gr.gr_gyr(P, Q, gr.gr_add(Q, P)))

    tau = gr.tau

    def og1(rng, dim):
        (U,) = _frames(rng, dim, 1)
        return _rel(tau(gr.onb_add(gr.base_frame(*dim), U)), tau(U))

    def og2(rng, dim):
        (U,) = _frames(rng, dim, 1)
        return _rel(tau(gr.onb_add(gr.onb_inverse(U), U)), gr.identity_projector(*dim))

    def og3(rng, dim):
        U, V, W = _frames(rng, dim, 3)
        lhs = gr.onb_add(U, gr.onb_add(V, W))
        rhs = gr.onb_add(gr.onb_add(U, V), gr.onb_gyr(U, V, W))
        return _rel(tau(lhs), tau(rhs))

    def og4(rng, dim):
        U, V, W = _frames(rng, dim, 3)
        return _rel(tau(gr.onb_gyr(U, V, W)), tau(gr.onb_gyr(gr.onb_add(U, V), V, W)))

    def ocomm(rng, dim):
        U, V = _frames(rng, dim, 2)
        return _rel(tau(gr.onb_add(U, V)), tau(gr.onb_gyr(U, V, gr.onb_add(V, U))))

    c = "gr_gyrogroup_axioms"
    return [
        Check("proj.G1", "I_np + P = P", pg1, c),
        Check("proj.G2", "(-P) + P = I_np", pg2, c),
        Check("proj.G3", "P + (Q + R) = (P + Q) + gyr[P,Q]R", pg3, c),
        Check("proj.G4", "gyr[P,Q] = gyr[P + Q, Q]", pg4, c),
        Check("proj.gyrocommutative", "P + Q = gyr[P,Q](Q + P)", pcomm, c),
        Check("onb.G1", "base + U spans U", og1, c),
        Check("onb.G2", "(-U) + U spans the base", og2, c),
        Check("onb.G3", "left gyroassociativity, compared through tau", og3, c),
        Check("onb.G4", "left reduction, compared through tau", og4, c),
        Check("onb.gyrocommutative", "U + V = gyr[U,V](V + U), compared through tau", ocomm, c),
    ]


def _gr_isometry_checks():
    def proj(rng, dim, k):
        return [gr.tau(U) for U in _frames(rng, dim, k)]

    def translation(rng, dim):
        A, P, Q = proj(rng, dim, 3)
        return _srel(gr.gr_gyrodistance(gr.gr_add(A, P), gr.gr_add(A, Q)), gr.gr_gyrodistance(P, Q))

    def gyration(rng, dim):
        A, B, P, Q = proj(rng, dim, 4)
        d = gr.gr_gyrodistance(P, Q)
        return _srel(gr.gr_gyrodistance(gr.gr_gyr(A, B, P), gr.gr_gyr(A, B, Q)), d)

    def gyration_norm(rng, dim):
        A, B, P = proj(rng, dim, 3)
        return _srel(gr.gr_norm(gr.gr_gyr(A, B, P)), gr.gr_norm(P))

    def inverse(rng, dim):
        P, Q = proj(rng, dim, 2)
        return _srel(gr.gr_gyrodistance(gr.gr_inverse(P), gr.gr_inverse(Q)), gr.gr_gyrodistance(P, Q))

    return [
        Check("gr.translation_isometry", "d(A+P, A+Q) = d(P,Q)", translation, "gr_translation_isometry"),
        Check("gr.gyration_isometry", "d(gyr[A,B]P, gyr[A,B]Q) = d(P,Q)", gyration, "gr_gyration_isometry"),
        Check("gr.gyration_norm", "||gyr[A,B]P|| = ||P||", gyration_norm, "gr_gyration_isometry"),
        Check("gr.inverse_isometry", "d(-P, -Q) = d(P,Q)", inverse, "gr_inverse_isometry"),
    ]


def _random_orthogonal(rng, p):
    O, _ = np.linalg.qr(rng.standard_normal((p, p)))
    return O


def _gr_onb_checks():
    tau = gr.tau

    def add_square(rng, dim):
        U, V = _frames(rng, dim, 2)
        return _rel(tau(gr.onb_add(U, V)), gr.gr_add(tau(U), tau(V)))

    def scale_square(rng, dim):
        (U,) = _frames(rng, dim, 1)
        t = rng.uniform(-2.0, 2.0)
        return _rel(tau(gr.onb_scale(t, U)), gr.gr_scale(t, tau(U)))

    def gyr_square(rng, dim):
        U, V, W = _frames(rng, dim, 3)
        return _rel(tau(gr.onb_gyr(U, V, W)), gr.gr_gyr(tau(U), tau(V), tau(W)))

    def gyr_orthogonal(rng, dim):
        U, V = _frames(rng, dim, 2)
        F = gr.onb_gyration_matrix(U, V)
        return float(np.linalg.norm(F.T @ F - np.eye(F.shape[0])))

    def exp_log(rng, dim):
        n, p = dim
        # principal angles up to 1.4 rad keep a safe distance from the cut locus
        Q = tau(gen_onb_near(rng, n, p, max_angle=1.4))
        return _rel(gr.gr_exp_identity(gr.gr_log_identity(Q), p), Q)

    def subspace(rng, dim):
        (U,) = _frames(rng, dim, 1)
        V = gen_onb(rng, *dim)
        O = _random_orthogonal(rng, dim[1])
        return max(
            gr.principal_angle_distance(U, U @ O),
            abs(gr.principal_angle_distance(U, V @ O) - gr.principal_angle_distance(U, V)),
        )

    return [
        Check("tau.add", "tau(U + V) = tau(U) + tau(V)", add_square, "tau_squares"),
        Check("tau.scale", "tau(t * U) = t * tau(U)", scale_square, "tau_squares"),
        Check("tau.gyr", "tau(gyr[U,V]W) = gyr[tau U, tau V] tau W", gyr_square, "tau_squares"),
        Check("onb.gyration_orthogonal", "gyration matrix is orthogonal", gyr_orthogonal, "tau_squares"),
        Check("gr.exp_log", "Exp_I(Log_I Q) = Q", exp_log, "gr_exp_log_roundtrip", tol=1e-9),
        Check("pangle.subspace", "principal-angle distance ignores frame rotation", subspace, "subspace_invariance"),
    ]


def _kernel_checks():
    def exp_log(rng, n):
        P = gen_spd(rng, n)
        return float(np.linalg.norm(mk.mat_exp(mk.mat_log_spd(P)) - P) / np.linalg.norm(P))

    def chol(rng, n):
        P = gen_spd(rng, n)
        L = mk.cholesky(P)
        return float(np.linalg.norm(L @ L.T - P) / np.linalg.norm(P))

    def dlog_order(rng, n):
        P = gen_spd(rng, n)
        W = gen_sym(rng, n)
        W /= np.linalg.norm(W)
        exact = mk.frechet_dlog(P, W)

        def err(h):
            fd = (mk.mat_log_spd(P + h * W) - mk.mat_log_spd(P - h * W)) / (2 * h)
            return np.linalg.norm(fd - exact)

        ratio = err(1e-3) / err(5e-4)
        return max(0.0, 3.0 - ratio, ratio - 5.0)

    def dexp_dlog(rng, n):
        S = gen_sym(rng, n)
        W = gen_sym(rng, n)
        return _rel(mk.frechet_dlog(mk.mat_exp(S), mk.frechet_dexp(S, W)), W)

    def eig(rng, n):
        S = gen_sym(rng, n)
        Q, lam = mk.sym_eig(S)
        return max(
            _rel((Q * lam) @ Q.T, S),
            float(np.linalg.norm(Q.T @ Q - np.eye(n))),
            float(np.any(np.diff(lam) > 0)),
        )

    return [
        Check("exp_log_roundtrip", "exp(log P) = P", exp_log, "exp_log_roundtrip", tol=1e-10),
        Check("cholesky_roundtrip", "L L^T = P", chol, "cholesky_roundtrip", tol=1e-12),
        Check(
            "dlog_second_order",
            "central-difference error ratio in [3, 5] when h halves",
            dlog_order,
            "dlog_second_order",
            tol=0.0,
        ),
        Check("dexp_dlog", "Dlog_{exp S}(Dexp_S W) = W", dexp_dlog, "dexp_inverts_dlog", tol=1e-9),
        Check("sym_eig", "Q diag(lam) Q^T = S, orthogonal Q, sorted lam", eig, "exp_log_roundtrip", tol=1e-12),
    ]


def _kgc_checks():
    def params(rng, dim, scale=0.4):
        n, p = dim
        return rng.standard_normal((p, n - p)) * scale

    def rotation(rng, dim):
        s = kgc.EntityEmbedding(params(rng, dim), rng.normal())
        r = kgc.RelationEmbedding(1.0 + params(rng, dim), params(rng, dim))
        O = kgc.materialize(params(rng, dim))
        head = kgc.compose_head(s, r)
        Rot = _random_orthogonal(rng, dim[1])
        return abs(kgc.score_frame(head, O @ Rot, s.bias, 0.3) - kgc.score_frame(head, O, s.bias, 0.3))

    def zero_relation(rng, dim):
        s = kgc.EntityEmbedding(params(rng, dim), rng.normal())
        o = kgc.EntityEmbedding(params(rng, dim), rng.normal())
        A = 1.0 + params(rng, dim)
        r = kgc.RelationEmbedding(A, np.zeros_like(A))
        d = gr.principal_angle_distance(kgc.relation_apply(A, s.B), kgc.materialize(o.B))
        return _srel(kgc.score(s, r, o), -d * d + s.bias + o.bias)

    def ranks(rng, dim):
        Q = 20
        scores = [rng.integers(0, 5, size=int(rng.integers(1, 15))).astype(float) for _ in range(Q)]
        truths = [int(rng.integers(len(s))) for s in scores]
        base = kgc.rank_metrics(scores, truths)
        perm_scores, perm_truths = [], []
        for s, t in zip(scores, truths):
            perm = rng.permutation(len(s))
            perm_scores.append(s[perm])
            perm_truths.append(int(np.flatnonzero(perm == t)[0]))
        return float(np.max(np.abs(np.subtract(base, kgc.rank_metrics(perm_scores, perm_truths)))))

    return [
        Check("kgc.object_rotation", "score depends only on span(O)", rotation, "object_rotation_invariance", tol=1e-10),
        Check("kgc.zero_relation", "B_R = 0 leaves -d(A*S, O)^2 + b_s + b_o", zero_relation, "zero_relation_reduction"),
        Check("kgc.rank_permutation", "rank metrics ignore candidate order", ranks, "rank_permutation_equivariance", tol=0.0),
    ]


SUITES = {
    "spd_axioms": (_spd_axiom_checks, SPD_DIMS),
    "spd_isometries": (_spd_isometry_checks, SPD_DIMS),
    "spd_mlr": (_spd_mlr_checks, (2, 3)),
    "gr_axioms": (_gr_axiom_checks, GR_DIMS),
    "gr_isometries": (_gr_isometry_checks, GR_DIMS),
    "gr_onb_consistency": (_gr_onb_checks, GR_DIMS),
    "kernels": (_kernel_checks, SPD_DIMS),
    "kgc": (_kgc_checks, GR_DIMS),
}

GRASSMANN_SUITES = {"gr_axioms", "gr_isometries", "gr_onb_consistency", "kgc"}


def suite_checks(suite):
    try:
        build, _ = SUITES[suite]
    except KeyError:
        raise ConfigError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}") from None
    return build()


def default_dims(suite):
    suite_checks(suite)
    return list(SUITES[suite][1])


# -- running -------------------------------------------------------------------


@dataclass(frozen=True)
class SuiteConfig:
    suite: str
    trials: int = 100
    seed: int = 0
    tol: float = 1e-8
    dims: tuple = None
    checks: tuple = None  # restrict to these check names

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if not self.tol > 0:
            raise ConfigError("tolerance must be positive")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        dims = tuple(default_dims(self.suite) if self.dims is None else self.dims)
        grass = self.suite in GRASSMANN_SUITES
        norm = []
        for d in dims:
            if grass:
                n, p = (int(x) for x in d)
                if not 1 <= p < n:
                    raise ConfigError(f"invalid Grassmann dimension {n}x{p}")
                norm.append((n, p))
            else:
                d = int(d)
                if d < 1:
                    raise ConfigError(f"invalid matrix order {d}")
                norm.append(d)
        if not norm:
            raise ConfigError("at least one dimension is required")
        object.__setattr__(self, "dims", tuple(norm))


@dataclass
class CheckResult:
    name: str
    statement: str
    covers: str
    trials: int
    tol: float
    max_residual: float
    max_condition: float  # worst generated SPD condition number, None if no SPD input
    errors: int
    first_error: str
    passed: bool


@dataclass
class VerifyReport:
    suite: str
    seed: int
    trials: int
    dims: list
    tol: float
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def to_dict(self):
        return {
            "suite": self.suite,
            "seed": self.seed,
            "trials": self.trials,
            "dims": [list(d) if isinstance(d, tuple) else d for d in self.dims],
            "tol": self.tol,
            "pass": self.passed,
            "checks": [asdict(c) for c in self.checks],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _trial_rng(seed, check_index, dim_index, trial):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(check_index, dim_index, trial)))


def _run_task(check, seed, ci, di, dim, t):
    rng = _trial_rng(seed, ci, di, t)
    _trial_state.cond = 0.0
    try:
        r = float(check.trial(rng, dim))
        err = None if math.isfinite(r) else "non-finite residual"
    except GyroError as exc:
        r, err = None, f"{type(exc).__name__}: {exc}"
    finally:
        cond = _trial_state.cond
        _trial_state.cond = None
    return (r if err is None else None), err, cond


def run_suite(cfg, workers=1):
    """Run every check of ``cfg.suite`` and return a :class:`VerifyReport`."""
    checks = suite_checks(cfg.suite)
    if cfg.checks is not None:
        wanted = set(cfg.checks)
        unknown = wanted - {c.name for c in checks}
        if unknown:
            raise ConfigError(f"unknown checks: {sorted(unknown)}")
        indexed = [(i, c) for i, c in enumerate(checks) if c.name in wanted]
    else:
        indexed = list(enumerate(checks))
    tasks = [
        (c, cfg.seed, ci, di, dim, t)
        for ci, c in indexed
        for di, dim in enumerate(cfg.dims)
        for t in range(cfg.trials)
    ]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda a: _run_task(*a), tasks))
    else:
        outcomes = [_run_task(*a) for a in tasks]

    report = VerifyReport(cfg.suite, cfg.seed, cfg.trials, list(cfg.dims), cfg.tol)
    per = len(cfg.dims) * cfg.trials
    for k, (ci, c) in enumerate(indexed):
        chunk = outcomes[k * per : (k + 1) * per]
        residuals = [r for r, _, _ in chunk if r is not None]
        errors = [e for _, e, _ in chunk if e is not None]
        worst = max(residuals) if residuals else None
        cond = max(c for _, _, c in chunk)
        tol = c.tolerance(cfg.tol)
        report.checks.append(
            CheckResult(
                name=c.name,
                statement=c.statement,
                covers=c.covers,
                trials=per,
                tol=tol,
                max_residual=worst,
                max_condition=cond if cond > 0 else None,
                errors=len(errors),
                first_error=errors[0] if errors else None,
                passed=not errors and worst is not None and worst <= tol,
            )
        )
    return report
