"""SPD hypergyroplanes, distances to them, and multinomial logistic regression.

A hypergyroplane is ``{Q : <Log_P(Q), W>_P = 0}`` for a base point ``P`` and a
symmetric normal ``W`` read as a tangent vector at ``P``.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp, softmax

from gyromat import matker as mk
from gyromat.errors import ConfigError, DegeneratePlane, DimMismatch, GyroError, NonConvergence
from gyromat.spd import SpdMetric, as_metric, spd_space

PLANE_EPS = 1e-12


def _readonly(A):
    A = np.array(A, dtype=np.float64)
    A.flags.writeable = False
    return A


@dataclass(frozen=True)
class Hypergyroplane:
    metric: SpdMetric
    P: np.ndarray
    W: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "metric", as_metric(self.metric))
        P = mk.check_spd(self.P)
        W = mk.check_symmetric(self.W)
        mk.same_shape(P, W)
        object.__setattr__(self, "P", _readonly(P))
        object.__setattr__(self, "W", _readonly(W))
        if self.normal_norm() <= PLANE_EPS:
            raise DegeneratePlane("plane normal has zero length at the base point")

    @property
    def space(self):
        return spd_space(self.metric)

    @property
    def n(self):
        return self.P.shape[0]

    def normal_norm(self):
        """``||W||_P`` under the metric at the base point."""
        return math.sqrt(max(self.space.tangent_inner(self.P, self.W, self.W), 0.0))


def _as_plane(H):
    if isinstance(H, Hypergyroplane):
        return H
    m, P, W = H
    return Hypergyroplane(m, P, W)


def plane_residual(H, Q):
    """``<Log_P(Q), W>_P``; zero exactly on the plane, signed otherwise."""
    Q = mk.check_spd(Q)
    mk.same_shape(H.P, Q)
    g = H.space
    return g.tangent_inner(H.P, g.log(H.P, Q), H.W)


def complement_basis(H):
    """Tangents at ``P`` orthonormal under the metric and orthogonal to ``W``.

    Returns an array of shape ``(n(n+1)/2 - 1, n, n)``.
    """
    g = H.space
    n = H.n
    basis = []
    for i in range(n):
        for j in range(i, n):
            E = np.zeros((n, n))
            E[i, j] = E[j, i] = 1.0
            basis.append(E)
    feats = np.stack([g.tangent_embed(H.P, E).ravel() for E in basis])
    w = g.tangent_embed(H.P, H.W).ravel()
    # Orthonormalize [w, e_1, ...] in the embedded space; the embedding is
    # linear and injective, so the same coefficients apply to the tangents.
    coeff_w = _embedded_coefficients(feats, w)
    G = feats @ feats.T
    d = len(basis)
    cols = [coeff_w / math.sqrt(coeff_w @ G @ coeff_w)]
    for k in range(d):
        v = np.zeros(d)
        v[k] = 1.0
        for _ in range(2):
            for c in cols:
                v = v - (c @ G @ v) * c
        nv = math.sqrt(max(v @ G @ v, 0.0))
        if nv > 1e-8:
            cols.append(v / nv)
        if len(cols) == d:
            break
    stacked = np.stack(basis)
    return np.stack([np.tensordot(c, stacked, axes=1) for c in cols[1:]])


def _embedded_coefficients(feats, target):
    coeff, *_ = np.linalg.lstsq(feats.T, target, rcond=None)
    return coeff


def plane_sampler(H):
    """``draw(rng, scale=1.0)`` returning random points of ``H``.

    The complement basis and the exponential map at ``P`` are computed once,
    which matters when drawing thousands of points from one plane.
    """
    B = complement_basis(H)
    exp_at = H.space.exp_map(H.P)

    def draw(rng, scale=1.0):
        c = rng.standard_normal(B.shape[0]) * scale
        return exp_at(mk.symmetrize(np.tensordot(c, B, axes=1)))

    return draw


def plane_sample(H, rng, scale=1.0):
    """Random point ``Exp_P(V)`` with ``V`` a tangent metric-orthogonal to ``W``."""
    return plane_sampler(H)(rng, scale)


# -- closed-form distances ---------------------------------------------------


def _terms_le(P, W, X):
    A = mk.mat_log_spd(X) - mk.mat_log_spd(P)
    B = mk.frechet_dlog(P, W)
    return A, B


def _terms_lc(P, W, X):
    L = mk.cholesky(P)
    K = mk.cholesky(X)
    dL = np.diag(L)
    A = np.tril(K, -1) - np.tril(L, -1) + np.diag(np.log(np.diag(K) / dL))
    Linv = np.linalg.inv(L)
    Wt = L @ mk.half_lower(Linv @ W @ Linv.T)
    B = np.tril(Wt, -1) + np.diag(np.diag(Wt) / dL)
    return A, B


def _terms_ai(P, W, X):
    Si = mk.spd_invsqrt(P)
    A = mk.mat_log_spd(mk.symmetrize(Si @ X @ Si))
    B = mk.symmetrize(Si @ W @ Si)
    return A, B


_TERMS = {SpdMetric.LE: _terms_le, SpdMetric.LC: _terms_lc, SpdMetric.AI: _terms_ai}


def _plane_terms(H, X):
    X = mk.check_spd(X)
    mk.same_shape(H.P, X)
    A, B = _TERMS[H.metric](H.P, H.W, X)
    return float(np.sum(A * B)), float(np.sum(B * B))


def _ratio(num, den_sq):
    if den_sq < PLANE_EPS**2:
        raise DegeneratePlane("plane normal vanishes in the distance formula")
    return abs(num) / math.sqrt(den_sq)


def _require(H, m):
    if H.metric is not m:
        raise ConfigError(f"plane uses metric {H.metric.value}, expected {m.value}")


def dist_le(H, X):
    """``|<log X - log P, Dlog_P(W)>| / ||Dlog_P(W)||``."""
    _require(H, SpdMetric.LE)
    return _ratio(*_plane_terms(H, X))


def dist_lc(H, X):
    """Distance to an LC plane computed on Cholesky factors."""
    _require(H, SpdMetric.LC)
    return _ratio(*_plane_terms(H, X))


def pseudodist_ai(H, X):
    """``|<log(P^-1/2 X P^-1/2), P^-1/2 W P^-1/2>| / ||P^-1/2 W P^-1/2||``."""
    _require(H, SpdMetric.AI)
    return _ratio(*_plane_terms(H, X))


def plane_distance(H, X):
    """Closed-form (pseudo-)distance for the plane's own metric."""
    return _ratio(*_plane_terms(H, X))


def blockdiag_dist(m, planes, X):
    """Distance from a block-diagonal point to a block-diagonal plane.

    Parameters
    ----------
    m : SpdMetric or str
    planes : sequence of ``(P_i, W_i)`` pairs or :class:`Hypergyroplane`
    X : sequence of SPD blocks ``X_i``

    The per-block numerators ``<A_i, B_i>`` are summed before taking the
    absolute value; the denominator is ``sqrt(sum ||B_i||^2)``.
    """
    m = as_metric(m)
    planes = [_plane_with_metric(m, h) for h in planes]
    X = list(X)
    if not planes or len(planes) != len(X):
        raise DimMismatch(f"{len(planes)} plane blocks but {len(X)} point blocks")
    num = 0.0
    den = 0.0
    for H, Xi in zip(planes, X):
        a, b = _plane_terms(H, Xi)
        num += a
        den += b
    return _ratio(num, den)


def _plane_with_metric(m, h):
    if isinstance(h, Hypergyroplane):
        if h.metric is not m:
            raise ConfigError("block planes must share one metric")
        return h
    P, W = h
    return Hypergyroplane(m, P, W)


# -- numeric pseudo-distance -------------------------------------------------

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def pseudodist_numeric(H, X, budget=10_000, rng=None, top=10, seed=0):
    """``sin(angle) * d(X, P)`` with the angle at ``P`` minimized over the plane.

    The angle between ``X`` and a plane point ``Exp_P(V)`` does not depend on
    the geodesic parameter, so only unit directions ``V`` orthogonal to ``W``
    are searched: ``budget`` uniform random directions, then coordinate-wise
    golden-section refinement of the ``top`` best. Returns 0 for ``X`` on the
    plane.
    """
    X = mk.check_spd(X)
    mk.same_shape(H.P, X)
    g = H.space
    P = H.P
    cx = g.coords(g.gyrovector(P, X))
    dxp = float(np.linalg.norm(cx))
    if dxp < PLANE_EPS:
        return 0.0
    if abs(plane_residual(H, X)) <= PLANE_EPS * H.normal_norm() * dxp:
        return 0.0
    basis = complement_basis(H)
    flat = basis.reshape(basis.shape[0], -1)
    n = H.n
    ux = cx / dxp
    exp_at_p = g.exp_map(P)
    from_p = g.translation(g.inverse(P))

    def cosine(c):
        V = (c @ flat).reshape(n, n)
        cq = g.coords(from_p(exp_at_p(0.5 * (V + V.T))))
        nq = np.linalg.norm(cq)
        if nq < PLANE_EPS:
            return -1.0
        return float(np.sum(ux * cq) / nq)

    rng = np.random.default_rng(seed) if rng is None else rng
    d = basis.shape[0]
    dirs = rng.standard_normal((budget, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    scores = np.array([cosine(c) for c in dirs])
    order = np.argsort(-scores, kind="stable")[:top]

    best_c, best = None, -2.0
    for idx in order:
        c, val = _coordinate_golden(cosine, dirs[idx], scores[idx], sweeps=2)
        if val > best:
            best_c, best = c, val
    best_c, best = _coordinate_golden(cosine, best_c, best, sweeps=40)
    best = min(1.0, max(-1.0, best))
    return math.sqrt(max(0.0, 1.0 - best * best)) * dxp


def _coordinate_golden(f, c, fc, sweeps, width=0.5, tol=1e-13):
    c = c / np.linalg.norm(c)
    for _ in range(sweeps):
        start = fc
        for k in range(c.size):
            c, fc = _golden_line(f, c, fc, k, width)
        c = c / np.linalg.norm(c)
        fc = f(c)
        if fc - start < tol:
            width *= 0.5
            if width < 1e-9:
                break
    return c, fc


def _golden_line(f, c, fc, k, width, iters=30):
    lo, hi = c[k] - width, c[k] + width

    def at(x):
        y = c.copy()
        y[k] = x
        return f(y)

    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = at(x1), at(x2)
    for _ in range(iters):
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = at(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = at(x1)
    x, fx = (x1, f1) if f1 > f2 else (x2, f2)
    if fx > fc:
        y = c.copy()
        y[k] = x
        return y, fx
    return c, fc


# -- MLR ---------------------------------------------------------------------


@dataclass(frozen=True)
class MlrModel:
    """``K`` classes, each a tuple of per-block planes sharing one metric.

    ``final_loss`` is filled in by the trainer.
    """

    metric: SpdMetric
    classes: tuple
    final_loss: float = None

    def __post_init__(self):
        m = as_metric(self.metric)
        object.__setattr__(self, "metric", m)
        classes = tuple(
            tuple(_plane_with_metric(m, h) for h in (c if isinstance(c, (list, tuple)) else [c]))
            for c in self.classes
        )
        if len(classes) < 2:
            raise ConfigError("an MLR model needs at least two classes")
        shapes = [h.P.shape for h in classes[0]]
        for c in classes:
            if [h.P.shape for h in c] != shapes:
                raise DimMismatch("all classes must share one block structure")
        object.__setattr__(self, "classes", classes)

    @property
    def K(self):
        return len(self.classes)

    @property
    def blocks(self):
        return len(self.classes[0])


def _blocks_of(model, X):
    if isinstance(X, np.ndarray) and X.ndim == 2:
        X = [X]
    X = list(X)
    if len(X) != model.blocks:
        raise DimMismatch(f"model has {model.blocks} blocks, point has {len(X)}")
    return X


def mlr_logits(model, X):
    """``sign(<Log_P(X), W>_P) * ||W||_P * d(X, H)`` per class."""
    X = _blocks_of(model, X)
    out = np.empty(model.K)
    for k, planes in enumerate(model.classes):
        residual = sum(plane_residual(H, Xi) for H, Xi in zip(planes, X))
        norm = math.sqrt(sum(H.normal_norm() ** 2 for H in planes))
        dist = blockdiag_dist(model.metric, planes, X)
        out[k] = np.sign(residual) * norm * dist
    return out


def mlr_probs(model, X):
    return softmax(mlr_logits(model, X))


# -- finite-difference trainer -----------------------------------------------


@dataclass(frozen=True)
class FitConfig:
    metric: SpdMetric = SpdMetric.LE
    epochs: int = 150
    learning_rate: float = 0.5
    momentum: float = 0.9
    fd_step: float = 1e-5
    init_scale: float = 0.1
    seed: int = 0


@dataclass
class FitResult:
    model: MlrModel
    losses: list = field(default_factory=list)
    accuracy: float = 0.0


def _sym_from_upper(v, n):
    M = np.zeros((n, n))
    M[np.triu_indices(n)] = v
    return M + np.triu(M, 1).T


def _batch_sym_fn(S, fn):
    w, q = np.linalg.eigh(S)
    return np.einsum("bij,bj,bkj->bik", q, fn(w), q)


class _ClassLogits:
    """Logits of one class for a whole batch, as a function of ``(S, W)``.

    The class logit equals the signed tangent residual ``<Log_P(X), W>_P``
    for all three metrics, which is what is evaluated here in batch.
    """

    def __init__(self, metric, X):
        self.metric = metric
        self.X = X
        if metric is SpdMetric.LE:
            self.feat = _batch_sym_fn(X, np.log)
        elif metric is SpdMetric.LC:
            K = np.linalg.cholesky(X)
            d = np.diagonal(K, axis1=1, axis2=2)
            self.feat = np.tril(K, -1) + np.einsum("bi,ij->bij", np.log(d), np.eye(X.shape[1]))

    def __call__(self, S, W):
        P = mk.mat_exp(S)
        if self.metric is SpdMetric.LE:
            B = mk.frechet_dlog(P, W)
            return np.einsum("bij,ij->b", self.feat, B) - float(np.sum(S * B))
        if self.metric is SpdMetric.LC:
            L = mk.cholesky(P)
            dL = np.diag(L)
            Linv = np.linalg.inv(L)
            Wt = L @ mk.half_lower(Linv @ W @ Linv.T)
            B = np.tril(Wt, -1) + np.diag(np.diag(Wt) / dL)
            cP = np.tril(L, -1) + np.diag(np.log(dL))
            return np.einsum("bij,ij->b", self.feat, B) - float(np.sum(cP * B))
        Si = mk.mat_exp(-0.5 * S)
        M = Si @ self.X @ Si
        logM = _batch_sym_fn(0.5 * (M + np.swapaxes(M, 1, 2)), np.log)
        return np.einsum("bij,ij->b", logM, Si @ W @ Si)


def _cross_entropy(logits, y):
    return float(np.mean(logsumexp(logits, axis=1) - logits[np.arange(len(y)), y]))


def mlr_fit_fd(X, y, config=FitConfig(), classes=None):
    """Fit an MLR model by gradient descent on finite-difference gradients.

    ``P_k = exp(S_k)`` keeps every base point SPD; all upper-triangular
    entries of ``S_k`` and ``W_k`` are free parameters. Raises
    :class:`NonConvergence` if the loss did not decrease.
    """
    metric = as_metric(config.metric)
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.intp)
    if X.ndim != 3 or X.shape[1] != X.shape[2] or len(X) != len(y) or len(y) == 0:
        raise ConfigError("expected a stack of square matrices and one label each")
    n = X.shape[1]
    K = int(classes if classes is not None else y.max() + 1)
    if K < 2:
        raise ConfigError("an MLR model needs at least two classes")
    if n > 5 or K > 4 or len(y) > 500:
        raise ConfigError("desk-scale trainer: n <= 5, K <= 4, at most 500 samples")
    if y.min() < 0 or y.max() >= K:
        raise ConfigError("labels must lie in 0..K-1")
    if config.epochs < 1 or config.fd_step <= 0 or config.learning_rate <= 0:
        raise ConfigError("epochs, fd_step and learning_rate must be positive")
    for Xi in X:
        mk.check_spd(Xi)

    rng = np.random.default_rng(config.seed)
    iu = np.triu_indices(n)
    m = len(iu[0])
    center = np.mean(_batch_sym_fn(X, np.log), axis=0)
    theta = np.zeros((K, 2 * m))
    for k in range(K):
        W0 = rng.standard_normal((n, n)) * config.init_scale
        theta[k, :m] = center[iu]
        theta[k, m:] = (W0 + W0.T)[iu] / 2.0

    logit_fn = _ClassLogits(metric, X)

    def column(vec):
        return logit_fn(_sym_from_upper(vec[:m], n), _sym_from_upper(vec[m:], n))

    logits = np.stack([column(theta[k]) for k in range(K)], axis=1)
    losses = [_cross_entropy(logits, y)]
    velocity = np.zeros_like(theta)
    h = config.fd_step
    lr = config.learning_rate
    for _ in range(config.epochs):
        grad = np.zeros_like(theta)
        for k in range(K):
            saved = logits[:, k].copy()
            for j in range(2 * m):
                vec = theta[k].copy()
                vec[j] += h
                logits[:, k] = column(vec)
                up = _cross_entropy(logits, y)
                vec[j] -= 2 * h
                logits[:, k] = column(vec)
                down = _cross_entropy(logits, y)
                grad[k, j] = (up - down) / (2 * h)
            logits[:, k] = saved
        velocity = config.momentum * velocity - lr * grad
        candidate = theta + velocity
        try:
            new_logits = np.stack([column(candidate[k]) for k in range(K)], axis=1)
            new_loss = _cross_entropy(new_logits, y)
        except GyroError:
            new_loss = math.inf
        if not math.isfinite(new_loss) or new_loss > losses[-1]:
            # overshoot: drop the momentum and retry from the same point
            velocity = np.zeros_like(theta)
            lr *= 0.5
            losses.append(losses[-1])
            continue
        theta, logits = candidate, new_logits
        losses.append(new_loss)
    if not losses[-1] < losses[0]:
        raise NonConvergence(f"loss did not decrease ({losses[0]:.6g} -> {losses[-1]:.6g})")
    classes_ = []
    for k in range(K):
        S = _sym_from_upper(theta[k, :m], n)
        W = _sym_from_upper(theta[k, m:], n)
        classes_.append((Hypergyroplane(metric, mk.mat_exp(S), W),))
    model = MlrModel(metric, tuple(classes_), final_loss=losses[-1])
    accuracy = float(np.mean(np.argmax(logits, axis=1) == y))
    return FitResult(model=model, losses=losses, accuracy=accuracy)


def make_clusters(n=3, K=3, samples=300, seed=7, spread=1.0, noise=0.5):
    """Synthetic SPD clusters separated in log space.

    Class means are random symmetric matrices with entries of scale
    ``spread``; each sample adds symmetric Gaussian noise of scale ``noise``
    before exponentiating. Labels cycle through the classes.
    """
    if samples < K or K < 2 or n < 1:
        raise ConfigError("need n >= 1, K >= 2 and at least one sample per class")
    rng = np.random.default_rng(seed)
    means = rng.standard_normal((K, n, n)) * spread
    means = 0.5 * (means + np.swapaxes(means, 1, 2))
    y = np.arange(samples) % K
    E = rng.standard_normal((samples, n, n)) * noise
    S = means[y] + 0.5 * (E + np.swapaxes(E, 1, 2))
    X = _batch_sym_fn(S, np.exp)
    return 0.5 * (X + np.swapaxes(X, 1, 2)), y


def demo_mlr(metrics=("le", "ai"), n=3, K=3, samples=300, seed=7, config=None):
    """Fit each metric on the same synthetic clusters; return a summary dict.

    The summary holds no timings, so equal arguments give equal summaries.
    ``loss_curve`` samples the training loss every 25 epochs plus the last one.
    """
    X, y = make_clusters(n=n, K=K, samples=samples, seed=seed)
    summary = {"n": n, "K": K, "samples": samples, "seed": seed, "results": []}
    for m in metrics:
        cfg = config or FitConfig()
        cfg = FitConfig(**{**cfg.__dict__, "metric": as_metric(m), "seed": seed})
        fit = mlr_fit_fd(X, y, cfg, classes=K)
        summary["results"].append(
            {
                "metric": as_metric(m).value,
                "accuracy": fit.accuracy,
                "initial_loss": fit.losses[0],
                "final_loss": fit.losses[-1],
                "epochs": len(fit.losses) - 1,
                "loss_curve": fit.losses[::25] + fit.losses[-1:],
            }
        )
    return summary
