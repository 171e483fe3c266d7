"""Gyrovector spaces on SPD matrices under the Log-Euclidean (LE),
Log-Cholesky (LC) and Affine-Invariant (AI) metrics.

Every operation takes the metric as first argument, either an
:class:`SpdMetric` or its string tag (``"le"``, ``"lc"``, ``"ai"``).
"""

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from gyromat import matker as mk
from gyromat._debug import checks_enabled
from gyromat.errors import ConfigError, DegenerateAngle, NotLowerTriPos

ANGLE_EPS = 1e-12


class SpdMetric(str, enum.Enum):
    LE = "le"
    LC = "lc"
    AI = "ai"


def as_metric(m):
    try:
        return SpdMetric(m.lower() if isinstance(m, str) else m)
    except ValueError:
        raise ConfigError(f"unknown SPD metric {m!r}; expected one of le, lc, ai") from None


def _out(M):
    if checks_enabled():
        # positive definiteness only: exact compositions may legitimately
        # fall below the admission floor
        mk.cholesky(M)
    return M


def _tangent(P, W):
    W = mk.check_symmetric(W)
    mk.same_shape(P, W)
    return W


def _fro(A, B):
    return float(np.sum(A * B))


# -- lower-triangular group --------------------------------------------------


def check_lower_tri_pos(U):
    U = mk.as_matrix(U)
    if np.any(np.triu(U, 1) != 0.0):
        raise NotLowerTriPos("strictly upper entries must be zero")
    if not np.all(np.diag(U) > 0.0):
        raise NotLowerTriPos("diagonal entries must be positive")
    return U


def lt_add(U, V):
    """``floor(U) + floor(V) + D(U) D(V)`` on lower-triangular matrices."""
    U = check_lower_tri_pos(U)
    V = check_lower_tri_pos(V)
    mk.same_shape(U, V)
    return np.tril(U, -1) + np.tril(V, -1) + np.diag(np.diag(U) * np.diag(V))


def lt_scale(t, U):
    U = check_lower_tri_pos(U)
    return t * np.tril(U, -1) + np.diag(np.diag(U) ** t)


def lt_inverse(U):
    return lt_scale(-1.0, U)


def lt_gyr(U, V, W):
    """The lower-triangular group is commutative, so every gyration is the identity."""
    check_lower_tri_pos(U)
    check_lower_tri_pos(V)
    return check_lower_tri_pos(W).copy()


def _lt_coords(L):
    # Global chart in which the lower-triangular group is a vector space.
    return np.tril(L, -1) + np.diag(np.log(np.diag(L)))


# -- charted points -----------------------------------------------------------


class ChartedSpd(np.ndarray):
    """Read-only SPD matrix that remembers the chart coordinates it was built from.

    LE results keep their matrix logarithm and LC results their Cholesky
    factor. Chained operations then reuse those coordinates instead of
    recovering them from a product that may be numerically singular. The
    values behave as ordinary arrays; derived arrays (slices, arithmetic) drop
    the chart.
    """

    def __array_finalize__(self, obj):
        self.chart_tag = None
        self.chart = None

    def __reduce__(self):
        return (np.array, (np.asarray(self),))

    def __repr__(self):
        return repr(np.asarray(self))


def _charted(M, tag, chart):
    out = np.array(M, dtype=np.float64).view(ChartedSpd)
    out.chart_tag = tag
    out.chart = chart
    out.flags.writeable = False
    chart.flags.writeable = False
    return out


def _chart_of(P, tag):
    if isinstance(P, ChartedSpd) and P.chart_tag == tag:
        return P.chart
    return None


# -- per-metric geometry -----------------------------------------------------


class SpdSpace:
    """Gyrovector-space operations of one metric on already admitted points.

    Methods trust their inputs: they require positive definiteness (through
    the Cholesky factorization or eigenvalue kernels) but do not enforce the
    relative eigenvalue floor. Exact compositions of admitted points, such as
    ``(-2) * P`` under LC, can be far worse conditioned than the points
    themselves and still be meaningful. The module-level ``spd_*`` functions
    admit their arguments and then delegate here.
    """

    metric = None

    def add(self, P, Q):
        raise NotImplementedError

    def inverse(self, P):
        raise NotImplementedError

    def scale(self, t, P):
        raise NotImplementedError

    def log(self, P, Q):
        raise NotImplementedError

    def exp(self, P, W):
        raise NotImplementedError

    def transport(self, P, W):
        raise NotImplementedError

    def tangent_embed(self, P, U):
        """Linear isometry from the tangent space at ``P`` into a Frobenius space."""
        raise NotImplementedError

    def tangent_inner(self, P, U, V):
        return _fro(self.tangent_embed(P, U), self.tangent_embed(P, V))

    def coords(self, P):
        raise NotImplementedError

    def gyr(self, P, Q, R):
        """``gyr[P,Q]R = (-(P+Q)) + (P + (Q + R))``."""
        return self.add(self.inverse(self.add(P, Q)), self.add(P, self.add(Q, R)))

    def gyrovector(self, P, Q):
        return self.add(self.inverse(P), Q)

    def exp_map(self, P):
        """``W -> Exp_P(W)`` with the ``P``-dependent factors computed once."""
        return lambda W: self.exp(P, W)

    def translation(self, A):
        """``Q -> A + Q`` with the ``A``-dependent factors computed once."""
        return lambda Q: self.add(A, Q)

    def inner(self, P, Q):
        return _fro(self.coords(P), self.coords(Q))

    def norm(self, P):
        return float(np.linalg.norm(self.coords(P)))

    def distance(self, P, Q):
        return self.norm(self.gyrovector(P, Q))

    def angle(self, P, Q, R):
        u = self.coords(self.gyrovector(P, Q))
        v = self.coords(self.gyrovector(P, R))
        nu = np.linalg.norm(u)
        nv = np.linalg.norm(v)
        if nu < ANGLE_EPS or nv < ANGLE_EPS:
            raise DegenerateAngle("a side of the angle has zero length")
        c = _fro(u, v) / (nu * nv)
        return math.acos(min(1.0, max(-1.0, c)))


class _LogEuclidean(SpdSpace):
    metric = SpdMetric.LE

    @staticmethod
    def _point(S):
        return _charted(mk.mat_exp(S), "le", S)

    def coords(self, P):
        S = _chart_of(P, "le")
        return mk.mat_log_spd(P) if S is None else S

    def add(self, P, Q):
        return self._point(self.coords(P) + self.coords(Q))

    def inverse(self, P):
        return self._point(-self.coords(P))

    def scale(self, t, P):
        return self._point(t * self.coords(P))

    def log(self, P, Q):
        logP = self.coords(P)
        return mk.frechet_dexp(logP, self.coords(Q) - logP)

    def exp(self, P, W):
        return self._point(mk.symmetrize(self.coords(P) + mk.frechet_dlog(P, W)))

    def transport(self, P, W):
        return mk.frechet_dexp(self.coords(P), W)

    def exp_map(self, P):
        S = self.coords(P)
        return lambda W: self._point(mk.symmetrize(S + mk.frechet_dlog(P, W)))

    def translation(self, A):
        S = self.coords(A)
        return lambda Q: self._point(S + self.coords(Q))

    def tangent_embed(self, P, U):
        return mk.frechet_dlog(P, U)


class _LogCholesky(SpdSpace):
    metric = SpdMetric.LC

    @staticmethod
    def _point(L):
        return _charted(mk.symmetrize(L @ L.T), "lc", L)

    @staticmethod
    def factor(P):
        L = _chart_of(P, "lc")
        return mk.cholesky(P) if L is None else L

    def add(self, P, Q):
        return self._point(lt_add(self.factor(P), self.factor(Q)))

    def inverse(self, P):
        return self.scale(-1.0, P)

    def scale(self, t, P):
        return self._point(lt_scale(t, self.factor(P)))

    @staticmethod
    def to_lower(L, W):
        """Tangent of SPD at ``L L^T`` to tangent of the Cholesky factor at ``L``."""
        Z = solve_triangular(L, W, lower=True)
        Z = solve_triangular(L, Z.T, lower=True).T
        return L @ mk.half_lower(mk.symmetrize(Z))

    @staticmethod
    def from_lower(L, X):
        return mk.symmetrize(L @ X.T + X @ L.T)

    def log(self, P, Q):
        L = self.factor(P)
        K = self.factor(Q)
        dL = np.diag(L)
        X = np.tril(K, -1) - np.tril(L, -1) + np.diag(dL * np.log(np.diag(K) / dL))
        return self.from_lower(L, X)

    def exp(self, P, W):
        L = self.factor(P)
        X = self.to_lower(L, W)
        dL = np.diag(L)
        K = np.tril(L, -1) + np.tril(X, -1) + np.diag(dL * np.exp(np.diag(X) / dL))
        return self._point(K)

    def exp_map(self, P):
        L = self.factor(P)
        Linv = solve_triangular(L, np.eye(L.shape[0]), lower=True)
        low = np.tril(L, -1)
        dL = np.diag(L)

        def exp_at(W):
            X = L @ mk.half_lower(mk.symmetrize(Linv @ W @ Linv.T))
            return self._point(low + np.tril(X, -1) + np.diag(dL * np.exp(np.diag(X) / dL)))

        return exp_at

    def translation(self, A):
        La = self.factor(A)
        low = np.tril(La, -1)
        dA = np.diag(La)

        def shift(Q):
            Lq = self.factor(Q)
            return self._point(low + np.tril(Lq, -1) + np.diag(dA * np.diag(Lq)))

        return shift

    def transport(self, P, W):
        L = self.factor(P)
        Y = mk.half_lower(W)
        Y = np.tril(Y, -1) + np.diag(np.diag(L) * np.diag(Y))
        return self.from_lower(L, Y)

    def tangent_embed(self, P, U):
        L = self.factor(P)
        X = self.to_lower(L, U)
        return np.tril(X, -1) + np.diag(np.diag(X) / np.diag(L))

    def coords(self, P):
        return _lt_coords(self.factor(P))


class _AffineInvariant(SpdSpace):
    metric = SpdMetric.AI

    def add(self, P, Q):
        S = mk.spd_sqrt(P)
        return mk.symmetrize(S @ Q @ S)

    def inverse(self, P):
        return mk.spd_pow(P, -1.0)

    def scale(self, t, P):
        return mk.spd_pow(P, t)

    def log(self, P, Q):
        S = mk.spd_sqrt(P)
        Si = mk.spd_invsqrt(P)
        return mk.symmetrize(S @ mk.mat_log_spd(mk.symmetrize(Si @ Q @ Si)) @ S)

    def exp(self, P, W):
        S = mk.spd_sqrt(P)
        Si = mk.spd_invsqrt(P)
        return mk.symmetrize(S @ mk.mat_exp(mk.symmetrize(Si @ W @ Si)) @ S)

    def transport(self, P, W):
        S = mk.spd_sqrt(P)
        return mk.symmetrize(S @ W @ S)

    def gyration_matrix(self, P, Q):
        """Orthogonal polar factor of ``P^{1/2} Q^{1/2}``.

        Expanding ``-(P+Q) + (P + (Q + R))`` gives ``F R F^T`` with
        ``F = (P^{1/2} Q P^{1/2})^{-1/2} P^{1/2} Q^{1/2}``, which is exactly this
        factor. Taking it from an SVD keeps ``F`` orthogonal to rounding, whereas
        the literal composition loses accuracy with powers of the condition number.
        """
        U, _, Vt = np.linalg.svd(mk.spd_sqrt(P) @ mk.spd_sqrt(Q))
        return U @ Vt

    def gyr(self, P, Q, R):
        F = self.gyration_matrix(P, Q)
        return mk.symmetrize(F @ R @ F.T)

    def exp_map(self, P):
        S = mk.spd_sqrt(P)
        Si = mk.spd_invsqrt(P)
        return lambda W: mk.symmetrize(S @ mk.mat_exp(mk.symmetrize(Si @ W @ Si)) @ S)

    def translation(self, A):
        S = mk.spd_sqrt(A)
        return lambda Q: mk.symmetrize(S @ Q @ S)

    def tangent_embed(self, P, U):
        Si = mk.spd_invsqrt(P)
        return mk.symmetrize(Si @ U @ Si)

    def coords(self, P):
        return mk.mat_log_spd(P)


_SPACES = {
    SpdMetric.LE: _LogEuclidean(),
    SpdMetric.LC: _LogCholesky(),
    SpdMetric.AI: _AffineInvariant(),
}


def spd_space(m):
    """The :class:`SpdSpace` implementing metric ``m``."""
    return _SPACES[as_metric(m)]


# -- public operations -------------------------------------------------------


def _admit(*mats):
    out = []
    for M in mats:
        A = mk.check_spd(M)
        out.append(M if isinstance(M, ChartedSpd) else A)
    mk.same_shape(*out)
    return out


def spd_add(m, P, Q):
    P, Q = _admit(P, Q)
    return _out(spd_space(m).add(P, Q))


def spd_inverse(m, P):
    (P,) = _admit(P)
    return _out(spd_space(m).inverse(P))


def spd_scale(m, t, P):
    t = float(t)
    if not math.isfinite(t):
        raise ConfigError("scalar must be finite")
    (P,) = _admit(P)
    return _out(spd_space(m).scale(t, P))


def spd_gyr(m, P, Q, R):
    """Gyration ``gyr[P,Q]R = (-(P+Q)) + (P + (Q + R))``.

    Under AI this is evaluated as a conjugation by an orthogonal matrix.
    """
    P, Q, R = _admit(P, Q, R)
    return _out(spd_space(m).gyr(P, Q, R))


def spd_log(m, P, Q):
    """Riemannian logarithm ``Log_P(Q)``, a symmetric tangent at ``P``."""
    P, Q = _admit(P, Q)
    return spd_space(m).log(P, Q)


def spd_exp(m, P, W):
    (P,) = _admit(P)
    return _out(spd_space(m).exp(P, _tangent(P, W)))


def spd_transport_identity(m, P, W):
    """Parallel transport of a tangent at the identity to ``P``."""
    (P,) = _admit(P)
    return spd_space(m).transport(P, _tangent(P, W))


def tangent_inner(m, P, U, V):
    """Metric inner product of two tangents at ``P``."""
    (P,) = _admit(P)
    return spd_space(m).tangent_inner(P, _tangent(P, U), _tangent(P, V))


def tangent_norm(m, P, U):
    return math.sqrt(max(tangent_inner(m, P, U, U), 0.0))


def spd_coords(m, P):
    """``Log_I(P)`` read in the chart where the identity inner product is Frobenius.

    ``log P`` for LE and AI, ``floor(L) + log D(L)`` of the Cholesky factor for LC.
    """
    (P,) = _admit(P)
    return spd_space(m).coords(P)


def spd_inner(m, P, Q):
    P, Q = _admit(P, Q)
    return spd_space(m).inner(P, Q)


def spd_norm(m, P):
    (P,) = _admit(P)
    return spd_space(m).norm(P)


def spd_gyrodistance(m, P, Q):
    """``|| (-P) + Q ||``."""
    P, Q = _admit(P, Q)
    return spd_space(m).distance(P, Q)


def spd_gyroangle(m, P, Q, R):
    """Gyroangle at vertex ``P`` between the gyrovectors towards ``Q`` and ``R``."""
    P, Q, R = _admit(P, Q, R)
    return spd_space(m).angle(P, Q, R)


@dataclass(frozen=True)
class GyroTriangleReport:
    """Sides, angles and law residuals of an SPD gyrotriangle.

    ``p`` is opposite vertex ``P`` (angle ``alpha``), ``q`` opposite ``Q``
    (``beta``), ``r`` opposite ``R`` (``gamma``). Cosine residuals are
    ``|p^2 - (q^2 + r^2 - 2 q r cos alpha)| / (1 + p^2)`` and cyclic; sine
    residuals compare ``sin alpha / p`` with the other two ratios after
    cross-multiplying, so they stay finite when a side is tiny.
    """

    p: float
    q: float
    r: float
    alpha: float
    beta: float
    gamma: float
    cosine_residuals: tuple
    sine_residuals: tuple

    @property
    def max_residual(self):
        return max(self.cosine_residuals + self.sine_residuals)


def gyrotriangle_laws(m, P, Q, R):
    m = as_metric(m)
    if m is SpdMetric.AI:
        raise ConfigError("gyrotriangle laws are established for LE and LC only")
    P, Q, R = _admit(P, Q, R)
    return triangle_report(spd_space(m), P, Q, R)


def triangle_report(space, P, Q, R):
    """Evaluate the gyrotriangle laws with a trusted :class:`SpdSpace`."""
    p = space.distance(Q, R)
    q = space.distance(P, R)
    r = space.distance(P, Q)
    alpha = space.angle(P, Q, R)
    beta = space.angle(Q, P, R)
    gamma = space.angle(R, P, Q)

    def cos_res(a, b, c, ang):
        return abs(a * a - (b * b + c * c - 2.0 * b * c * math.cos(ang))) / (1.0 + a * a)

    def sin_res(s1, a1, s2, a2):
        return abs(s1 * a2 - s2 * a1) / (1.0 + a1 * a2)

    sa, sb, sg = math.sin(alpha), math.sin(beta), math.sin(gamma)
    return GyroTriangleReport(
        p=p,
        q=q,
        r=r,
        alpha=alpha,
        beta=beta,
        gamma=gamma,
        cosine_residuals=(
            cos_res(p, q, r, alpha),
            cos_res(q, r, p, beta),
            cos_res(r, p, q, gamma),
        ),
        sine_residuals=(sin_res(sa, p, sb, q), sin_res(sb, q, sg, r)),
    )
