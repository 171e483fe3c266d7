"""Pure numpy implementation of the compiled kernels in ``_kernels.pyx``."""

import numpy as np

from gyromat.errors import NonFinite, NotSpd, NotSymmetric

FN_EXP = 0
FN_LOG = 1
FN_POW = 2

SPD_FLOOR = 1e-10
GAP_TOL = 1e-12
SYM_TOL = 1e-12


def _eig(S, need_spd):
    S = np.asarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.all(np.isfinite(S)):
        raise NonFinite("matrix has non-finite entries")
    if np.linalg.norm(S - S.T) > SYM_TOL * (1.0 + np.linalg.norm(S)):
        raise (NotSpd if need_spd else NotSymmetric)("matrix is not symmetric")
    w, q = np.linalg.eigh(0.5 * (S + S.T))
    return np.ascontiguousarray(w[::-1]), np.ascontiguousarray(q[:, ::-1])


def eigh(S):
    return _eig(S, False)


def _check_spd(w):
    if not (w[0] > 0.0) or not (w[-1] > SPD_FLOOR * w[0]):
        raise NotSpd(f"eigenvalue floor violated: min {w[-1]:.3e}, max {w[0]:.3e}")


def funm_sym(S, code, t=1.0):
    w, q = _eig(S, code != FN_EXP)
    if code != FN_EXP:
        _check_spd(w)
    with np.errstate(over="ignore"):
        if code == FN_EXP:
            f = np.exp(w)
        elif code == FN_LOG:
            f = np.log(w)
        else:
            f = w**t
    if not np.all(np.isfinite(f)):
        raise NonFinite("matrix function overflowed")
    out = (q * f) @ q.T
    return 0.5 * (out + out.T)


def _divided_differences(w, code):
    a = w[:, None]
    b = w[None, :]
    d = a - b
    m = np.maximum(np.abs(a), np.abs(b))
    close = (d == 0.0) | (np.abs(d) < GAP_TOL * m)
    safe_d = np.where(close, 1.0, d)
    if code == FN_LOG:
        g = np.log1p(np.where(close, 0.0, d / b)) / safe_d
        limit = np.broadcast_to(1.0 / a, d.shape)
    else:
        g = np.exp(b) * np.expm1(np.where(close, 0.0, d)) / safe_d
        limit = np.broadcast_to(np.exp(a), d.shape)
    return np.where(close, limit, g)


def frechet_sym(S, W, code):
    w, q = _eig(S, code == FN_LOG)
    W = np.asarray(W, dtype=np.float64)
    if W.shape != (w.size, w.size):
        raise ValueError("shape mismatch")
    if code == FN_LOG:
        _check_spd(w)
    rot = q.T @ W @ q
    rot = 0.5 * (rot + rot.T)
    g = _divided_differences(w, code)
    g = np.triu(g) + np.triu(g, 1).T
    out = q @ (g * rot) @ q.T
    return 0.5 * (out + out.T)


def cholesky(P):
    P = np.asarray(P, dtype=np.float64)
    if not np.all(np.isfinite(P)):
        raise NonFinite("matrix has non-finite entries")
    try:
        return np.linalg.cholesky(0.5 * (P + P.T))
    except np.linalg.LinAlgError as exc:
        raise NotSpd(f"non-positive Cholesky pivot: {exc}") from None
