"""Grassmann manifolds as rank-``p`` projectors and as orthonormal frames.

All maps are based at ``I_{n,p} = diag(I_p, 0)`` (projectors) or its frame
``[I_p; 0]``. Tangents at the base are symmetric ``[[0, B], [B^T, 0]]`` with
``B`` of shape ``p x (n-p)``.
"""

import math

import numpy as np

from gyromat import matker as mk
from gyromat._debug import checks_enabled
from gyromat.errors import CutLocus, DimMismatch, NotOrthonormal, NotProjector

CUT_LOCUS_TOL = 1e-8
ONB_TOL = 1e-10


def identity_projector(n, p):
    return np.diag(np.r_[np.ones(p), np.zeros(n - p)])


def base_frame(n, p):
    return np.eye(n, p)


def tangent_from_block(B):
    """``[[0, B], [B^T, 0]]`` for a ``p x (n-p)`` block ``B``."""
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    p, q = B.shape
    X = np.zeros((p + q, p + q))
    X[:p, p:] = B
    X[p:, :p] = B.T
    return X


def block_of(X, p):
    """Inverse of :func:`tangent_from_block`; validates the block structure."""
    X = mk.check_symmetric(X)
    n = X.shape[0]
    if not 0 < p < n:
        raise DimMismatch(f"rank {p} invalid for ambient dimension {n}")
    if np.any(X[:p, :p] != 0.0) or np.any(X[p:, p:] != 0.0):
        raise DimMismatch("tangent at the base must have zero diagonal blocks")
    return X[:p, p:].copy()


def check_onb(U):
    U = mk.as_matrix(U, square=False)
    n, p = U.shape
    if not 0 < p < n:
        raise DimMismatch(f"frame of shape {U.shape} is not n x p with 0 < p < n")
    if np.linalg.norm(U.T @ U - np.eye(p)) >= ONB_TOL:
        raise NotOrthonormal("columns are not orthonormal")
    return U


def check_projector(P, p=None):
    """Validate a rank-``p`` orthogonal projector; returns ``(P, p)``."""
    P = mk.as_matrix(P)
    if not mk.is_symmetric(P, tol=1e-10):
        raise NotProjector("projector is not symmetric")
    if np.linalg.norm(P @ P - P) >= 1e-9:
        raise NotProjector("projector is not idempotent")
    tr = float(np.trace(P))
    rank = int(round(tr))
    if abs(tr - rank) > 1e-8 or (p is not None and rank != p):
        raise NotProjector(f"trace {tr:.10g} does not match the rank")
    if not 0 < rank < P.shape[0]:
        raise NotProjector(f"rank {rank} is degenerate for n = {P.shape[0]}")
    return P, rank


def _same_space(*pairs):
    n, p = pairs[0][0].shape[0], pairs[0][1]
    for M, r in pairs[1:]:
        if M.shape[0] != n or r != p:
            raise DimMismatch("points live on different Grassmannians")
    return n, p


def tau(U):
    """Frame to projector, ``U U^T``."""
    U = check_onb(U)
    return mk.symmetrize(U @ U.T)


def frame_of(P, p=None):
    """An orthonormal frame spanning the range of a projector (top eigenvectors)."""
    P, p = check_projector(P, p)
    Q, _ = mk.sym_eig(P)
    return Q[:, :p].copy()


def _rotation(X, p):
    """``exp([X, I_{n,p}])``: the orthogonal matrix moving the base along ``X``."""
    n = X.shape[0]
    E = mk.mat_exp(mk.commutator(X, identity_projector(n, p)))
    if checks_enabled() and np.linalg.norm(E.T @ E - np.eye(n)) > 1e-10:
        raise NotOrthonormal("conjugating matrix lost orthogonality")
    return E


def _log_frame(U):
    n, p = U.shape
    U1 = U[:p]
    U2 = U[p:]
    smin = np.linalg.svd(U1, compute_uv=False)[-1]
    if not smin > CUT_LOCUS_TOL:
        raise CutLocus(
            f"subspace is in the cut locus of the base (top-block sigma_min = {smin:.3e})"
        )
    M = np.linalg.solve(U1.T, U2.T).T  # U2 U1^{-1}
    Y, t, Zt = np.linalg.svd(M, full_matrices=False)
    B = Zt.T @ np.diag(np.arctan(t)) @ Y.T
    return tangent_from_block(B)


def gr_log_identity(Q, p=None):
    """Riemannian logarithm at ``I_{n,p}``.

    The returned tangent carries a block ``B`` whose singular values are the
    principal angles between ``range(Q)`` and the base subspace.
    """
    Q, p = check_projector(Q, p)
    return _log_frame(frame_of(Q, p))


def gr_exp_identity(X, p):
    """``E I_{n,p} E^T`` with ``E = exp([X, I_{n,p}])``."""
    block_of(X, p)
    E = _rotation(X, p)
    F = E[:, :p]
    return mk.symmetrize(F @ F.T)


def gr_add(P, Q):
    """``P + Q = E_P Q E_P^T`` where ``E_P = exp([Log(P), I_{n,p}])``."""
    P, p = check_projector(P)
    Q, q = check_projector(Q)
    _same_space((P, p), (Q, q))
    E = _rotation(_log_frame(frame_of(P, p)), p)
    return mk.symmetrize(E @ Q @ E.T)


def gr_inverse(P):
    P, p = check_projector(P)
    return gr_exp_identity(-_log_frame(frame_of(P, p)), p)


def gr_scale(t, P):
    P, p = check_projector(P)
    return gr_exp_identity(float(t) * _log_frame(frame_of(P, p)), p)


def gr_gyr(P, Q, R):
    """``gyr[P,Q]R = (-(P+Q)) + (P + (Q + R))``."""
    return gr_add(gr_inverse(gr_add(P, Q)), gr_add(P, gr_add(Q, R)))


def gr_inner(P, Q):
    """Frobenius inner product of the logarithms at the base."""
    return float(np.sum(gr_log_identity(P) * gr_log_identity(Q)))


def gr_norm(P):
    """``||Log(P)||_F``, i.e. ``sqrt(2)`` times the 2-norm of the principal angles."""
    return float(np.linalg.norm(gr_log_identity(P)))


def gr_gyrodistance(P, Q):
    return gr_norm(gr_add(gr_inverse(P), Q))


# -- ONB perspective -----------------------------------------------------------


def _frame_log(U):
    return _log_frame(frame_of(tau(U)))


def onb_add(U, V):
    """``exp([Log(U U^T), I_{n,p}]) V``."""
    U = check_onb(U)
    V = check_onb(V)
    if U.shape != V.shape:
        raise DimMismatch(f"frames of shapes {U.shape} and {V.shape}")
    return _rotation(_frame_log(U), U.shape[1]) @ V


def onb_scale(t, U):
    """``exp([t Log(U U^T), I_{n,p}]) [I_p; 0]``."""
    U = check_onb(U)
    n, p = U.shape
    return _rotation(float(t) * _frame_log(U), p)[:, :p].copy()


def onb_inverse(U):
    return onb_scale(-1.0, U)


def onb_gyration_matrix(U, V):
    """Orthogonal ``F`` with ``gyr[U,V]W = F W`` in the frame perspective."""
    U = check_onb(U)
    V = check_onb(V)
    if U.shape != V.shape:
        raise DimMismatch(f"frames of shapes {U.shape} and {V.shape}")
    p = U.shape[1]
    PU = _frame_log(U)
    PV = _frame_log(V)
    UV = gr_add(tau(U), tau(V))
    return _rotation(-_log_frame(frame_of(UV, p)), p) @ _rotation(PU, p) @ _rotation(PV, p)


def onb_gyr(U, V, W):
    W = check_onb(W)
    F = onb_gyration_matrix(U, V)
    if F.shape[0] != W.shape[0]:
        raise DimMismatch("frames live in different ambient spaces")
    return F @ W


def principal_angles(U, V):
    U = check_onb(U)
    V = check_onb(V)
    if U.shape != V.shape:
        raise DimMismatch(f"frames of shapes {U.shape} and {V.shape}")
    # arccos alone loses half the digits near zero angle; pair cosines with sines
    c = np.linalg.svd(U.T @ V, compute_uv=False)
    s = np.sort(np.linalg.svd(V - U @ (U.T @ V), compute_uv=False))
    return np.arctan2(s, c)


def principal_angle_distance(U, V):
    """``||theta||_2`` over the principal angles between ``span(U)`` and ``span(V)``."""
    return float(math.sqrt(np.sum(principal_angles(U, V) ** 2)))
