"""Dense small-matrix function kernels.

Every routine takes and returns plain ``numpy.ndarray`` objects. Symmetric
results of composite operations are re-symmetrized before being returned.
"""

import numpy as np
import scipy.linalg

from gyromat.errors import DimMismatch, NonFinite, NotSpd, NotSymmetric
from gyromat.matker._backend import kernels

SPD_FLOOR = 1e-10
SYM_TOL = 1e-12

FN_EXP = kernels.FN_EXP
FN_LOG = kernels.FN_LOG
FN_POW = kernels.FN_POW


def as_matrix(M, square=True):
    """Return ``M`` as a finite float64 2-D array, optionally requiring squareness."""
    A = np.asarray(M, dtype=np.float64)
    if A.ndim != 2 or A.size == 0:
        raise DimMismatch(f"expected a non-empty 2-D matrix, got shape {A.shape}")
    if square and A.shape[0] != A.shape[1]:
        raise DimMismatch(f"expected a square matrix, got shape {A.shape}")
    # a finite sum proves finite entries; only fall back to the full scan when
    # the sum is inf or nan
    if not np.isfinite(A.sum()) and not np.isfinite(A).all():
        raise NonFinite("matrix has non-finite entries")
    return A


def symmetrize(M):
    return 0.5 * (M + M.T)


def is_symmetric(M, tol=SYM_TOL):
    M = np.asarray(M)
    return bool(np.linalg.norm(M - M.T) <= tol * (1.0 + np.linalg.norm(M)))


def check_symmetric(M):
    A = as_matrix(M)
    if not is_symmetric(A):
        raise NotSymmetric("matrix is not symmetric")
    return A


def is_spd(P):
    try:
        check_spd(P)
    except (NotSpd, NotSymmetric, DimMismatch, NonFinite):
        return False
    return True


def check_spd(P):
    """Validate an SPD point: symmetric, with ``min eig > 1e-10 * max eig``."""
    A = as_matrix(P)
    if not is_symmetric(A):
        raise NotSpd("matrix is not symmetric")
    w, _ = kernels.eigh(A)
    if not (w[0] > 0.0 and w[-1] > SPD_FLOOR * w[0]):
        raise NotSpd(f"eigenvalue floor violated: min {w[-1]:.3e}, max {w[0]:.3e}")
    return A


def same_shape(*mats):
    shape = mats[0].shape
    for m in mats[1:]:
        if m.shape != shape:
            raise DimMismatch(f"shape {m.shape} does not match {shape}")


def sym_eig(S):
    """Eigendecomposition ``S = Q diag(lam) Q^T`` with ``lam`` sorted descending.

    Returns ``(Q, lam)``.
    """
    w, q = kernels.eigh(as_matrix(S))
    return q, w


def mat_exp(M):
    """Matrix exponential.

    Symmetric inputs go through the eigenbasis; anything else (skew generators
    of Grassmann rotations in particular) uses scaling-and-squaring Pade.
    """
    A = as_matrix(M)
    if is_symmetric(A):
        return kernels.funm_sym(A, FN_EXP)
    with np.errstate(over="raise", invalid="raise"):
        try:
            E = scipy.linalg.expm(A)
        except FloatingPointError:
            raise NonFinite("matrix exponential overflowed") from None
    if not np.all(np.isfinite(E)):
        raise NonFinite("matrix exponential overflowed")
    return E


def mat_log_spd(P):
    return kernels.funm_sym(as_matrix(P), FN_LOG)


def spd_pow(P, t):
    """``P**t`` for SPD ``P`` and real ``t``."""
    return kernels.funm_sym(as_matrix(P), FN_POW, float(t))


def spd_sqrt(P):
    return kernels.funm_sym(as_matrix(P), FN_POW, 0.5)


def spd_invsqrt(P):
    return kernels.funm_sym(as_matrix(P), FN_POW, -0.5)


def cholesky(P):
    """Cholesky factor of an SPD matrix (lower triangular, positive diagonal)."""
    A = as_matrix(P)
    if not is_symmetric(A):
        raise NotSpd("matrix is not symmetric")
    return kernels.cholesky(A)


def frechet_dlog(P, W):
    """Directional derivative of the matrix logarithm at SPD ``P`` along ``W``.

    Computed in the eigenbasis of ``P`` with Daleckii-Krein divided differences
    of ``log``.
    """
    P = as_matrix(P)
    W = as_matrix(W)
    same_shape(P, W)
    return kernels.frechet_sym(P, W, FN_LOG)


def frechet_dexp(S, W):
    """Directional derivative of the matrix exponential at symmetric ``S`` along ``W``.

    This is the inverse linear map of ``frechet_dlog(exp(S), .)``.
    """
    S = as_matrix(S)
    W = as_matrix(W)
    same_shape(S, W)
    return kernels.frechet_sym(S, W, FN_EXP)


def strict_lower(M):
    return np.tril(as_matrix(M), -1)


def diag_part(M):
    return np.diag(np.diag(as_matrix(M)))


def half_lower(M):
    """Strictly lower part plus half the diagonal."""
    M = as_matrix(M)
    return np.tril(M, -1) + 0.5 * np.diag(np.diag(M))


def commutator(A, B):
    A = as_matrix(A)
    B = as_matrix(B)
    same_shape(A, B)
    return A @ B - B @ A
