# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled small-matrix kernels.

Same call signatures as :mod:`gyromat.matker._pykernels`; the selection happens
in :mod:`gyromat.matker._backend`. Eigendecompositions use cyclic Jacobi
rotations, which are cheap for the n <= 16 matrices the library works with and
give eigenvalues with high relative accuracy.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, log, exp, log1p, expm1, pow, isfinite

from gyromat.errors import NonFinite, NotSpd, NotSymmetric

cnp.import_array()

cdef enum:
    MAX_SWEEPS = 60
    JACOBI_MAX_N = 32
    C_EXP = 0
    C_LOG = 1
    C_POW = 2

cdef double SPD_FLOOR = 1e-10
cdef double GAP_TOL = 1e-12
cdef double SYM_TOL = 1e-12

# function codes shared with the python backend
FN_EXP = C_EXP
FN_LOG = C_LOG
FN_POW = C_POW


cdef int _jacobi(double[:, ::1] a, double[::1] w, double[:, ::1] v) noexcept nogil:
    """Diagonalize the symmetric work matrix ``a`` in place.

    Eigenvalues land in ``w`` (descending), eigenvectors in the columns of ``v``.
    """
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j, p, q, r, sweep
    cdef double apq, app, aqq, theta, t, c, s, tau, g, h, fro, tiny
    cdef bint rotated

    fro = 0.0
    for i in range(n):
        for j in range(n):
            v[i, j] = 1.0 if i == j else 0.0
            fro += a[i, j] * a[i, j]
    tiny = 1e-36 * fro

    for sweep in range(MAX_SWEEPS):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                if apq * apq <= 1e-34 * fabs(app * aqq) or apq * apq <= tiny:
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                rotated = True
                theta = (aqq - app) / (2.0 * apq)
                if fabs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                tau = s / (1.0 + c)
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for r in range(n):
                    if r != p and r != q:
                        g = a[r, p]
                        h = a[r, q]
                        a[r, p] = g - s * (h + g * tau)
                        a[p, r] = a[r, p]
                        a[r, q] = h + s * (g - h * tau)
                        a[q, r] = a[r, q]
                    g = v[r, p]
                    h = v[r, q]
                    v[r, p] = g - s * (h + g * tau)
                    v[r, q] = h + s * (g - h * tau)
        if not rotated:
            break

    for i in range(n):
        w[i] = a[i, i]
    # insertion sort, descending, permuting eigenvector columns alongside
    for i in range(1, n):
        j = i
        while j > 0 and w[j - 1] < w[j]:
            g = w[j]
            w[j] = w[j - 1]
            w[j - 1] = g
            for r in range(n):
                h = v[r, j]
                v[r, j] = v[r, j - 1]
                v[r, j - 1] = h
            j -= 1
    return 0


cdef _check_finite(const double[:, ::1] m):
    cdef Py_ssize_t i, j
    for i in range(m.shape[0]):
        for j in range(m.shape[1]):
            if not isfinite(m[i, j]):
                raise NonFinite("matrix has non-finite entries")


cdef tuple _eig(S, bint need_spd):
    a = np.array(S, dtype=np.float64, order="C", copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    cdef Py_ssize_t n = a.shape[0]
    _check_finite(a)
    cdef double[:, ::1] am = a
    cdef Py_ssize_t i, j
    cdef double asym = 0.0, fro = 0.0, d
    for i in range(n):
        fro += am[i, i] * am[i, i]
        for j in range(i + 1, n):
            d = am[i, j] - am[j, i]
            asym += 2.0 * d * d
            fro += am[i, j] * am[i, j] + am[j, i] * am[j, i]
            am[i, j] = 0.5 * (am[i, j] + am[j, i])
            am[j, i] = am[i, j]
    if sqrt(asym) > SYM_TOL * (1.0 + sqrt(fro)):
        if need_spd:
            raise NotSpd("matrix is not symmetric")
        raise NotSymmetric("matrix is not symmetric")
    if n > JACOBI_MAX_N:
        w, q = np.linalg.eigh(a)
        return np.ascontiguousarray(w[::-1]), np.ascontiguousarray(q[:, ::-1])
    w_arr = np.empty(n)
    v_arr = np.empty((n, n))
    cdef double[::1] wv = w_arr
    cdef double[:, ::1] vv = v_arr
    with nogil:
        _jacobi(am, wv, vv)
    return w_arr, v_arr


def eigh(S):
    """Return ``(w, Q)`` with ``w`` descending and ``S = Q diag(w) Q^T``."""
    return _eig(S, False)


cdef void _reconstruct(double[:, ::1] q, double[::1] f, double[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t n = q.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double acc
    for i in range(n):
        for j in range(i, n):
            acc = 0.0
            for k in range(n):
                acc += q[i, k] * f[k] * q[j, k]
            out[i, j] = acc
            out[j, i] = acc


cdef _check_spd(double[::1] w):
    cdef Py_ssize_t n = w.shape[0]
    # w is descending
    if not (w[0] > 0.0) or not (w[n - 1] > SPD_FLOOR * w[0]):
        raise NotSpd(
            "eigenvalue floor violated: min %.3e, max %.3e" % (w[n - 1], w[0])
        )


def funm_sym(S, int code, double t=1.0):
    """Apply a scalar function to a symmetric matrix through its eigenbasis.

    ``code`` selects exp, log or power ``t``; log and power require SPD input.
    """
    w_arr, q_arr = _eig(S, code != FN_EXP)
    cdef double[::1] w = w_arr
    cdef double[:, ::1] q = q_arr
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t i
    f_arr = np.empty(n)
    cdef double[::1] f = f_arr
    if code != FN_EXP:
        _check_spd(w)
    for i in range(n):
        if code == C_EXP:
            f[i] = exp(w[i])
        elif code == C_LOG:
            f[i] = log(w[i])
        else:
            f[i] = pow(w[i], t)
        if not isfinite(f[i]):
            raise NonFinite("matrix function overflowed")
    out = np.empty((n, n))
    cdef double[:, ::1] ov = out
    with nogil:
        _reconstruct(q, f, ov)
    return out


cdef inline double _dd_log(double a, double b) noexcept nogil:
    cdef double d = a - b
    cdef double m = a if a > b else b
    if fabs(d) < GAP_TOL * m:
        return 1.0 / a
    return log1p(d / b) / d


cdef inline double _dd_exp(double a, double b) noexcept nogil:
    cdef double d = a - b
    cdef double m = fabs(a) if fabs(a) > fabs(b) else fabs(b)
    if d == 0.0 or fabs(d) < GAP_TOL * m:
        return exp(a)
    return exp(b) * expm1(d) / d


def frechet_sym(S, W, int code):
    """Daleckii-Krein Frechet derivative of exp (code 0) or log (code 1) at ``S``."""
    w_arr, q_arr = _eig(S, code == FN_LOG)
    cdef double[::1] w = w_arr
    cdef double[:, ::1] q = q_arr
    cdef Py_ssize_t n = w.shape[0]
    wm_arr = np.ascontiguousarray(W, dtype=np.float64)
    if wm_arr.shape[0] != n or wm_arr.shape[1] != n:
        raise ValueError("shape mismatch")
    if code == FN_LOG:
        _check_spd(w)
    cdef const double[:, ::1] wm = wm_arr
    tmp_arr = np.empty((n, n))
    rot_arr = np.empty((n, n))
    out = np.empty((n, n))
    cdef double[:, ::1] tmp = tmp_arr
    cdef double[:, ::1] rot = rot_arr
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j, k
    cdef double acc, g
    with nogil:
        # rot = Q^T W Q
        for i in range(n):
            for j in range(n):
                acc = 0.0
                for k in range(n):
                    acc += wm[i, k] * q[k, j]
                tmp[i, j] = acc
        for i in range(n):
            for j in range(n):
                acc = 0.0
                for k in range(n):
                    acc += q[k, i] * tmp[k, j]
                rot[i, j] = acc
        for i in range(n):
            for j in range(i, n):
                if code == C_LOG:
                    g = _dd_log(w[i], w[j])
                else:
                    g = _dd_exp(w[i], w[j])
                acc = 0.5 * (rot[i, j] + rot[j, i]) * g
                rot[i, j] = acc
                rot[j, i] = acc
        # out = Q rot Q^T
        for i in range(n):
            for j in range(n):
                acc = 0.0
                for k in range(n):
                    acc += q[i, k] * rot[k, j]
                tmp[i, j] = acc
        for i in range(n):
            for j in range(i, n):
                acc = 0.0
                for k in range(n):
                    acc += tmp[i, k] * q[j, k]
                o[i, j] = acc
                o[j, i] = acc
    return out


def cholesky(P):
    """Lower-triangular ``L`` with positive diagonal and ``L L^T = P``."""
    a = np.ascontiguousarray(P, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    cdef Py_ssize_t n = a.shape[0]
    _check_finite(a)
    out = np.zeros((n, n))
    cdef const double[:, ::1] am = a
    cdef double[:, ::1] l = out
    cdef Py_ssize_t i, j, k
    cdef double acc
    for j in range(n):
        acc = am[j, j]
        for k in range(j):
            acc -= l[j, k] * l[j, k]
        if not (acc > 0.0):
            raise NotSpd("non-positive Cholesky pivot at column %d" % j)
        l[j, j] = sqrt(acc)
        for i in range(j + 1, n):
            acc = 0.5 * (am[i, j] + am[j, i])
            for k in range(j):
                acc -= l[i, k] * l[j, k]
            l[i, j] = acc / l[j, j]
    return out
