"""Hot inner loops, each with a numba and a pure-numpy implementation.

The public names at the bottom of the module are bound to one of the two
paths at import time (see ``_accel.USE_NUMBA``). Both implementations are
importable under their private names so tests and benchmarks can compare
them directly.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, njit

BLOCK = 4096


# ---------------------------------------------------------------- softplus

@njit
def _sp(y):
    if y > 0.0:
        return y + math.log1p(math.exp(-y))
    return math.log1p(math.exp(y))


@njit
def _sp_inv(x):
    if x > 1.0:
        return x + math.log1p(-math.exp(-x))
    if x == 0.0:
        return -np.inf
    return math.log(math.expm1(x))


def _softplus_numpy(y):
    y = np.asarray(y, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        return np.maximum(y, 0.0) + np.log1p(np.exp(-np.abs(y)))


def _softplus_inv_numpy(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        big = x + np.log1p(-np.exp(-x))
        small = np.log(np.expm1(np.minimum(x, 1.0)))
    return np.where(x > 1.0, big, small)


@njit
def _softplus_numba_flat(y):
    out = np.empty_like(y)
    for i in range(y.size):
        out[i] = _sp(y[i])
    return out


@njit
def _softplus_inv_numba_flat(x):
    out = np.empty_like(x)
    for i in range(x.size):
        out[i] = _sp_inv(x[i])
    return out


def _softplus_numba(y):
    y = np.asarray(y, dtype=float)
    return _softplus_numba_flat(y.ravel()).reshape(y.shape)


def _softplus_inv_numba(x):
    x = np.asarray(x, dtype=float)
    return _softplus_inv_numba_flat(x.ravel()).reshape(x.shape)


# ------------------------------------------------- transformed-linear rows

def _translinear_rows_numpy(A, Z):
    return _softplus_numpy(_softplus_inv_numpy(Z) @ A.T)


@njit
def _translinear_rows_numba(A, Z):
    n, q = Z.shape
    p = A.shape[0]
    out = np.empty((n, p))
    y = np.empty(q)
    for t in range(n):
        for j in range(q):
            y[j] = _sp_inv(Z[t, j])
        for i in range(p):
            s = 0.0
            for j in range(q):
                s += A[i, j] * y[j]
            out[t, i] = _sp(s)
    return out


def _max_linear_rows_numpy(A, Z):
    return np.max(Z[:, None, :] * A[None, :, :], axis=2)


@njit
def _max_linear_rows_numba(A, Z):
    n, q = Z.shape
    p = A.shape[0]
    out = np.empty((n, p))
    for t in range(n):
        for i in range(p):
            m = A[i, 0] * Z[t, 0]
            for j in range(1, q):
                v = A[i, j] * Z[t, j]
                if v > m:
                    m = v
            out[t, i] = m
    return out


# ------------------------------------------------------- angular moments

def _angular_moments_numpy(X, radii, r0):
    mask = radii > r0
    W = X[mask] / radii[mask, None]
    p = X.shape[1]
    S = np.zeros((p, p))
    for start in range(0, W.shape[0], BLOCK):
        Wb = W[start:start + BLOCK]
        S += Wb.T @ Wb
    S = 0.5 * (S + S.T)
    return S, int(mask.sum())


@njit
def _angular_moments_numba(X, radii, r0):
    n, p = X.shape
    S = np.zeros((p, p))
    B = np.zeros((p, p))
    w = np.empty(p)
    count = 0
    for start in range(0, n, BLOCK):
        B[:, :] = 0.0
        stop = min(start + BLOCK, n)
        for t in range(start, stop):
            r = radii[t]
            if r > r0:
                count += 1
                for i in range(p):
                    w[i] = X[t, i] / r
                for i in range(p):
                    for k in range(i, p):
                        B[i, k] += w[i] * w[k]
        S += B
    for i in range(p):
        for k in range(i + 1, p):
            S[k, i] = S[i, k]
    return S, count


# ---------------------------------------------------------- exceedances

def _count_exceed_numpy(X, u, joint):
    above = X > u[None, :]
    hit = above.all(axis=1) if joint else above.any(axis=1)
    return int(hit.sum())


@njit
def _count_exceed_numba(X, u, joint):
    n, p = X.shape
    count = 0
    for t in range(n):
        if joint:
            ok = True
            for i in range(p):
                if not X[t, i] > u[i]:
                    ok = False
                    break
        else:
            ok = False
            for i in range(p):
                if X[t, i] > u[i]:
                    ok = True
                    break
        if ok:
            count += 1
    return count


# --------------------------------------------- alternating projections

def _cp_iterate_numpy(B, Bt, Q, Sigma, tol, max_iter):
    P = np.maximum(B @ Q, 0.0)
    resid = np.linalg.norm(P @ P.T - Sigma)
    it = 0
    while resid > tol and it < max_iter:
        W, _, Vt = np.linalg.svd(Bt @ P)
        Q = W @ Vt
        P = np.maximum(B @ Q, 0.0)
        resid = np.linalg.norm(P @ P.T - Sigma)
        it += 1
    return P, Q, it, resid


@njit
def _frob(M):
    s = 0.0
    for i in range(M.shape[0]):
        for j in range(M.shape[1]):
            s += M[i, j] * M[i, j]
    return math.sqrt(s)


@njit
def _cp_iterate_numba(B, Bt, Q, Sigma, tol, max_iter):
    P = np.maximum(B @ Q, 0.0)
    resid = _frob(P @ P.T - Sigma)
    it = 0
    while resid > tol and it < max_iter:
        W, _, Vt = np.linalg.svd(Bt @ P)
        Q = W @ Vt
        P = np.maximum(B @ Q, 0.0)
        resid = _frob(P @ P.T - Sigma)
        it += 1
    return P, Q, it, resid


# numpy's vectorized exp/log1p beat a scalar numba loop for the elementwise
# transform (see benchmarks/bench_kernels.py), so it is used on both paths
softplus = _softplus_numpy
softplus_inv = _softplus_inv_numpy

if USE_NUMBA:
    translinear_rows = _translinear_rows_numba
    max_linear_rows = _max_linear_rows_numba
    angular_moments = _angular_moments_numba
    count_exceed = _count_exceed_numba
    cp_iterate = _cp_iterate_numba
else:
    translinear_rows = _translinear_rows_numpy
    max_linear_rows = _max_linear_rows_numpy
    angular_moments = _angular_moments_numpy
    count_exceed = _count_exceed_numpy
    cp_iterate = _cp_iterate_numpy
