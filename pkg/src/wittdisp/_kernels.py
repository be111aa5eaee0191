"""Finite-field linear algebra kernels.

Field elements are int codes and arithmetic goes through lookup tables, so one
kernel serves every F_q. The numba path is used when numba imports and
WITTDISP_DISABLE_NUMBA is unset; otherwise a vectorised numpy path runs. Both
paths return identical results.
"""
import os
from functools import lru_cache

import numpy as np

_DISABLED = os.environ.get("WITTDISP_DISABLE_NUMBA", "").strip() not in ("", "0")

try:
    if _DISABLED:
        raise ImportError("disabled by environment")
    from numba import njit
    NUMBA_AVAILABLE = True
except ImportError:
    NUMBA_AVAILABLE = False


def _rref_numpy(M, add, mul, neg, inv):
    R = M.copy()
    rows, cols = R.shape
    rank = 0
    pivots = np.full(rows, -1, dtype=np.int64)
    for c in range(cols):
        if rank == rows:
            break
        nz = np.nonzero(R[rank:, c])[0]
        if nz.size == 0:
            continue
        r = rank + nz[0]
        if r != rank:
            R[[rank, r]] = R[[r, rank]]
        R[rank] = mul[inv[R[rank, c]], R[rank]]
        for i in range(rows):
            if i != rank and R[i, c] != 0:
                f = neg[R[i, c]]
                R[i] = add[R[i], mul[f, R[rank]]]
        pivots[rank] = c
        rank += 1
    return R, rank, pivots


def _rref_loops(M, add, mul, neg, inv):
    R = M.copy()
    rows, cols = R.shape
    rank = 0
    pivots = np.full(rows, -1, dtype=np.int64)
    for c in range(cols):
        if rank == rows:
            break
        r = -1
        for i in range(rank, rows):
            if R[i, c] != 0:
                r = i
                break
        if r < 0:
            continue
        if r != rank:
            for j in range(cols):
                t = R[rank, j]
                R[rank, j] = R[r, j]
                R[r, j] = t
        s = inv[R[rank, c]]
        for j in range(cols):
            R[rank, j] = mul[s, R[rank, j]]
        for i in range(rows):
            if i != rank and R[i, c] != 0:
                f = neg[R[i, c]]
                for j in range(cols):
                    R[i, j] = add[R[i, j], mul[f, R[rank, j]]]
        pivots[rank] = c
        rank += 1
    return R, rank, pivots


def _matmul_numpy(A, B, add, mul):
    n, k = A.shape
    m = B.shape[1]
    out = np.zeros((n, m), dtype=np.int64)
    for t in range(k):
        out = add[out, mul[A[:, t][:, None], B[t][None, :]]]
    return out


def _matmul_loops(A, B, add, mul):
    n, k = A.shape
    m = B.shape[1]
    out = np.zeros((n, m), dtype=np.int64)
    for i in range(n):
        for j in range(m):
            acc = 0
            for t in range(k):
                acc = add[acc, mul[A[i, t], B[t, j]]]
            out[i, j] = acc
    return out


if NUMBA_AVAILABLE:
    rref_kernel = njit(cache=True)(_rref_loops)
    matmul_kernel = njit(cache=True)(_matmul_loops)
else:
    rref_kernel = _rref_numpy
    matmul_kernel = _matmul_numpy


@lru_cache(maxsize=None)
def field_tables(field):
    """numpy (add, mul, neg, inv) tables for a finite field descriptor."""
    q = field.q
    if hasattr(field, "tables"):
        add, mul, neg, inv = field.tables
    else:
        add = [[(a + b) % q for b in range(q)] for a in range(q)]
        mul = [[(a * b) % q for b in range(q)] for a in range(q)]
        neg = [(-a) % q for a in range(q)]
        inv = [0] + [pow(a, -1, q) for a in range(1, q)]
    return (np.array(add, dtype=np.int64), np.array(mul, dtype=np.int64),
            np.array(neg, dtype=np.int64), np.array(inv, dtype=np.int64))


@lru_cache(maxsize=None)
def _prime_tables(p):
    a = np.arange(p, dtype=np.int64)
    add = (a[:, None] + a[None, :]) % p
    mul = (a[:, None] * a[None, :]) % p
    neg = (-a) % p
    inv = np.array([0] + [pow(int(x), -1, p) for x in range(1, p)], dtype=np.int64)
    return add, mul, neg, inv


def rref(field, M):
    """Reduced row echelon form of an int-code matrix over field.

    Returns (R, rank, pivot_columns).
    """
    M = np.asarray(M, dtype=np.int64)
    if M.ndim != 2 or M.shape[0] == 0 or M.shape[1] == 0:
        return M.reshape(M.shape[0] if M.ndim == 2 else 0, -1), 0, []
    add, mul, neg, inv = field_tables(field)
    R, rank, piv = rref_kernel(M, add, mul, neg, inv)
    return R, int(rank), [int(c) for c in piv[:rank]]


def rank(field, M):
    return rref(field, M)[1]


def matmul(field, A, B):
    add, mul, _, _ = field_tables(field)
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    if A.shape[1] == 0:
        return np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    return matmul_kernel(A, B, add, mul)


def solve_prime(rows, rhs, p):
    """x with sum_j x_j rows[j] = rhs over F_p, or None if inconsistent."""
    add, mul, neg, inv = _prime_tables(p)
    n = len(rows)
    dim = len(rhs)
    A = np.zeros((dim, n + 1), dtype=np.int64)
    for j, r in enumerate(rows):
        A[:, j] = np.asarray(r, dtype=np.int64) % p
    A[:, n] = np.asarray(rhs, dtype=np.int64) % p
    R, rk, piv = rref_kernel(A, add, mul, neg, inv)
    piv = [int(c) for c in piv[:rk]]
    if n in piv:
        return None
    x = [0] * n
    for r, c in enumerate(piv):
        x[c] = int(R[r, n])
    return x


def nullspace(field, M):
    """Basis (as rows) of {x : M x = 0} over field."""
    M = np.asarray(M, dtype=np.int64)
    rows, cols = M.shape
    R, rk, piv = rref(field, M) if rows else (M, 0, [])
    _, _, neg, _ = field_tables(field)
    free = [c for c in range(cols) if c not in piv]
    basis = []
    for f in free:
        v = np.zeros(cols, dtype=np.int64)
        v[f] = 1
        for r, c in enumerate(piv):
            v[c] = neg[R[r, f]]
        basis.append(v)
    return np.array(basis, dtype=np.int64).reshape(len(basis), cols)
