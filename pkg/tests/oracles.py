"""Brute-force reference computations, independent of the package kernels.

Maps are plain Python callables on numpy arrays; everything is rebuilt from
matrix units so no vec convention is shared with the code under test.
"""

import numpy as np


def units(n, m=None):
    m = n if m is None else m
    for j in range(n):
        for k in range(m):
            E = np.zeros((n, m), dtype=complex)
            E[j, k] = 1
            yield j, k, E


def choi_of(fn, n):
    """``sum_jk e_jk (x) fn(e_jk)`` built block by block."""
    blocks = [[None] * n for _ in range(n)]
    for j, k, E in units(n):
        blocks[j][k] = np.asarray(fn(E), dtype=complex)
    return np.block(blocks)


def min_choi_eig(fn, n):
    C = choi_of(fn, n)
    return float(np.linalg.eigvalsh((C + C.conj().T) / 2)[0])


def as_callable(phi):
    return lambda A: phi.apply(A)


def superop_of(fn, n):
    """Column ``j*n+k`` is the row-major flattening of ``fn(e_jk)``."""
    cols = [np.asarray(fn(E)).reshape(-1) for _, _, E in units(n)]
    return np.array(cols).T


def resolvent_callable(fn, n, t):
    """``A -> fn((I + t fn)^{-1} A)`` via a linear solve on matrix units."""
    M = superop_of(fn, n)
    R = M @ np.linalg.inv(np.eye(n * n) + t * M)
    return lambda A: (R @ np.asarray(A, dtype=complex).reshape(-1)).reshape(n, n)


def first_failure(fn, n, psi_fn=None, ts=None, tol=1e-10):
    """Smallest grid ``t`` where ``fn^(t) - psi_fn^(t)`` is not CP, or None."""
    ts = np.linspace(0, 10, 10001) if ts is None else ts
    for t in ts:
        a = resolvent_callable(fn, n, t)
        if psi_fn is None:
            g = a
        else:
            b = resolvent_callable(psi_fn, n, t)
            g = lambda A, a=a, b=b: a(A) - b(A)
        if min_choi_eig(g, n) < -tol:
            return float(t)
    return None
