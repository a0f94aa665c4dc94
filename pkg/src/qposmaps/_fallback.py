"""Reference numpy implementation of the certification kernels.

Mirrors ``_kernels.pyx`` operation for operation; used when the compiled
extension is missing or ``QPOSMAPS_PURE_PYTHON`` is set.
"""

import warnings

import numpy as np
import scipy.linalg as sla

PIVOT_RATIO = 1e-13


def _choi(R, n, m):
    return R.reshape(m, m, n, n).transpose(2, 0, 3, 1).reshape(n * m, n * m)


def _extremes(C):
    w = np.linalg.eigvalsh(C)
    return w[0], max(abs(w[0]), abs(w[-1]))


def choi_min_eig(M, n, m):
    return float(np.linalg.eigvalsh(_choi(np.asarray(M), n, m))[0])


def _lu(A):
    # singularity is judged by the pivot ratio below
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(A, check_finite=False)
    d = np.abs(np.diag(lu))
    if d.min() <= PIVOT_RATIO * d.max():
        return None
    return lu, piv


def resolvent_min_eigs(M, n, grid, power):
    """Min Choi eigenvalue and Choi norm of ``(1+t)**power * M (I + t M)^{-1}`` for each t.

    Returns ``(min_eigs, norms)``; NaN marks grid points where ``I + t M`` is
    numerically singular.
    """
    M = np.asarray(M, dtype=complex)
    N = M.shape[0]
    eye = np.eye(N)
    out = np.empty(len(grid))
    norms = np.empty(len(grid))
    for i, t in enumerate(grid):
        f = _lu(eye + t * M)
        if f is None:
            out[i] = norms[i] = np.nan
            continue
        R = sla.lu_solve(f, M, check_finite=False) * (1.0 + t) ** power
        out[i], norms[i] = _extremes(_choi(R, n, n))
    return out, norms


def dominance_min_eigs(P, Q, n, grid, power):
    """Min Choi eigenvalue and Choi norm of ``(1+t)**power (I+tQ)^{-1} (P-Q) (I+tP)^{-1}``.

    This equals ``(1+t)**power (P(I+tP)^{-1} - Q(I+tQ)^{-1})`` without the
    cancellation of subtracting two resolvents.
    """
    P = np.asarray(P, dtype=complex)
    Q = np.asarray(Q, dtype=complex)
    N = P.shape[0]
    eye = np.eye(N)
    diff = P - Q
    out = np.empty(len(grid))
    norms = np.empty(len(grid))
    for i, t in enumerate(grid):
        fp = _lu(eye + t * P)
        fq = _lu(eye + t * Q)
        if fp is None or fq is None:
            out[i] = norms[i] = np.nan
            continue
        # Y = diff (I+tP)^{-1}  <=>  (I+tP)^T Y^T = diff^T
        Y = sla.lu_solve(fp, diff.T, trans=1, check_finite=False).T
        D = sla.lu_solve(fq, Y, check_finite=False) * (1.0 + t) ** power
        out[i], norms[i] = _extremes(_choi(D, n, n))
    return out, norms
