# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled certification kernels.

Same contracts as ``_fallback``; the grid loops run entirely in C with
LAPACK called through scipy's Cython bindings.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport NAN, pow
from libc.stdlib cimport malloc, free
from scipy.linalg.cython_lapack cimport zgetrf, zgetrs, zheev

ctypedef double complex zc

cdef double PIVOT_RATIO = 1e-13

cnp.import_array()


cdef int _lu(zc* a, int N, int* ipiv) noexcept nogil:
    """In-place LU of a column-major N x N matrix; 1 if usable, 0 if singular."""
    cdef int info = 0, i
    cdef double d, dmin = 1e300, dmax = 0.0
    zgetrf(&N, &N, a, &N, ipiv, &info)
    if info < 0:
        return 0
    for i in range(N):
        d = abs(a[i + i * N])
        if d < dmin:
            dmin = d
        if d > dmax:
            dmax = d
    if dmin <= PIVOT_RATIO * dmax:
        return 0
    return 1


cdef class _Heev:
    """Reusable workspace for eigenvalue-only Hermitian solves of one size."""
    cdef int N, lwork
    cdef zc* a
    cdef zc* work
    cdef double* w
    cdef double* rwork
    cdef double norm

    def __cinit__(self, int N):
        cdef int info = 0, lwork = -1
        cdef zc query
        cdef char jobz = b'N', uplo = b'L'
        self.N = N
        self.a = <zc*> malloc(N * N * sizeof(zc))
        self.w = <double*> malloc(N * sizeof(double))
        self.rwork = <double*> malloc(max(1, 3 * N - 2) * sizeof(double))
        zheev(&jobz, &uplo, &N, self.a, &N, self.w, &query, &lwork, self.rwork, &info)
        self.lwork = max(<int> query.real, max(1, 2 * N - 1))
        self.work = <zc*> malloc(self.lwork * sizeof(zc))

    def __dealloc__(self):
        free(self.a)
        free(self.w)
        free(self.rwork)
        free(self.work)

    cdef double min_eig(self) noexcept nogil:
        """Smallest eigenvalue of ``a``; the spectral norm is left in ``self.norm``."""
        cdef int info = 0
        cdef char jobz = b'N', uplo = b'L'
        zheev(&jobz, &uplo, &self.N, self.a, &self.N, self.w, self.work, &self.lwork,
              self.rwork, &info)
        if info != 0:
            self.norm = NAN
            return NAN
        self.norm = max(abs(self.w[0]), abs(self.w[self.N - 1]))
        return self.w[0]


cdef void _fill_choi(zc* c, const zc* r, int n, int m, double scale) noexcept nogil:
    """Column-major Choi matrix of the column-major superoperator ``r`` times ``scale``.

    C[j*m+a, k*m+b] = R[a*m+b, j*n+k]
    """
    cdef int j, a, k, b
    cdef int NC = n * m, NR = m * m
    for j in range(n):
        for a in range(m):
            for k in range(n):
                for b in range(m):
                    c[(j * m + a) + (k * m + b) * NC] = scale * r[(a * m + b) + (j * n + k) * NR]


cdef double _choi_min_eig(const zc[:, ::1] M, int n, int m):
    cdef int NR = m * m, NI = n * n, i, j
    cdef _Heev heev = _Heev(n * m)
    cdef zc* r = <zc*> malloc(NR * NI * sizeof(zc))
    cdef double out
    for i in range(NR):
        for j in range(NI):
            r[i + j * NR] = M[i, j]
    _fill_choi(heev.a, r, n, m, 1.0)
    out = heev.min_eig()
    free(r)
    return out


def _resolvent_min_eigs(const zc[:, ::1] M, int n, double[::1] grid, double power):
    cdef int N = n * n, G = grid.shape[0], g, i, j, info = 0
    cdef double t
    cdef char trans = b'N'
    cdef _Heev heev = _Heev(N)
    cdef zc* a = <zc*> malloc(N * N * sizeof(zc))
    cdef zc* r = <zc*> malloc(N * N * sizeof(zc))
    cdef int* ipiv = <int*> malloc(N * sizeof(int))
    out = np.empty(G)
    norms = np.empty(G)
    cdef double[::1] res = out
    cdef double[::1] nrm = norms
    try:
        for g in range(G):
            t = grid[g]
            for i in range(N):
                for j in range(N):
                    a[i + j * N] = t * M[i, j]
                    r[i + j * N] = M[i, j]
                a[i + i * N] = a[i + i * N] + 1.0
            if not _lu(a, N, ipiv):
                res[g] = NAN
                nrm[g] = NAN
                continue
            # (I + tM)^{-1} M commutes with M (I + tM)^{-1}
            zgetrs(&trans, &N, &N, a, &N, ipiv, r, &N, &info)
            _fill_choi(heev.a, r, n, n, pow(1.0 + t, power))
            res[g] = heev.min_eig()
            nrm[g] = heev.norm
    finally:
        free(a)
        free(r)
        free(ipiv)
    return out, norms


def _dominance_min_eigs(const zc[:, ::1] P, const zc[:, ::1] Q, int n, double[::1] grid,
                       double power):
    cdef int N = n * n, G = grid.shape[0], g, i, j, info = 0
    cdef double t
    cdef char notrans = b'N', trans = b'T'
    cdef _Heev heev = _Heev(N)
    cdef zc* ap = <zc*> malloc(N * N * sizeof(zc))
    cdef zc* aq = <zc*> malloc(N * N * sizeof(zc))
    cdef zc* y = <zc*> malloc(N * N * sizeof(zc))
    cdef zc* z = <zc*> malloc(N * N * sizeof(zc))
    cdef int* pp = <int*> malloc(N * sizeof(int))
    cdef int* pq = <int*> malloc(N * sizeof(int))
    out = np.empty(G)
    norms = np.empty(G)
    cdef double[::1] res = out
    cdef double[::1] nrm = norms
    try:
        for g in range(G):
            t = grid[g]
            for i in range(N):
                for j in range(N):
                    ap[i + j * N] = t * P[i, j]
                    aq[i + j * N] = t * Q[i, j]
                    # y holds (P - Q)^T in column-major order
                    y[i + j * N] = P[j, i] - Q[j, i]
                ap[i + i * N] = ap[i + i * N] + 1.0
                aq[i + i * N] = aq[i + i * N] + 1.0
            if not _lu(ap, N, pp) or not _lu(aq, N, pq):
                res[g] = NAN
                nrm[g] = NAN
                continue
            # (I+tP)^T X = (P-Q)^T  gives X = Y^T with Y = (P-Q)(I+tP)^{-1}
            zgetrs(&trans, &N, &N, ap, &N, pp, y, &N, &info)
            for i in range(N):
                for j in range(N):
                    z[i + j * N] = y[j + i * N]
            zgetrs(&notrans, &N, &N, aq, &N, pq, z, &N, &info)
            _fill_choi(heev.a, z, n, n, pow(1.0 + t, power))
            res[g] = heev.min_eig()
            nrm[g] = heev.norm
    finally:
        free(ap)
        free(aq)
        free(y)
        free(z)
        free(pp)
        free(pq)
    return out, norms


def _c(A):
    return np.ascontiguousarray(A, dtype=np.complex128)


def choi_min_eig(M, n, m):
    return float(_choi_min_eig(_c(M), n, m))


def resolvent_min_eigs(M, n, grid, power):
    return _resolvent_min_eigs(_c(M), n, np.ascontiguousarray(grid, dtype=float), power)


def dominance_min_eigs(P, Q, n, grid, power):
    return _dominance_min_eigs(_c(P), _c(Q), n, np.ascontiguousarray(grid, dtype=float), power)
