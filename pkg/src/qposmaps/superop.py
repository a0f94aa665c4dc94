"""Dense superoperators on matrix spaces.

Every map is stored as a complex matrix acting on row-major vectorized
inputs: the matrix unit ``e_jk`` of an ``r x c`` matrix sits at vec index
``j*c + k``.  Under this convention ``vec(S @ A @ T) = kron(S, T.T) @ vec(A)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import _backend
from .errors import DimensionMismatch, NotCP, NotUnitary

CP_TOL = 1e-10
UNITARY_TOL = 1e-10
SELF_ADJOINT_TOL = 1e-10


def vec(A) -> np.ndarray:
    return np.asarray(A, dtype=complex).reshape(-1)


def unvec(v, shape) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape(shape)


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def _transpose_perm(rows: int, cols: int) -> np.ndarray:
    """Index array ``p`` with ``vec(A.T) = vec(A)[p]`` for ``A`` of shape (rows, cols)."""
    return np.arange(rows * cols).reshape(rows, cols).T.reshape(-1)


@dataclass(frozen=True, eq=False)
class SuperOp:
    """Linear map from ``shape_in`` matrices to ``shape_out`` matrices."""

    matrix: np.ndarray
    shape_in: tuple
    shape_out: tuple

    def __post_init__(self):
        shape_in = tuple(int(x) for x in self.shape_in)
        shape_out = tuple(int(x) for x in self.shape_out)
        matrix = _frozen(self.matrix)
        expected = (shape_out[0] * shape_out[1], shape_in[0] * shape_in[1])
        if matrix.shape != expected:
            raise DimensionMismatch(
                f"superoperator matrix has shape {matrix.shape}, expected {expected}"
            )
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "shape_in", shape_in)
        object.__setattr__(self, "shape_out", shape_out)

    @classmethod
    def square(cls, matrix, n: int, m: int | None = None) -> "SuperOp":
        """Map ``M_n -> M_m`` from its ``m^2 x n^2`` matrix."""
        m = n if m is None else m
        return cls(matrix, (n, n), (m, m))

    @property
    def dim_in(self) -> int:
        return self.shape_in[0]

    @property
    def dim_out(self) -> int:
        return self.shape_out[0]

    @property
    def is_square_map(self) -> bool:
        """True for maps ``M_n -> M_n``."""
        return self.shape_in == self.shape_out and self.shape_in[0] == self.shape_in[1]

    def apply(self, A) -> np.ndarray:
        A = np.asarray(A, dtype=complex)
        if A.shape != self.shape_in:
            raise DimensionMismatch(f"input has shape {A.shape}, expected {self.shape_in}")
        return unvec(self.matrix @ A.reshape(-1), self.shape_out)

    __call__ = apply

    def _check_same(self, other: "SuperOp"):
        if self.shape_in != other.shape_in or self.shape_out != other.shape_out:
            raise DimensionMismatch("superoperators act between different spaces")

    def __add__(self, other):
        self._check_same(other)
        return SuperOp(self.matrix + other.matrix, self.shape_in, self.shape_out)

    def __sub__(self, other):
        self._check_same(other)
        return SuperOp(self.matrix - other.matrix, self.shape_in, self.shape_out)

    def __neg__(self):
        return SuperOp(-self.matrix, self.shape_in, self.shape_out)

    def __mul__(self, scalar):
        if isinstance(scalar, SuperOp):
            return NotImplemented
        return SuperOp(complex(scalar) * self.matrix, self.shape_in, self.shape_out)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return SuperOp(self.matrix / complex(scalar), self.shape_in, self.shape_out)

    def __matmul__(self, other: "SuperOp") -> "SuperOp":
        """Composition: ``(self @ other)(A) = self(other(A))``."""
        if other.shape_out != self.shape_in:
            raise DimensionMismatch("cannot compose: inner shapes differ")
        return SuperOp(self.matrix @ other.matrix, other.shape_in, self.shape_out)

    def compose(self, other: "SuperOp") -> "SuperOp":
        return self @ other

    def adjoint(self) -> "SuperOp":
        """Adjoint with respect to the trace pairing ``tr(A^* B)``."""
        return SuperOp(self.matrix.conj().T, self.shape_out, self.shape_in)

    def star(self) -> "SuperOp":
        """The map ``C -> self(C^*)^*`` between the transposed shapes."""
        p_in = _transpose_perm(self.shape_in[1], self.shape_in[0])
        p_out = _transpose_perm(*self.shape_out)
        mat = np.empty_like(self.matrix)
        mat[:, p_in] = self.matrix.conj()
        mat = mat[p_out, :]
        return SuperOp(mat, self.shape_in[::-1], self.shape_out[::-1])

    def norm(self) -> float:
        """Operator norm of the superoperator matrix (Frobenius norm on matrices)."""
        return float(np.linalg.norm(self.matrix, 2))

    def distance(self, other: "SuperOp") -> float:
        self._check_same(other)
        return float(np.linalg.norm(self.matrix - other.matrix, 2))

    def is_self_adjoint(self, tol: float = SELF_ADJOINT_TOL) -> bool:
        """Whether ``phi(A^*) = phi(A)^*`` (checked exactly on the matrix units)."""
        if self.shape_in[0] != self.shape_in[1] or self.shape_out[0] != self.shape_out[1]:
            return False
        scale = max(1.0, float(np.abs(self.matrix).max(initial=0.0)))
        return bool(np.abs(self.star().matrix - self.matrix).max(initial=0.0) <= tol * scale)

    def is_unital(self, tol: float = 1e-10) -> bool:
        if not self.is_square_map:
            return False
        n = self.dim_in
        return bool(np.abs(self.apply(np.eye(n)) - np.eye(n)).max() <= tol)

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues of the superoperator itself (general complex solver)."""
        return np.linalg.eigvals(self.matrix)

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.matrix, compute_uv=False)

    def __repr__(self):
        return f"SuperOp({self.shape_in} -> {self.shape_out})"


# ---------------------------------------------------------------------------
# Structural constructors
# ---------------------------------------------------------------------------


def identity(n: int) -> SuperOp:
    return SuperOp.square(np.eye(n * n), n)


def zero(n: int, m: int | None = None) -> SuperOp:
    m = n if m is None else m
    return SuperOp.square(np.zeros((m * m, n * n)), n, m)


def transpose_map(n: int) -> SuperOp:
    P = np.eye(n * n)[_transpose_perm(n, n)]
    return SuperOp.square(P, n)


def sandwich(S, T=None) -> SuperOp:
    """The map ``A -> S A T^*`` (``T`` defaults to ``S``)."""
    S = np.asarray(S, dtype=complex)
    T = S if T is None else np.asarray(T, dtype=complex)
    if S.ndim != 2 or T.ndim != 2:
        raise DimensionMismatch("sandwich factors must be matrices")
    return SuperOp(np.kron(S, T.conj()), (S.shape[1], T.shape[1]), (S.shape[0], T.shape[0]))


def left_multiply(X, cols: int) -> SuperOp:
    """``A -> X A`` on matrices with ``cols`` columns."""
    X = np.asarray(X, dtype=complex)
    return SuperOp(np.kron(X, np.eye(cols)), (X.shape[1], cols), (X.shape[0], cols))


def right_multiply(X, rows: int) -> SuperOp:
    """``A -> A X`` on matrices with ``rows`` rows."""
    X = np.asarray(X, dtype=complex)
    return SuperOp(np.kron(np.eye(rows), X.T), (rows, X.shape[0]), (rows, X.shape[1]))


def state_map(D) -> SuperOp:
    """``A -> tr(D A) I``: the rank-one unital map of the state with density ``D``."""
    D = np.asarray(D, dtype=complex)
    n = D.shape[0]
    # row-major: tr(D A) = sum_jk D[k, j] A[j, k] = vec(D.T) . vec(A)
    return SuperOp.square(np.outer(np.eye(n).reshape(-1), D.T.reshape(-1)), n)


def functional_map(tau, C) -> SuperOp:
    """``A -> tr(tau A) C`` for a density-like ``tau`` and output ``C``."""
    tau = np.asarray(tau, dtype=complex)
    C = np.asarray(C, dtype=complex)
    return SuperOp.square(np.outer(C.reshape(-1), tau.T.reshape(-1)), tau.shape[0], C.shape[0])


def schur_map(multipliers) -> SuperOp:
    """Entrywise multiplication ``A -> M o A``."""
    M = np.asarray(multipliers, dtype=complex)
    if M.ndim != 2:
        raise DimensionMismatch("multipliers must be a matrix")
    return SuperOp(np.diag(M.reshape(-1)), M.shape, M.shape)


def schur_multipliers(phi: SuperOp, tol: float = 1e-12) -> np.ndarray | None:
    """Multiplier matrix of ``phi`` if it is a Schur map, else ``None``."""
    mat = phi.matrix
    if phi.shape_in != phi.shape_out or mat.shape[0] != mat.shape[1]:
        return None
    d = np.diag(mat)
    off = mat - np.diag(d)
    if np.abs(off).max(initial=0.0) > tol * max(1.0, np.abs(d).max(initial=0.0)):
        return None
    return d.reshape(phi.shape_out)


# ---------------------------------------------------------------------------
# CP representations
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KrausSet:
    """Linearly independent Kraus operators of a CP map."""

    ops: tuple

    def __post_init__(self):
        ops = tuple(_frozen(S) for S in self.ops)
        if not ops:
            raise ValueError("KrausSet needs at least one operator")
        shape = ops[0].shape
        if any(S.shape != shape or S.ndim != 2 for S in ops):
            raise DimensionMismatch("Kraus operators must share one shape")
        stacked = np.stack([S.reshape(-1) for S in ops])
        smin = np.linalg.svd(stacked, compute_uv=False)[-1]
        if len(ops) > stacked.shape[1] or smin <= 1e-10:
            raise ValueError("Kraus operators are not linearly independent")
        object.__setattr__(self, "ops", ops)

    @property
    def dim_in(self) -> int:
        return self.ops[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.ops[0].shape[0]

    def __len__(self):
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    """``sum_jk e_jk (x) phi(e_jk)`` for a map ``M_n -> M_m``."""

    dim_in: int
    dim_out: int
    matrix: np.ndarray

    def __post_init__(self):
        matrix = _frozen(self.matrix)
        N = self.dim_in * self.dim_out
        if matrix.shape != (N, N):
            raise DimensionMismatch(f"Choi matrix has shape {matrix.shape}, expected {(N, N)}")
        object.__setattr__(self, "matrix", matrix)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        M = self.matrix
        return bool(np.linalg.norm(M - M.conj().T) <= tol * max(1.0, np.linalg.norm(M)))

    def eigenvalues(self) -> np.ndarray:
        M = self.matrix
        return np.linalg.eigvalsh((M + M.conj().T) / 2)


class CPVerdict(NamedTuple):
    verdict: bool
    min_eig: float


def from_kraus(k) -> SuperOp:
    """``A -> sum_i S_i A S_i^*`` from a KrausSet or any sequence of equal-shape matrices."""
    ops = list(k.ops if isinstance(k, KrausSet) else k)
    if not ops:
        raise ValueError("need at least one Kraus operator")
    ops = [np.asarray(S, dtype=complex) for S in ops]
    shape = ops[0].shape
    if any(S.shape != shape for S in ops):
        raise DimensionMismatch("Kraus operators must share one shape")
    m, n = shape
    return SuperOp.square(sum(np.kron(S, S.conj()) for S in ops), n, m)


def _require_square(phi: SuperOp):
    if phi.shape_in[0] != phi.shape_in[1] or phi.shape_out[0] != phi.shape_out[1]:
        raise DimensionMismatch("operation needs a map between square-matrix spaces")


def _choi_array(phi: SuperOp) -> np.ndarray:
    n, m = phi.dim_in, phi.dim_out
    return phi.matrix.reshape(m, m, n, n).transpose(2, 0, 3, 1).reshape(n * m, n * m)


def choi(phi: SuperOp) -> ChoiMatrix:
    _require_square(phi)
    return ChoiMatrix(phi.dim_in, phi.dim_out, _choi_array(phi))


def from_choi(C: ChoiMatrix) -> SuperOp:
    n, m = C.dim_in, C.dim_out
    mat = np.asarray(C.matrix).reshape(n, m, n, m).transpose(1, 3, 0, 2).reshape(m * m, n * n)
    return SuperOp.square(mat, n, m)


def _cp_threshold(scale: float, tol: float) -> float:
    return tol * max(1.0, scale)


def is_completely_positive(phi: SuperOp, tol: float = CP_TOL) -> CPVerdict:
    """Choi test: CP iff the Choi matrix has no eigenvalue below ``-tol`` (scaled by its norm)."""
    _require_square(phi)
    eigs = choi(phi).eigenvalues()
    scale = float(np.abs(eigs).max(initial=0.0))
    min_eig = float(eigs[0])
    return CPVerdict(min_eig >= -_cp_threshold(scale, tol), min_eig)


def choi_min_eig(phi: SuperOp) -> float:
    """Smallest Choi eigenvalue through the selected numerical backend."""
    _require_square(phi)
    return float(_backend.kernels.choi_min_eig(np.ascontiguousarray(phi.matrix), phi.dim_in, phi.dim_out))


def kraus_from_choi(C: ChoiMatrix, tol: float = CP_TOL) -> KrausSet:
    """Kraus operators from the eigendecomposition of a PSD Choi matrix.

    Eigenvectors with eigenvalue above ``tol * ||C||`` are kept, largest first.
    """
    M = np.asarray(C.matrix)
    w, V = np.linalg.eigh((M + M.conj().T) / 2)
    scale = float(np.abs(w).max(initial=0.0))
    if w[0] < -_cp_threshold(scale, tol):
        raise NotCP(f"Choi matrix has eigenvalue {w[0]:.3e}", min_eig=float(w[0]))
    keep = np.nonzero(w > tol * max(scale, 1e-300))[0][::-1]
    n, m = C.dim_in, C.dim_out
    if keep.size == 0:
        raise NotCP("map is zero; it has no linearly independent Kraus presentation", min_eig=0.0)
    ops = [np.sqrt(w[i]) * V[:, i].reshape(n, m).T for i in keep]
    return KrausSet(tuple(ops))


def is_unitary(U, tol: float = UNITARY_TOL) -> bool:
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        return False
    return bool(np.abs(U.conj().T @ U - np.eye(U.shape[0])).max() <= tol)


def conjugate_by_unitary(phi: SuperOp, U) -> SuperOp:
    """``phi_U(A) = U^* phi(U A U^*) U``."""
    _require_square(phi)
    U = np.asarray(U, dtype=complex)
    if not is_unitary(U):
        raise NotUnitary("conjugating matrix is not unitary")
    if U.shape[0] != phi.dim_in or phi.dim_in != phi.dim_out:
        raise DimensionMismatch("unitary does not match the map's dimension")
    pre = np.kron(U, U.conj())
    post = np.kron(U.conj().T, U.T)
    return SuperOp(post @ phi.matrix @ pre, phi.shape_in, phi.shape_out)


def _block_index(N: int, rows: range, cols: range) -> np.ndarray:
    return (np.asarray(rows)[:, None] * N + np.asarray(cols)[None, :]).reshape(-1)


def block_corner_map(phi: SuperOp, gamma: SuperOp | None, psi: SuperOp) -> SuperOp:
    """The map ``[[A, B], [C, D]] -> [[phi(A), gamma(B)], [gamma*(C), psi(D)]]``.

    ``phi`` acts on ``M_n``, ``psi`` on ``M_k`` and ``gamma`` on ``n x k`` blocks;
    ``gamma=None`` means the zero corner.
    """
    _require_square(phi)
    _require_square(psi)
    n, k = phi.dim_in, psi.dim_in
    if phi.dim_out != n or psi.dim_out != k:
        raise DimensionMismatch("diagonal blocks must map M_n to itself")
    if gamma is not None and (gamma.shape_in != (n, k) or gamma.shape_out != (n, k)):
        raise DimensionMismatch(f"corner must map {n}x{k} blocks to {n}x{k} blocks")
    N = n + k
    top, bottom = range(n), range(n, N)
    mat = np.zeros((N * N, N * N), dtype=complex)
    blocks = [(phi, top, top), (psi, bottom, bottom)]
    if gamma is not None:
        blocks += [(gamma, top, bottom), (gamma.star(), bottom, top)]
    for op, rows, cols in blocks:
        idx = _block_index(N, rows, cols)
        mat[np.ix_(idx, idx)] = op.matrix
    return SuperOp.square(mat, N)


def diagonal_blocks(upsilon: SuperOp, n: int) -> tuple[SuperOp, SuperOp, SuperOp]:
    """Inverse of :func:`block_corner_map`: the (phi, gamma, psi) blocks of ``upsilon``."""
    N = upsilon.dim_in
    k = N - n
    top, bottom = range(n), range(n, N)
    out = []
    for rows, cols, shape in ((top, top, (n, n)), (top, bottom, (n, k)), (bottom, bottom, (k, k))):
        idx = _block_index(N, rows, cols)
        out.append(SuperOp(upsilon.matrix[np.ix_(idx, idx)], shape, shape))
    return out[0], out[1], out[2]
