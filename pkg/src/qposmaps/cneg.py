"""Conditionally negative maps.

A self-adjoint map ``psi`` on ``M_n`` is conditionally negative when
``sum_ij (f_i, psi(A_i^* A_j) f_j) <= 0`` whenever ``sum_i A_i f_i = 0``;
equivalently ``exp(-s psi)`` is completely positive for every ``s >= 0``.
Such maps have the canonical form

    psi(A) = s A + Y A + A Y^* - sum_i lambda_i S_i A S_i^*

with ``tr Y = tr S_i = 0``, ``tr(S_i^* S_j) = n delta_ij`` and ``lambda_i > 0``.
Unital conditionally negative maps are exactly the inverses of invertible
unital q-positive maps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.integrate import quad_vec

from .errors import (
    NotConditionallyNegative,
    NotSelfAdjoint,
    NotUnital,
    QuadratureMismatch,
    ResidualNotCP,
    Singular,
)
from .jsonio import encode_matrix
from .qorder import PositivityCert
from .superop import (
    CP_TOL,
    SuperOp,
    choi,
    choi_min_eig,
    is_completely_positive,
    sandwich,
)

DEFAULT_S_GRID = (0.01, 0.1, 1.0, 10.0, 100.0)
QUAD_S_MAX = 40.0
QUAD_EPSABS = 1e-10
EXTRACT_TOL = 1e-10
COND_MAX = 1e12


@dataclass(frozen=True)
class CnegForm:
    """Canonical data ``(s, Y, ((lambda_i, S_i), ...))`` of a conditionally negative map."""

    s: float
    Y: np.ndarray
    terms: tuple = ()

    @property
    def n(self) -> int:
        return self.Y.shape[0]

    def reconstruct(self) -> SuperOp:
        """``A -> s A + Y A + A Y^* - sum lambda_i S_i A S_i^*``."""
        n = self.n
        Y = np.asarray(self.Y, dtype=complex)
        I = np.eye(n)
        # vec(A Y^*) = kron(I, conj(Y)) vec(A)
        M = self.s * np.eye(n * n) + np.kron(Y, I) + np.kron(I, Y.conj())
        for lam, S in self.terms:
            M = M - lam * sandwich(S).matrix
        return SuperOp.square(M, n)

    def to_json(self) -> dict:
        return {
            "s": float(self.s),
            "Y": encode_matrix(self.Y),
            "terms": [{"lambda": float(lam), "S": encode_matrix(S)} for lam, S in self.terms],
        }


@dataclass(frozen=True)
class CnegVerdict:
    verdict: bool
    cert: PositivityCert

    def __bool__(self):
        return self.verdict


def _require_self_adjoint(psi: SuperOp):
    if not psi.is_square_map:
        raise NotSelfAdjoint("conditional negativity needs a map M_n -> M_n")
    if not psi.is_self_adjoint():
        raise NotSelfAdjoint("map is not self-adjoint (psi(A^*) != psi(A)^*)")


def semigroup(psi: SuperOp, s: float) -> SuperOp:
    """``exp(-s psi)``."""
    return SuperOp(sla.expm(-s * psi.matrix), psi.shape_in, psi.shape_out)


def is_conditionally_negative(psi: SuperOp, s_grid=DEFAULT_S_GRID, tol: float = CP_TOL) -> CnegVerdict:
    """Exponential test: ``exp(-s psi)`` must pass the CP test at every ``s`` in ``s_grid``.

    The certificate stores the unscaled minimum Choi eigenvalue per ``s``; the
    threshold is ``tol`` scaled by the Choi norm when that exceeds one.
    """
    _require_self_adjoint(psi)
    grid = np.asarray(s_grid, dtype=float)
    min_eigs = np.empty(len(grid))
    failures = []
    for i, s in enumerate(grid):
        E = semigroup(psi, s)
        min_eigs[i] = choi_min_eig(E)
        scale = np.linalg.norm(choi(E).matrix, 2)
        if min_eigs[i] < -tol * max(1.0, scale):
            failures.append(float(s))
    cert = PositivityCert(grid, min_eigs, not failures, tuple(failures), "exponential-grid", "1", tol)
    return CnegVerdict(not failures, cert)


def _tuple_with_zero_sum(rng, n: int, m: int):
    """Random ``(A_i, f_i)``, ``i < m``, with ``sum A_i f_i = 0``.

    ``A_m`` is fixed on ``f_m`` and random on its orthogonal complement.
    """
    def g(*shape):
        return rng.normal(size=shape) + 1j * rng.normal(size=shape)

    fs = [g(n) for _ in range(m)]
    As = [g(n, n) for _ in range(m - 1)]
    rest = sum((A @ f for A, f in zip(As, fs)), np.zeros(n, dtype=complex))
    f = fs[-1]
    P = np.eye(n) - np.outer(f, f.conj()) / (f.conj() @ f)
    As.append(-np.outer(rest, f.conj()) / (f.conj() @ f) + g(n, n) @ P)
    return As, fs


def quadratic_form_witness(psi: SuperOp, rng=None, samples: int = 200, m_max: int = 3, tol: float = 1e-8):
    """Sampled falsifier of the defining inequality.

    Returns ``(value, As, fs)`` for a tuple with ``sum A_i f_i = 0`` and
    ``sum_ij (f_i, psi(A_i^* A_j) f_j) > tol`` (scaled), or None.  A None
    result proves nothing.
    """
    rng = np.random.default_rng(rng)
    n = psi.dim_in
    for _ in range(samples):
        m = int(rng.integers(2, m_max + 1))
        As, fs = _tuple_with_zero_sum(rng, n, m)
        q = 0.0 + 0.0j
        scale = 0.0
        for i in range(m):
            for j in range(m):
                X = psi.apply(As[i].conj().T @ As[j])
                q += fs[i].conj() @ X @ fs[j]
                scale += np.linalg.norm(As[i]) * np.linalg.norm(As[j]) * np.linalg.norm(fs[i]) * np.linalg.norm(fs[j])
        if q.real > tol * max(1.0, scale * np.linalg.norm(psi.matrix, 2)):
            return float(q.real), As, fs
    return None


def _phase_fix(S: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(S).reshape(-1)))
    z = S.reshape(-1)[k]
    return S * (abs(z) / z) if z != 0 else S


def extract_canonical_form(psi: SuperOp, tol: float = EXTRACT_TOL) -> CnegForm:
    """Canonical form of a self-adjoint map.

    ``sI + Y`` is read off as ``f -> (1/n) sum_k psi(f e_k^*) e_k``; the residual
    ``R(A) = s A + Y A + A Y^* - psi(A)`` is diagonalized through its Choi
    matrix.  Raises :class:`ResidualNotCP` with the offending Choi eigenpair
    when ``R`` is not completely positive.
    """
    _require_self_adjoint(psi)
    n = psi.dim_in
    K = np.zeros((n, n), dtype=complex)
    for j in range(n):
        for k in range(n):
            E = np.zeros((n, n))
            E[j, k] = 1.0
            K[:, j] += psi.apply(E)[:, k]
    K /= n
    mu = np.trace(K) / n
    s = float(mu.real)
    Y = K - mu * np.eye(n)
    R = CnegForm(s, Y).reconstruct() - psi
    C = choi(R).matrix
    w, V = np.linalg.eigh((C + C.conj().T) / 2)
    scale = max(1.0, float(np.abs(w).max(initial=0.0)))
    if w[0] < -tol * scale:
        witness = V[:, 0].reshape(n, n).T * np.sqrt(n)
        raise ResidualNotCP(
            f"residual has Choi eigenvalue {w[0]:.3e}; no canonical form with positive weights",
            float(w[0]) / n,
            witness,
        )
    terms = []
    for i in np.argsort(w)[::-1]:
        if w[i] <= tol * scale:
            break
        # Choi eigenvector -> Kraus operator, normalized to tr(S^* S) = n
        S = _phase_fix(np.sqrt(n) * V[:, i].reshape(n, n).T)
        terms.append((float(w[i]) / n, S))
    return CnegForm(s, Y, tuple(terms))


def _require_invertible(M: np.ndarray):
    if np.linalg.cond(M) >= COND_MAX:
        raise Singular("map is numerically singular (condition number >= 1e12)")


def inverse_of_unital_cneg(psi: SuperOp, quad_tol: float = 1e-6) -> SuperOp:
    """``psi^{-1}``, cross-checked against ``int_0^inf exp(-s psi) ds``.

    The integral is truncated at ``s = 40`` where ``||exp(-s psi)|| <= e^{-s}``
    is negligible.  Disagreement beyond ``quad_tol`` raises
    :class:`QuadratureMismatch`.
    """
    if not psi.is_unital():
        raise NotUnital("psi(I) != I")
    if not is_conditionally_negative(psi).verdict:
        raise NotConditionallyNegative("exp(-s psi) fails the CP test")
    M = psi.matrix
    _require_invertible(M)
    direct = np.linalg.inv(M)
    N = M.shape[0]

    def integrand(s):
        E = sla.expm(-s * M)
        return np.concatenate([E.real.ravel(), E.imag.ravel()])

    val, err = quad_vec(integrand, 0.0, QUAD_S_MAX, epsabs=QUAD_EPSABS, epsrel=0.0, norm="max")
    quad = (val[: N * N] + 1j * val[N * N:]).reshape(N, N)
    gap = float(np.abs(quad - direct).max())
    if gap > quad_tol:
        raise QuadratureMismatch(f"quadrature and direct inverse differ by {gap:.3e}")
    return SuperOp(direct, psi.shape_in, psi.shape_out)


def invertible_subordinate_test(phi1: SuperOp, phi2: SuperOp) -> bool:
    """Decide ``phi1 >=_q phi2`` for invertible maps via their inverses.

    True iff ``phi2^{-1}`` is conditionally negative and ``phi2^{-1} - phi1^{-1}``
    is completely positive.
    """
    for phi in (phi1, phi2):
        _require_invertible(phi.matrix)
    inv1 = SuperOp(np.linalg.inv(phi1.matrix), phi1.shape_in, phi1.shape_out)
    inv2 = SuperOp(np.linalg.inv(phi2.matrix), phi2.shape_in, phi2.shape_out)
    if not inv2.is_self_adjoint():
        return False
    if not is_conditionally_negative(inv2).verdict:
        return False
    return is_completely_positive(inv2 - inv1).verdict


def lindblad_form(s: float, Y, terms=()) -> SuperOp:
    """Shorthand for ``CnegForm(s, Y, terms).reconstruct()`` (``Y`` need not be traceless)."""
    return CnegForm(float(s), np.asarray(Y, dtype=complex), tuple(terms)).reconstruct()


__all__ = [
    "CnegForm",
    "CnegVerdict",
    "semigroup",
    "is_conditionally_negative",
    "quadratic_form_witness",
    "extract_canonical_form",
    "inverse_of_unital_cneg",
    "invertible_subordinate_test",
    "lindblad_form",
]
