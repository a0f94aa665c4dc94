"""Corners between CP maps.

A corner from ``phi`` (on ``M_n``) to ``psi`` (on ``M_k``) is a map ``gamma``
on ``n x k`` matrices for which

    [[A, B], [C, D]] -> [[phi(A), gamma(B)], [gamma*(C), psi(D)]]

is completely positive; it is a q-corner when that block map is q-positive.
A q-corner is hypermaximal when no strictly smaller q-positive block map
keeps the same corner.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import ContractionViolated, DiagonalsNotQPure, NotDensity, NotQCorner, NotUnitary
from .generators import as_rng, ginibre, phiu_map
from .jsonio import encode_matrix
from .qorder import PositivityCert, is_q_positive, q_dominates, resolvent_subordinate
from .qpure import InvertibleSchur, RankOneFaithful, classify_q_pure
from .superop import (
    CP_TOL,
    KrausSet,
    SuperOp,
    block_corner_map,
    from_kraus,
    is_completely_positive,
    is_unitary,
    right_multiply,
    zero,
)

CONTRACTION_TOL = 1e-10
DEFAULT_TS = (0.0, 0.25, 0.5, 1.0, 2.0, 4.0, np.inf)
DENSITY_TOL = 1e-10


@dataclass(frozen=True)
class CornerSpec:
    """Kraus data ``S_i`` (left), ``T_j`` (right) and a contraction ``C``."""

    left_kraus: KrausSet
    right_kraus: KrausSet
    C: np.ndarray

    def __post_init__(self):
        C = np.asarray(self.C, dtype=complex)
        if C.shape != (len(self.left_kraus), len(self.right_kraus)):
            raise ValueError(
                f"C has shape {C.shape}, expected {(len(self.left_kraus), len(self.right_kraus))}"
            )
        norm = np.linalg.norm(C, 2) if C.size else 0.0
        if norm > 1 + CONTRACTION_TOL:
            raise ContractionViolated(f"||C|| = {norm:.12g} exceeds 1")
        object.__setattr__(self, "C", C)

    @property
    def phi(self) -> SuperOp:
        return from_kraus(self.left_kraus)

    @property
    def psi(self) -> SuperOp:
        return from_kraus(self.right_kraus)

    def to_json(self) -> dict:
        return {
            "left_kraus": [encode_matrix(S) for S in self.left_kraus],
            "right_kraus": [encode_matrix(T) for T in self.right_kraus],
            "C": encode_matrix(self.C),
        }


@dataclass(frozen=True)
class HyperMaxVerdict:
    hypermaximal: bool
    violating_pair: tuple | None = None
    cert: PositivityCert | None = None
    checked: tuple = field(default_factory=tuple)

    def to_json(self) -> dict:
        pair = None
        if self.violating_pair is not None:
            pair = [None if np.isinf(x) else float(x) for x in self.violating_pair]
        return {
            "hypermaximal": bool(self.hypermaximal),
            "violating_pair": pair,
            "witness_cert": None if self.cert is None else self.cert.to_json(),
            "pairs_checked": len(self.checked),
        }


@dataclass(frozen=True)
class CornerNormResult:
    """Largest ``||gamma||`` over corners between two rank-one state maps."""

    value: float
    C: np.ndarray
    A: np.ndarray
    faithful: bool
    restart_values: tuple = ()

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "faithful": self.faithful,
            "C": encode_matrix(self.C),
            "A": encode_matrix(self.A),
            "restart_values": list(self.restart_values),
        }


# ---------------------------------------------------------------------------
# Corners
# ---------------------------------------------------------------------------


def corner_map(left_ops, right_ops, C) -> SuperOp:
    """``A -> sum_ij c_ij S_i A T_j^*`` for any coefficient matrix ``C``."""
    left = [np.asarray(S, dtype=complex) for S in left_ops]
    right = [np.asarray(T, dtype=complex) for T in right_ops]
    C = np.asarray(C, dtype=complex)
    n, k = left[0].shape[0], right[0].shape[0]
    M = np.zeros((n * k, n * k), dtype=complex)
    for (i, S), (j, T) in product(enumerate(left), enumerate(right)):
        if C[i, j] != 0:
            M += C[i, j] * np.kron(S, T.conj())
    return SuperOp(M, (n, k), (n, k))


def corner_from_contraction(spec: CornerSpec) -> SuperOp:
    """``gamma(A) = sum_ij c_ij S_i A T_j^*`` on ``n x k`` matrices."""
    return corner_map(spec.left_kraus.ops, spec.right_kraus.ops, spec.C)


def random_corner_data(n: int, k: int, n_left: int = 2, n_right: int = 2, norm: float = 0.9, rng=None):
    """Random Kraus lists and a coefficient matrix ``C`` with ``||C|| = norm``."""
    rng = as_rng(rng)
    left = [ginibre(rng, n, n) / np.sqrt(2 * n * n_left) for _ in range(n_left)]
    right = [ginibre(rng, k, k) / np.sqrt(2 * k * n_right) for _ in range(n_right)]
    C = ginibre(rng, n_left, n_right)
    return left, right, C * (norm / np.linalg.norm(C, 2))


def random_corner_spec(n: int, k: int, n_left: int = 2, n_right: int = 2, norm: float = 0.9,
                       rng=None) -> CornerSpec:
    left, right, C = random_corner_data(n, k, n_left, n_right, norm, rng)
    return CornerSpec(KrausSet(tuple(left)), KrausSet(tuple(right)), C)


def verify_corner(phi: SuperOp, gamma: SuperOp, psi: SuperOp, tol: float = CP_TOL) -> bool:
    """Whether the assembled block map is completely positive."""
    return bool(is_completely_positive(block_corner_map(phi, gamma, psi), tol).verdict)


def is_q_corner(phi: SuperOp, gamma: SuperOp, psi: SuperOp, grid=None, tol: float = CP_TOL) -> PositivityCert:
    """q-positivity certificate of the assembled block map."""
    return is_q_positive(block_corner_map(phi, gamma, psi), grid, tol)


def unitary_conjugation_corner(phi: SuperOp, U) -> SuperOp:
    """``gamma(A) = phi(A U^*) U``, a corner from ``phi`` to ``phi_U``."""
    U = np.asarray(U, dtype=complex)
    if not is_unitary(U):
        raise NotUnitary("U is not unitary")
    n = phi.dim_in
    M = right_multiply(U, n).matrix @ phi.matrix @ right_multiply(U.conj().T, n).matrix
    return SuperOp(M, (n, n), (n, n))


def flow_corner_to_identity(lambdas) -> SuperOp:
    """Diagonal corner ``b_j -> b_j/(1 + i lambda_j)`` on column vectors.

    It joins the invertible q-pure Schur map of ``lambdas`` to the identity
    on ``M_1``; the block map is the Schur map of ``(lambdas, 0)``.
    """
    lam = np.asarray(lambdas, dtype=float).reshape(-1)
    phiu_map(lam)  # validates the zero-sum condition
    return SuperOp(np.diag(1.0 / (1.0 + 1j * lam)), (lam.size, 1), (lam.size, 1))


def _resolvent_or_zero(phi: SuperOp, t: float) -> SuperOp:
    return zero(phi.dim_in) if np.isinf(t) else resolvent_subordinate(phi, t)


def is_hypermaximal_over_resolvent_family(
    phi: SuperOp,
    gamma: SuperOp,
    psi: SuperOp,
    ts_grid=DEFAULT_TS,
    grid=None,
    tol: float = CP_TOL,
) -> HyperMaxVerdict:
    """Search the resolvent families of the diagonals for a smaller q-positive block map.

    Every ``(t, s) != (0, 0)`` from ``ts_grid`` (``inf`` meaning the zero map)
    gives a candidate with diagonal ``(phi^(t), psi^(s))`` and corner
    ``gamma``; the corner is hypermaximal when no candidate is both q-positive
    and q-dominated by the original block map.  This search is exhaustive only
    for q-pure diagonals, so other inputs are refused.
    """
    for side, m in (("left", phi), ("right", psi)):
        v = classify_q_pure(m)
        if not isinstance(v, (RankOneFaithful, InvertibleSchur)):
            raise DiagonalsNotQPure(f"{side} diagonal is not q-pure: {type(v).__name__}")
    upsilon = block_corner_map(phi, gamma, psi)
    base = is_q_positive(upsilon, grid, tol)
    if not base.verdict:
        raise NotQCorner("gamma is not a q-corner", base)
    checked = []
    for t, s in product(ts_grid, ts_grid):
        if t == 0 and s == 0:
            continue
        cand = block_corner_map(_resolvent_or_zero(phi, t), gamma, _resolvent_or_zero(psi, s))
        checked.append((t, s))
        cert = is_q_positive(cand, grid, tol)
        if not cert.verdict:
            continue
        dom = q_dominates(upsilon, cand, grid, tol)
        if dom.verdict:
            return HyperMaxVerdict(False, (t, s), cert, tuple(checked))
    return HyperMaxVerdict(True, None, None, tuple(checked))


# ---------------------------------------------------------------------------
# Corner norms between rank-one maps
# ---------------------------------------------------------------------------


def _check_density(D) -> np.ndarray:
    D = np.asarray(D, dtype=complex)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise NotDensity("density matrix must be square")
    if np.abs(D - D.conj().T).max() > DENSITY_TOL:
        raise NotDensity("density matrix is not Hermitian")
    w = np.linalg.eigvalsh((D + D.conj().T) / 2)
    if w[0] < -DENSITY_TOL or abs(w.sum() - 1) > 1e-8:
        raise NotDensity("density matrix must be positive with unit trace")
    return np.clip(w, 0.0, None)


def _polar(X: np.ndarray) -> np.ndarray:
    """Unitary (partial isometry) factor ``U V^*`` of ``X = U S V^*``."""
    U, _, Vh = np.linalg.svd(X, full_matrices=False)
    return U @ Vh


def max_corner_norm_rank_one(D1, D2, restarts: int = 20, max_iter: int = 500, stop: float = 1e-10,
                             rng=0) -> CornerNormResult:
    """``max ||D_mu A D_lambda||_tr`` over contractions ``A`` (``k x n``).

    ``D_lambda``, ``D_mu`` are diagonal with the square roots of the
    eigenvalues of ``D1`` (size ``n``) and ``D2`` (size ``k``), ascending.
    This is the largest norm a corner between ``tr(D1 .) I_n`` and
    ``tr(D2 .) I_k`` can have.  Alternating maximization: ``C`` is the polar
    factor of ``(D_mu A D_lambda)^*``, then ``A`` the polar factor of
    ``(D_lambda C D_mu)^*``.  One restart starts from the pairing of largest
    with largest eigenvalue; the rest are random.
    """
    a = np.sqrt(_check_density(D1))
    b = np.sqrt(_check_density(D2))
    faithful = bool(a.min() > 0 and b.min() > 0)
    n, k = a.size, b.size
    Dl, Dm = np.diag(a), np.diag(b)
    rng = as_rng(rng)

    starts = []
    A0 = np.zeros((k, n), dtype=complex)
    for i in range(min(n, k)):
        A0[k - 1 - i, n - 1 - i] = 1.0
    starts.append(A0)
    for _ in range(max(restarts - 1, 0)):
        starts.append(_polar(ginibre(rng, k, n)))

    best = (-1.0, None, None)
    values = []
    for A in starts:
        val = -np.inf
        C = _polar((Dm @ A @ Dl).conj().T)
        for _ in range(max_iter):
            C = _polar((Dm @ A @ Dl).conj().T)
            A = _polar((Dl @ C @ Dm).conj().T)
            new = float(np.linalg.svd(Dm @ A @ Dl, compute_uv=False).sum())
            if new - val < stop:
                val = max(val, new)
                break
            val = new
        values.append(val)
        if val > best[0]:
            best = (val, C, A)
    return CornerNormResult(best[0], best[1], best[2], faithful, tuple(values))


__all__ = [
    "CornerSpec",
    "HyperMaxVerdict",
    "CornerNormResult",
    "corner_from_contraction",
    "random_corner_data",
    "random_corner_spec",
    "verify_corner",
    "is_q_corner",
    "unitary_conjugation_corner",
    "flow_corner_to_identity",
    "is_hypermaximal_over_resolvent_family",
    "max_corner_norm_rank_one",
    "corner_map",
]
