"""Classification of unital q-pure maps.

A unital q-positive map is q-pure when its only q-subordinates are ``0`` and
its resolvent family.  Two families are classified: rank-one maps
``A -> tr(DA) I`` (q-pure iff ``D`` is faithful) and invertible maps, which
are q-pure iff, after a unitary change of basis, they are the Schur map with
multipliers ``1/(1 + i(lambda_j - lambda_k))``.  Non-q-pure inputs come with
an explicit subordinate outside the resolvent family.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .cneg import CnegForm, extract_canonical_form
from .errors import (
    NotQPositive,
    NotRankOne,
    NotUnital,
    ResidualNotCP,
    Singular,
)
from .generators import phiu_map
from .jsonio import encode_matrix, map_to_json
from .qorder import PositivityCert, is_q_positive, q_dominates, resolvent_subordinate
from .superop import SuperOp, state_map

RANK_TOL = 1e-9
FAITHFUL_TOL = 1e-10
SCHUR_TOL = 1e-8
COND_MAX = 1e12
FAMILY_GAP = 1e-6


@dataclass(frozen=True)
class RankOneFaithful:
    D: np.ndarray

    def to_json(self) -> dict:
        return {"kind": "RankOneFaithful", "D": encode_matrix(self.D)}


@dataclass(frozen=True)
class InvertibleSchur:
    U: np.ndarray
    lambdas: np.ndarray

    def to_json(self) -> dict:
        return {
            "kind": "InvertibleSchur",
            "U": encode_matrix(self.U),
            "lambdas": [float(x) for x in self.lambdas],
        }


@dataclass(frozen=True)
class NotQPure:
    """``witness`` is q-dominated by the input yet lies off its resolvent family."""

    witness: SuperOp
    reason: str
    cert: PositivityCert | None = None
    distance: float | None = None
    s_star: float | None = None

    def to_json(self) -> dict:
        out = {"kind": "NotQPure", "reason": self.reason, "witness": map_to_json(self.witness)}
        if self.cert is not None:
            out["dominance"] = self.cert.to_json()
        if self.distance is not None:
            out["distance_to_resolvent_family"] = self.distance
            out["best_fit_s"] = None if not np.isfinite(self.s_star) else self.s_star
        return out


@dataclass(frozen=True)
class Indeterminate:
    reason: str

    def to_json(self) -> dict:
        return {"kind": "Indeterminate", "reason": self.reason}


# ---------------------------------------------------------------------------


def numerical_rank(phi: SuperOp, tol: float = RANK_TOL) -> int:
    sv = phi.singular_values()
    if sv[0] == 0:
        return 0
    return int(np.sum(sv > tol * sv[0]))


def distance_to_resolvent_family(phi: SuperOp, psi: SuperOp, samples: int = 64) -> tuple[float, float]:
    """``(s*, d)`` minimizing ``||psi - phi^(s)||`` over ``s in [0, inf]``.

    The family is parametrized by ``u = 1/(1+s) in [0, 1]`` so that ``u = 0``
    is the zero map.  A coarse scan seeds a bounded scalar minimization.
    """
    def dist(u):
        if u <= 0:
            return float(np.linalg.norm(psi.matrix, 2))
        try:
            return psi.distance(resolvent_subordinate(phi, 1.0 / u - 1.0))
        except Singular:
            return np.inf

    us = np.linspace(0.0, 1.0, samples + 1)
    ds = np.array([dist(u) for u in us])
    i = int(np.argmin(ds))
    lo, hi = us[max(i - 1, 0)], us[min(i + 1, samples)]
    best_u, best_d = us[i], ds[i]
    if hi > lo:
        res = minimize_scalar(dist, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        if res.fun < best_d:
            best_u, best_d = float(res.x), float(res.fun)
    s_star = np.inf if best_u <= 0 else 1.0 / best_u - 1.0
    return float(s_star), float(best_d)


def _not_q_pure(phi, witness, reason):
    cert = q_dominates(phi, witness)
    s_star, d = distance_to_resolvent_family(phi, witness)
    return NotQPure(witness, reason, cert, d, s_star)


def is_rank_one_q_pure(phi: SuperOp, tol: float = FAITHFUL_TOL):
    """Rank-one unital maps are ``A -> tr(DA) I``; q-pure iff ``D`` is faithful.

    A non-faithful ``D`` yields the witness ``A -> tr(DA) P`` with ``P`` the
    range projection of ``D``.
    """
    if numerical_rank(phi) != 1:
        raise NotRankOne("map does not have rank one")
    if not phi.is_unital():
        raise NotUnital("map is not unital")
    n = phi.dim_in
    # phi(A)_00 = tr(D A) = vec(D.T) . vec(A)
    D = phi.matrix[0].reshape(n, n).T
    if not np.allclose(phi.matrix, state_map(D).matrix, atol=1e-10):
        raise NotUnital("rank-one map is not of the form tr(DA) I")
    w, V = np.linalg.eigh((D + D.conj().T) / 2)
    if np.abs(D - D.conj().T).max() > 1e-10 or w[0] < -tol:
        raise NotQPositive("tr(DA) I with D not positive is not completely positive", None)
    if w[0] > tol:
        return RankOneFaithful(D)
    support = V[:, w > tol]
    P = support @ support.conj().T
    witness = SuperOp.square(np.outer(P.reshape(-1), D.T.reshape(-1)), n)
    return _not_q_pure(phi, witness, "state is not faithful; compressing to its support")


def make_invertible_qpure(lambdas, U=None) -> SuperOp:
    """Schur map with multipliers ``1/(1 + i(lambda_j - lambda_k))``.

    With ``U`` the map is ``A -> U schur(U^* A U) U^*``, so that conjugating
    it by ``U`` recovers the Schur form.
    """
    return phiu_map(lambdas, U)


def _phase_fix_columns(U: np.ndarray) -> np.ndarray:
    U = U.copy()
    for j in range(U.shape[1]):
        k = int(np.argmax(np.abs(U[:, j])))
        z = U[k, j]
        U[:, j] *= abs(z) / z
    return U


def is_invertible_unital_q_pure(phi: SuperOp, tol: float = SCHUR_TOL):
    """Decide q-purity of an invertible unital map through its inverse.

    The inverse has canonical form ``sA + YA + AY^* - sum lambda_i S_i A S_i^*``;
    the map is q-pure iff there are no dissipative terms, in which case
    ``s = 1`` and ``Y = iU diag(lambda) U^*``.  Otherwise the inverse of
    ``sA + YA + AY^*`` is a q-subordinate outside the resolvent family.
    """
    if not phi.is_unital():
        raise NotUnital("map is not unital")
    if np.linalg.cond(phi.matrix) >= COND_MAX:
        raise Singular("map is not invertible")
    psi = SuperOp(np.linalg.inv(phi.matrix), phi.shape_in, phi.shape_out)
    try:
        form = extract_canonical_form(psi)
    except ResidualNotCP as exc:
        raise NotQPositive("inverse is not conditionally negative", None) from exc
    n = phi.dim_in
    Y = form.Y
    dissipative = [lam for lam, _ in form.terms if lam > tol]
    if not dissipative and abs(form.s - 1) <= tol and np.abs(Y + Y.conj().T).max() <= tol:
        H = -1j * Y
        lam, U = np.linalg.eigh((H + H.conj().T) / 2)
        return InvertibleSchur(_phase_fix_columns(U), lam)
    core = CnegForm(form.s, Y).reconstruct()
    witness = SuperOp(np.linalg.inv(core.matrix), (n, n), (n, n))
    return _not_q_pure(phi, witness, "inverse has dissipative terms; dropping them")


def classify_q_pure(phi: SuperOp, grid=None):
    """Dispatch on numerical rank: rank one, invertible, or Indeterminate."""
    if not phi.is_square_map:
        raise NotUnital("map must act on M_n")
    if not phi.is_unital():
        raise NotUnital("map is not unital")
    cert = is_q_positive(phi, grid)
    if not cert.verdict:
        raise NotQPositive("map is not q-positive", cert)
    r = numerical_rank(phi)
    if r == 1:
        return is_rank_one_q_pure(phi)
    if r == phi.matrix.shape[0]:
        return is_invertible_unital_q_pure(phi)
    return Indeterminate(f"intermediate rank {r}: outside the classified rank-one and invertible families")


__all__ = [
    "RankOneFaithful",
    "InvertibleSchur",
    "NotQPure",
    "Indeterminate",
    "numerical_rank",
    "distance_to_resolvent_family",
    "is_rank_one_q_pure",
    "make_invertible_qpure",
    "is_invertible_unital_q_pure",
    "classify_q_pure",
]
