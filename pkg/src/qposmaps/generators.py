"""Random and named maps for tests, examples and the acceptance suite.

Random q-positive maps come from inverting unital conditionally negative
maps built in canonical form, from rank-one maps ``tr(tau A) C`` and from the
invertible Schur family; all are closed under positive scaling and under
taking resolvent subordinates.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .cneg import CnegForm
from .errors import LambdaSumNonzero
from .qorder import resolvent_subordinate
from .superop import SuperOp, conjugate_by_unitary, from_kraus, functional_map, schur_map

LAMBDA_SUM_TOL = 1e-12


def as_rng(seed=None) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def ginibre(rng, *shape) -> np.ndarray:
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_unitary(n: int, rng=None) -> np.ndarray:
    rng = as_rng(rng)
    if n == 1:
        return np.exp(2j * np.pi * rng.random()).reshape(1, 1)
    return unitary_group.rvs(n, random_state=rng)


def random_density(n: int, rng=None, rank: int | None = None) -> np.ndarray:
    """Random density matrix of the given rank (full rank by default)."""
    rng = as_rng(rng)
    G = ginibre(rng, n, n if rank is None else rank)
    D = G @ G.conj().T
    return D / np.trace(D).real


def random_hermitian(n: int, rng=None, traceless: bool = False) -> np.ndarray:
    rng = as_rng(rng)
    G = ginibre(rng, n, n)
    H = (G + G.conj().T) / 2
    if traceless:
        H = H - np.trace(H) / n * np.eye(n)
    return H


def random_kraus(n: int, m: int, k: int, rng=None) -> list[np.ndarray]:
    rng = as_rng(rng)
    return [ginibre(rng, m, n) / np.sqrt(2 * n * k) for _ in range(k)]


def random_cp_map(n: int, k: int = 2, rng=None, m: int | None = None) -> SuperOp:
    return from_kraus(random_kraus(n, n if m is None else m, k, rng))


def random_lambdas(n: int, rng=None, scale: float = 1.0) -> np.ndarray:
    """Random real vector with zero sum."""
    rng = as_rng(rng)
    lam = rng.normal(scale=scale, size=n)
    return lam - lam.mean()


# ---------------------------------------------------------------------------
# Conditionally negative and q-positive families
# ---------------------------------------------------------------------------


def _trace_orthonormal_traceless(n: int, k: int, rng) -> list[np.ndarray]:
    """``k`` traceless matrices with ``tr(S_i^* S_j) = n delta_ij``."""
    k = min(k, n * n - 1)
    vecs = []
    for _ in range(k):
        S = ginibre(rng, n, n)
        vecs.append((S - np.trace(S) / n * np.eye(n)).reshape(-1))
    Q, _ = np.linalg.qr(np.array(vecs).T)
    return [np.sqrt(n) * Q[:, i].reshape(n, n) for i in range(k)]


def random_unital_cneg_form(n: int, rng=None, n_terms: int = 2, weight: float = 0.5,
                            drift: float = 0.5) -> CnegForm:
    """Canonical data of a random unital conditionally negative map.

    With ``L(A) = sum lambda_i S_i A S_i^*`` the choices
    ``Y = (L(I) + cI)/2 + iH`` (``c = -tr L(I)/n``, ``H`` traceless Hermitian)
    and ``s = 1 + tr L(I)/n`` make ``psi(I) = I`` and ``tr Y = 0``.
    """
    rng = as_rng(rng)
    Ss = _trace_orthonormal_traceless(n, n_terms, rng)
    lams = weight * rng.random(len(Ss)) + 1e-3
    LI = sum((lam * S @ S.conj().T for lam, S in zip(lams, Ss)), np.zeros((n, n), dtype=complex))
    trL = np.trace(LI).real
    H = drift * random_hermitian(n, rng, traceless=True)
    Y = (LI - trL / n * np.eye(n)) / 2 + 1j * H
    order = np.argsort(lams)[::-1]
    return CnegForm(1.0 + trL / n, Y, tuple((float(lams[i]), Ss[i]) for i in order))


def random_unital_cneg(n: int, rng=None, **kw) -> SuperOp:
    return random_unital_cneg_form(n, rng, **kw).reconstruct()


def random_invertible_unital_q_positive(n: int, rng=None, **kw) -> SuperOp:
    psi = random_unital_cneg(n, rng, **kw)
    return SuperOp(np.linalg.inv(psi.matrix), psi.shape_in, psi.shape_out)


def phiu_multipliers(lambdas) -> np.ndarray:
    """``1/(1 + i(lambda_j - lambda_k))``; requires ``sum lambda = 0``."""
    lam = np.asarray(lambdas, dtype=float).reshape(-1)
    if abs(lam.sum()) > LAMBDA_SUM_TOL * max(1.0, np.abs(lam).sum()):
        raise LambdaSumNonzero(f"lambdas sum to {lam.sum():.3e}, not 0")
    return 1.0 / (1.0 + 1j * (lam[:, None] - lam[None, :]))


def phiu_map(lambdas, U=None) -> SuperOp:
    """Invertible unital q-pure Schur map, optionally in the basis given by ``U``.

    With ``U`` the returned ``phi`` satisfies ``phi_U = schur``, that is
    ``phi(A) = U schur(U^* A U) U^*``.
    """
    phi = schur_map(phiu_multipliers(lambdas))
    if U is None:
        return phi
    return conjugate_by_unitary(phi, np.asarray(U).conj().T)


SCHUR_COUNTEREXAMPLE = np.array([[1, (1 + 1j) / 2], [(1 - 1j) / 2, 1]])


def schur_counterexample() -> SuperOp:
    """The 2x2 Schur map that is q-positive yet dominates none of its multiples."""
    return schur_map(SCHUR_COUNTEREXAMPLE)


def random_q_positive(n: int, rng=None, kind: str | None = None) -> tuple[str, SuperOp]:
    """A random q-positive map and the name of the family it was drawn from."""
    rng = as_rng(rng)
    kinds = ("invertible", "rank-one", "schur", "resolvent")
    kind = kinds[int(rng.integers(len(kinds)))] if kind is None else kind
    if kind == "invertible":
        phi = random_invertible_unital_q_positive(n, rng) * float(rng.uniform(0.5, 2.0))
    elif kind == "rank-one":
        tau = random_density(n, rng)
        C = random_density(n, rng) * n
        phi = functional_map(tau, C)
    elif kind == "schur":
        phi = phiu_map(random_lambdas(n, rng), random_unitary(n, rng))
    elif kind == "resolvent":
        _, base = random_q_positive(n, rng, kinds[int(rng.integers(3))])
        phi = resolvent_subordinate(base, float(rng.uniform(0.1, 3.0)))
    else:
        raise ValueError(f"unknown family {kind!r}")
    return kind, phi


def random_dominance_pair(n: int, rng=None, holds: bool | None = None):
    """``(phi, psi, holds, how)`` with a known answer to ``phi >=_q psi``.

    True pairs are ``(phi, phi^(s))``, ``(phi, 0)`` and invertible pairs whose
    inverses differ by a CP map with ``psi^{-1}`` conditionally negative.  False
    pairs already fail at ``t = 0``: ``(phi^(s), phi)`` and ``(phi, c phi)``
    with ``c > 1`` for unital ``phi``.
    """
    rng = as_rng(rng)
    holds = bool(rng.integers(2)) if holds is None else holds
    if holds:
        how = ("resolvent", "zero", "inverse-gap")[int(rng.integers(3))]
        if how == "inverse-gap":
            form = random_unital_cneg_form(n, rng, n_terms=3)
            # psi2^{-1} - psi1^{-1} = extra * id + the dropped dissipative term, a CP map
            extra = float(rng.uniform(0.0, 1.0))
            form2 = CnegForm(form.s + extra, form.Y, form.terms[:-1])
            inv1, inv2 = form.reconstruct(), form2.reconstruct()
            phi = SuperOp(np.linalg.inv(inv1.matrix), inv1.shape_in, inv1.shape_out)
            psi = SuperOp(np.linalg.inv(inv2.matrix), inv2.shape_in, inv2.shape_out)
            return phi, psi, True, how
        _, phi = random_q_positive(n, rng, ("invertible", "schur", "rank-one")[int(rng.integers(3))])
        if how == "zero":
            return phi, phi * 0.0, True, how
        return phi, resolvent_subordinate(phi, float(rng.uniform(0.1, 5.0))), True, how
    how = ("reversed-resolvent", "scaled-up")[int(rng.integers(2))]
    _, phi = random_q_positive(n, rng, ("invertible", "schur")[int(rng.integers(2))])
    if how == "scaled-up":
        return phi, phi * float(rng.uniform(1.2, 3.0)), False, how
    return resolvent_subordinate(phi, float(rng.uniform(0.2, 5.0))), phi, False, how


__all__ = [
    "SCHUR_COUNTEREXAMPLE",
    "as_rng",
    "random_unitary",
    "random_density",
    "random_hermitian",
    "random_kraus",
    "random_cp_map",
    "random_lambdas",
    "random_unital_cneg_form",
    "random_unital_cneg",
    "random_invertible_unital_q_positive",
    "phiu_multipliers",
    "phiu_map",
    "schur_counterexample",
    "random_q_positive",
    "random_dominance_pair",
]
