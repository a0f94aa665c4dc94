"""The q-positive order.

A square map ``phi`` is q-positive when it has no negative eigenvalues and
every resolvent subordinate ``phi(I + t phi)^{-1}`` is completely positive;
``phi >=_q psi`` when every difference of resolvents is completely positive.
Both quantifiers range over all ``t >= 0``; here they are sampled on a finite
grid unless an exact closed form applies.

Certificates store *scale-normalized* minimum Choi eigenvalues: the value at
``t`` is multiplied by ``(1 + t)`` for q-positivity and ``(1 + t)**2`` for
dominance.  Resolvents decay like ``1/(1 + t)``, so the raw eigenvalues would
vanish at large ``t`` and hide sign information below round-off; the positive
factor leaves every verdict unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import _backend
from .errors import (
    DimensionMismatch,
    Diverges,
    NoConvergence,
    SingularResolvent,
)
from .superop import CP_TOL, SuperOp, choi, identity, schur_multipliers

RESOLVENT_SV_TOL = 1e-12
NEG_EIG_TOL = 1e-9
RANK_TOL = 1e-9
LIMIT_PROBES = (1e6, 1e7, 1e8)
LIMIT_TOL = 1e-6
DIVERGENCE_RATIO = 1.5
FIXED_POINT_TOL = 1e-8
K_MAX = 10_000


def default_grid() -> np.ndarray:
    """``{0}`` together with 121 log-spaced points in ``[1e-3, 1e6]``."""
    return np.concatenate([[0.0], np.logspace(-3, 6, 121)])


def _as_grid(grid) -> np.ndarray:
    g = default_grid() if grid is None else np.asarray(grid, dtype=float).reshape(-1)
    if g.size == 0 or np.any(g < 0) or np.any(np.diff(g) <= 0):
        raise ValueError("grid must be a nonempty increasing sequence of t >= 0")
    return g


def _none_if_nan(x):
    return None if not np.isfinite(x) else float(x)


@dataclass(frozen=True)
class PositivityCert:
    """Grid-indexed record of minimum (scale-normalized) Choi eigenvalues.

    ``method`` is ``"grid-certified"`` for sampled checks, in which case the
    verdict is a heuristic over the stored grid, or ``"rank-one-exact"`` /
    ``"schur-exact"`` when a closed form settles every ``t >= 0``.
    ``min_eigs`` entries are ``nan`` where the resolvent is singular.
    """

    grid: np.ndarray
    min_eigs: np.ndarray
    verdict: bool
    failures: tuple
    method: str = "grid-certified"
    scaling: str = "(1+t)"
    tol: float = CP_TOL
    notes: tuple = field(default_factory=tuple)
    choi_norms: np.ndarray | None = None

    @property
    def grid_certified(self) -> bool:
        return self.method == "grid-certified"

    @property
    def worst(self) -> tuple[float, float]:
        """``(t, min_eig)`` at the most negative grid point (nan counts as worst)."""
        vals = np.where(np.isnan(self.min_eigs), -np.inf, self.min_eigs)
        i = int(np.argmin(vals))
        return float(self.grid[i]), float(self.min_eigs[i])

    def to_json(self) -> dict:
        return {
            "grid": [float(t) for t in self.grid],
            "min_eigs": [_none_if_nan(x) for x in self.min_eigs],
            "verdict": bool(self.verdict),
            "failures": [float(t) for t in self.failures],
            "method": self.method,
            "scaling": f"min_eigs multiplied by {self.scaling}",
            "tol": self.tol,
            "notes": list(self.notes),
            "threshold": "min_eig >= -tol * max(1, ||Choi||) at each grid point",
        }


def _make_cert(grid, min_eigs, norms, tol, method, scaling, notes=(), force_false=False):
    """Fail a grid point when its min eigenvalue is below ``-tol * max(1, ||Choi||)``."""
    min_eigs = np.asarray(min_eigs, dtype=float)
    threshold = tol * np.maximum(1.0, np.nan_to_num(np.asarray(norms, dtype=float)))
    bad = np.isnan(min_eigs) | (min_eigs < -threshold)
    failures = tuple(float(t) for t in grid[bad])
    verdict = not force_false and not failures
    return PositivityCert(grid, min_eigs, verdict, failures, method, scaling, tol, tuple(notes),
                          np.asarray(norms, dtype=float))


def _require_square_map(phi: SuperOp):
    if not phi.is_square_map:
        raise DimensionMismatch("the q-order is defined for maps M_n -> M_n")


# ---------------------------------------------------------------------------
# Resolvents
# ---------------------------------------------------------------------------


def resolvent_subordinate(phi: SuperOp, s: float) -> SuperOp:
    """``phi (I + s phi)^{-1}``."""
    _require_square_map(phi)
    if s < 0:
        raise ValueError("s must be nonnegative")
    M = phi.matrix
    A = np.eye(M.shape[0]) + s * M
    if np.linalg.svd(A, compute_uv=False)[-1] <= RESOLVENT_SV_TOL:
        raise SingularResolvent(f"I + s*phi is singular at s={s}", s)
    # M and (I + sM)^{-1} commute
    return SuperOp(np.linalg.solve(A, M), phi.shape_in, phi.shape_out)


def has_negative_eigenvalue(phi: SuperOp, tol: float = NEG_EIG_TOL) -> bool:
    """True when some eigenvalue ``z`` has ``|Im z| <= tol (1 + |z|)`` and ``Re z < -tol``."""
    _require_square_map(phi)
    z = phi.eigenvalues()
    return bool(np.any((np.abs(z.imag) <= tol * (1 + np.abs(z))) & (z.real < -tol)))


def eps_deform(phi: SuperOp, eps: float) -> SuperOp:
    """``eps I + (1 - eps) phi``."""
    _require_square_map(phi)
    if not 0 <= eps <= 1:
        raise ValueError("eps must lie in [0, 1]")
    return identity(phi.dim_in) * eps + phi * (1 - eps)


# ---------------------------------------------------------------------------
# Exact fast paths
# ---------------------------------------------------------------------------


def _rank_one_factors(phi: SuperOp):
    """``(c, r)`` with ``phi.matrix = outer(c, r)``, or None if rank is not one."""
    U, sv, Vh = np.linalg.svd(phi.matrix)
    if sv[0] == 0 or (len(sv) > 1 and sv[1] > RANK_TOL * sv[0]):
        return None
    return U[:, 0] * sv[0], Vh[0]


def _rank_one_cert(phi, grid, tol):
    """Rank-one ``phi`` satisfies ``phi^2 = kappa phi``, so ``phi^(t) = phi/(1 + t kappa)``."""
    factors = _rank_one_factors(phi)
    if factors is None:
        return None
    c, r = factors
    kappa = complex(r @ c)
    if abs(kappa.imag) > NEG_EIG_TOL * (1 + abs(kappa)) or kappa.real < -NEG_EIG_TOL:
        return None  # complex or negative eigenvalue; let the general path report it
    kappa = max(kappa.real, 0.0)
    if not phi.is_self_adjoint():
        return None
    eigs = choi(phi).eigenvalues()
    lam = float(eigs[0])
    # (1 + t)/(1 + t kappa) > 0 for all t, so the sign is that of lam for every t
    min_eigs = lam * (1 + grid) / (1 + grid * kappa)
    verdict = lam >= -tol * max(1.0, float(np.abs(eigs).max()))
    return PositivityCert(
        grid, min_eigs, verdict, () if verdict else tuple(float(t) for t in grid),
        "rank-one-exact", "(1+t)", tol,
        (f"phi^2 = kappa phi with kappa = {kappa:.12g}",),
    )


def _cauchy_parameters(m: np.ndarray, tol: float = 1e-10):
    """``a`` with ``1/m_jk = a_j + conj(a_k)`` and ``Re a > 0``, or None.

    Such multiplier matrices are Cauchy kernels ``int_0^inf e^{-x a_j} e^{-x conj(a_k)} dx``,
    hence positive semidefinite, and stay Cauchy under ``1/m -> 1/m + t``.
    """
    if np.any(m == 0):
        return None
    inv = 1.0 / m
    re = np.diag(inv).real / 2
    if np.any(re <= 0) or np.any(np.abs(np.diag(inv).imag) > tol * (1 + np.abs(np.diag(inv)))):
        return None
    im = (inv[:, 0] - re - re[0]).imag
    a = re + 1j * (im + 0.0)
    recon = a[:, None] + a.conj()[None, :]
    if np.max(np.abs(recon - inv)) > tol * max(1.0, np.max(np.abs(inv))):
        return None
    return a


def _schur_cert(phi, grid, tol):
    m = schur_multipliers(phi)
    if m is None or m.shape[0] != m.shape[1]:
        return None
    if np.max(np.abs(m - m.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(m))):
        return None
    # entrywise resolvent m/(1 + t m); the Choi matrix is PSD iff this matrix is
    min_eigs = np.empty(len(grid))
    norms = np.empty(len(grid))
    for i, t in enumerate(grid):
        den = 1 + t * m
        if np.any(np.abs(den) <= 1e-13 * max(1.0, np.abs(den).max())):
            min_eigs[i] = norms[i] = np.nan
            continue
        r = (1 + t) * m / den
        w = np.linalg.eigvalsh((r + r.conj().T) / 2)
        min_eigs[i], norms[i] = w[0], np.abs(w).max()
    a = _cauchy_parameters(m)
    if a is not None:
        notes = ("multipliers form a Cauchy kernel 1/(a_j + conj(a_k)) with Re a > 0",)
        return PositivityCert(grid, min_eigs, True, (), "schur-exact", "(1+t)", tol, notes)
    neg = bool(np.any((np.abs(m.imag) <= NEG_EIG_TOL * (1 + np.abs(m))) & (m.real < -NEG_EIG_TOL)))
    notes = ("schur multipliers checked on the grid",) + (("negative eigenvalue",) if neg else ())
    return _make_cert(grid, min_eigs, norms, tol, "grid-certified", "(1+t)", notes, neg)


# ---------------------------------------------------------------------------
# Certification
# ---------------------------------------------------------------------------


def is_q_positive(phi: SuperOp, grid=None, tol: float = CP_TOL) -> PositivityCert:
    """Certify that ``phi(I + t phi)^{-1}`` is CP on ``grid`` and ``phi`` has no negative eigenvalue.

    Rank-one and Cauchy-Schur maps are decided exactly.  Singular grid points
    are recorded as failures with ``nan`` eigenvalues.
    """
    _require_square_map(phi)
    g = _as_grid(grid)
    for fast in (_rank_one_cert, _schur_cert):
        cert = fast(phi, g, tol)
        if cert is not None:
            return cert
    n = phi.dim_in
    notes = []
    if not phi.is_self_adjoint():
        # resolvents of a map that is not self-adjoint cannot be CP
        notes.append("not self-adjoint")
        sym = (phi + phi.star()) * 0.5
        min_eigs, norms = _backend.kernels.resolvent_min_eigs(sym.matrix, n, g, 1.0)
        return _make_cert(g, min_eigs, norms, tol, "grid-certified", "(1+t)", notes, True)
    neg = has_negative_eigenvalue(phi)
    if neg:
        notes.append("negative eigenvalue")
    min_eigs, norms = _backend.kernels.resolvent_min_eigs(phi.matrix, n, g, 1.0)
    return _make_cert(g, min_eigs, norms, tol, "grid-certified", "(1+t)", notes, neg)


def q_dominates(phi: SuperOp, psi: SuperOp, grid=None, tol: float = CP_TOL) -> PositivityCert:
    """Certify ``phi >=_q psi``: ``phi^(t) - psi^(t)`` is CP at every grid ``t``.

    The difference is formed as ``(I + t psi)^{-1} (phi - psi) (I + t phi)^{-1}``,
    which avoids cancellation between two nearly equal resolvents.
    """
    _require_square_map(phi)
    _require_square_map(psi)
    if phi.shape_in != psi.shape_in:
        raise DimensionMismatch("q_dominates needs maps on the same matrix algebra")
    g = _as_grid(grid)
    n = phi.dim_in
    notes = []
    force = False
    P, Q = phi, psi
    if not (phi.is_self_adjoint() and psi.is_self_adjoint()):
        notes.append("not self-adjoint")
        force = True
        P, Q = (phi + phi.star()) * 0.5, (psi + psi.star()) * 0.5
    min_eigs, norms = _backend.kernels.dominance_min_eigs(P.matrix, Q.matrix, n, g, 2.0)
    bad = np.isnan(min_eigs)
    if bad.any():
        t = float(g[bad][0])
        raise SingularResolvent(f"resolvent singular at t={t}", t)
    return _make_cert(g, min_eigs, norms, tol, "grid-certified", "(1+t)^2", notes, force)


# ---------------------------------------------------------------------------
# Limit map and its fixed point
# ---------------------------------------------------------------------------


def _scaled_resolvent(M: np.ndarray, t: float) -> np.ndarray:
    # t M (I + tM)^{-1} = (I/t + M)^{-1} M
    A = np.eye(M.shape[0]) / t + M
    try:
        lu = sla.lu_factor(A, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:  # pragma: no cover
        raise SingularResolvent(str(exc), t) from exc
    d = np.abs(np.diag(lu[0]))
    if d.min() <= 1e-15 * max(d.max(), 1.0):
        raise SingularResolvent(f"I + t*phi is singular at t={t}", t)
    return sla.lu_solve(lu, M, check_finite=False)


def limit_map(phi: SuperOp) -> SuperOp:
    """Norm limit of ``t phi (I + t phi)^{-1}`` as ``t -> inf``.

    Evaluated at ``t = 1e6, 1e7, 1e8``; the ``O(1/t)`` error is removed by
    Richardson extrapolation and the two extrapolants must agree to ``1e-6``.
    Growth by more than a factor 1.5 between probes means the family is
    unbounded (a Jordan block at eigenvalue zero).
    """
    _require_square_map(phi)
    Ls = [_scaled_resolvent(phi.matrix, t) for t in LIMIT_PROBES]
    norms = [np.linalg.norm(L, 2) for L in Ls]
    for a, b in zip(norms, norms[1:]):
        if a > 0 and b / a > DIVERGENCE_RATIO:
            raise Diverges(f"t phi (I + t phi)^-1 grows: norms {norms}")
        if a == 0 and b > LIMIT_TOL:
            raise Diverges(f"t phi (I + t phi)^-1 grows: norms {norms}")
    ratio = LIMIT_PROBES[1] / LIMIT_PROBES[0]
    R1 = (ratio * Ls[1] - Ls[0]) / (ratio - 1)
    R2 = (ratio * Ls[2] - Ls[1]) / (ratio - 1)
    if np.linalg.norm(R2 - R1, 2) >= LIMIT_TOL:
        raise NoConvergence("limit map extrapolants disagree")
    return SuperOp(R2, phi.shape_in, phi.shape_out)


def fixed_point_of_limit(phi: SuperOp, k_max: int = K_MAX) -> np.ndarray:
    """``T = lim_k L^k(I)`` for the limit map ``L``; positive with norm one."""
    L = limit_map(phi)
    n = phi.dim_in
    X = np.eye(n, dtype=complex)
    for _ in range(k_max):
        Y = L.apply(X)
        if np.linalg.norm(Y - X, 2) <= 1e-13:
            X = Y
            break
        X = Y
    T = (X + X.conj().T) / 2
    if np.linalg.norm(L.apply(T) - T, 2) > FIXED_POINT_TOL:
        raise NoConvergence(f"L^k(I) did not converge within {k_max} iterations")
    if abs(np.linalg.norm(T, 2) - 1) > FIXED_POINT_TOL or np.linalg.eigvalsh(T)[0] < -FIXED_POINT_TOL:
        raise NoConvergence("L^k(I) converged to an element that is not a positive norm-one fixed point")
    return T


__all__ = [
    "PositivityCert",
    "default_grid",
    "resolvent_subordinate",
    "has_negative_eigenvalue",
    "is_q_positive",
    "q_dominates",
    "limit_map",
    "fixed_point_of_limit",
    "eps_deform",
]
