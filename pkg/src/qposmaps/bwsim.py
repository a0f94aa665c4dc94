"""Boundary weight doubles ``(phi, nu)`` in finite numerics.

The boundary weight is ``nu(sqrt(I - Lambda(1)) B sqrt(I - Lambda(1))) = (f, B f)``
for a profile ``f`` in ``L^2(0, inf)``.  Writing ``h(x) = f(x)/sqrt(1 - e^{-x})``,
its truncations give

    nu_t(I)          = int_t^inf |f|^2 / (1 - e^{-x}) dx
    s_t = nu_t(Lambda(1)) = int_t^inf e^{-x} |f|^2 / (1 - e^{-x}) dx

and the generalized boundary representation is
``pi_t^#(A) = phi(I + s_t phi)^{-1} Omega_{nu_t}(A)`` with
``Omega_{nu_t}(A)_ij = nu_t(A_ij)``.  Operands are finite sums of dyads
``M (x) |u><v|``, for which ``nu_t(|u><v|) = (h_t, u)(v, h_t)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .errors import (
    ContractionViolated,
    NotNormalized,
    NotUnital,
    QuadratureFailure,
    SupportViolation,
)
from .qorder import resolvent_subordinate
from .superop import SuperOp

QUAD_TOL = 1e-12
NORM_TOL = 1e-8
BOUND_TOL = 1e-10
CONTRACTION_SLACK = 1e-8
DEGENERATE_T = 1.0


def _one_minus_exp(x):
    return -np.expm1(-x)


# ---------------------------------------------------------------------------
# Profiles and operand functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Indicator:
    """Indicator function of ``(a, b)``."""

    a: float
    b: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return ((x > self.a) & (x < self.b)).astype(complex)

    @property
    def support(self) -> tuple[float, float]:
        return self.a, self.b

    def breakpoints(self):
        return (self.a, self.b)


@dataclass(frozen=True)
class Sampled:
    """Piecewise-linear function through ``(x, values)``, zero outside ``[x[0], x[-1]]``."""

    x: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        if x.ndim != 1 or x.shape != v.shape or x.size < 2 or np.any(np.diff(x) <= 0):
            raise ValueError("samples need increasing x and matching values")
        if x[0] < 0:
            raise ValueError("samples must live on (0, inf)")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", v)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.x[0]) & (x <= self.x[-1])
        re = np.interp(x, self.x, self.values.real)
        im = np.interp(x, self.x, self.values.imag)
        return np.where(inside, re + 1j * im, 0.0)

    @property
    def support(self) -> tuple[float, float]:
        nz = np.nonzero(self.values)[0]
        if nz.size == 0:
            return (self.x[0], self.x[0])
        lo = self.x[max(nz[0] - 1, 0)]
        hi = self.x[min(nz[-1] + 1, self.x.size - 1)]
        return float(lo), float(hi)

    def breakpoints(self):
        return tuple(self.x)


@dataclass(frozen=True)
class WeightVector:
    """The unit vector ``h_t/||h_t||`` of a profile truncated at ``t``."""

    spec: "BoundaryWeightSpec"
    t: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        norm = np.sqrt(truncated_values(self.spec, self.t).nu_I)
        return np.where(x > self.t, self.spec.h(x), 0.0) / norm

    @property
    def support(self) -> tuple[float, float]:
        lo, hi = self.spec.profile.support
        return max(lo, self.t), hi

    def breakpoints(self):
        return (self.t,) + tuple(self.spec.profile.breakpoints())


@dataclass(frozen=True)
class BoundaryWeightSpec:
    """Profile ``f`` of a normalized boundary weight.

    ``BoundaryWeightSpec.indicator01()`` is ``f = 1_(0,1)``, which has closed
    forms ``s_t = ln((1 - e^{-1})/(1 - e^{-t}))`` and ``nu_t(I) = s_t + 1 - t``
    for ``t < 1``.
    """

    profile: Indicator | Sampled
    name: str = "sampled"

    def __post_init__(self):
        nrm = self.norm_squared
        if abs(nrm - 1) > NORM_TOL:
            raise NotNormalized(f"||f||^2 = {nrm:.12g}, expected 1")

    @classmethod
    def indicator01(cls) -> "BoundaryWeightSpec":
        return cls(Indicator(0.0, 1.0), "indicator01")

    @classmethod
    def sampled(cls, x, values, normalize: bool = False) -> "BoundaryWeightSpec":
        prof = Sampled(x, values)
        if normalize:
            nrm = _integrate(lambda y: np.abs(prof(y)) ** 2, prof.x[0], prof.x[-1], prof.breakpoints())
            prof = Sampled(prof.x, prof.values / np.sqrt(nrm))
        return cls(prof, "sampled")

    @property
    def analytic(self) -> bool:
        return self.name == "indicator01"

    @property
    def norm_squared(self) -> float:
        lo, hi = self.profile.support
        return _integrate(lambda x: np.abs(self.profile(x)) ** 2, lo, hi, self.profile.breakpoints())

    def f(self, x):
        return self.profile(x)

    def h(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.profile(x) / np.sqrt(_one_minus_exp(x))
        return np.where(x > 0, out, 0.0)

    def unbounded(self) -> bool:
        """Whether ``nu`` is unbounded on the null boundary algebra.

        For indicator01 this is exact (``nu_t(I)`` grows like ``ln(1/t)``).
        Sampled profiles compare ``int_0^0.1 |f|^2/(1 - e^{-x})`` with the
        same integral over ``(0.1, inf)``; a ratio above 10 counts as unbounded.
        """
        if self.analytic:
            return True
        lo, hi = self.profile.support
        if lo >= 0.1:
            return False
        head = _integrate(lambda x: np.abs(self.h(x)) ** 2, max(lo, 1e-12), 0.1, self.profile.breakpoints())
        tail = _integrate(lambda x: np.abs(self.h(x)) ** 2, 0.1, max(hi, 0.1), self.profile.breakpoints())
        return bool(head > 10 * tail)


def _integrate(fn: Callable, a: float, b: float, points=(), tol: float = QUAD_TOL) -> float:
    """Adaptive Gauss-Kronrod quadrature of a real integrand on ``[a, b]``."""
    if b <= a:
        return 0.0
    pts = sorted(p for p in points if a < p < b)
    with np.errstate(all="ignore"):
        val, err = quad(lambda x: float(fn(x)), a, b, points=pts or None, limit=500,
                        epsabs=tol, epsrel=tol)
    if not np.isfinite(val) or err > max(1e-9, 1e-9 * abs(val)):
        raise QuadratureFailure(f"quadrature on [{a}, {b}] did not converge (error {err:.2e})")
    return float(val)


def _integrate_complex(fn: Callable, a: float, b: float, points=()) -> complex:
    re = _integrate(lambda x: np.real(fn(x)), a, b, points)
    im = _integrate(lambda x: np.imag(fn(x)), a, b, points)
    return complex(re, im)


# ---------------------------------------------------------------------------
# Truncated weights
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TruncatedWeight:
    t: float
    nu_I: float
    s_t: float
    degenerate: bool = False
    method: str = "quadrature"

    @property
    def bound(self) -> float:
        """``nu_t(I)/(1 + s_t)``, the norm of ``pi_t^#`` for unital ``phi``."""
        return self.nu_I / (1 + self.s_t)


def indicator01_closed_form(t: float) -> tuple[float, float]:
    """``(nu_t(I), s_t)`` for ``f = 1_(0,1)``."""
    if t >= DEGENERATE_T:
        return 0.0, 0.0
    s = float(np.log(_one_minus_exp(1.0) / _one_minus_exp(t)))
    return s + 1.0 - t, s


def truncated_values(spec: BoundaryWeightSpec, t: float, method: str = "auto") -> TruncatedWeight:
    """``nu_t(I)`` and ``s_t``; closed form for indicator01 unless ``method='quadrature'``.

    ``t`` beyond the support of ``f`` gives zero truncations, flagged as
    degenerate (the truncated weight is then bounded).
    """
    if t <= 0:
        raise ValueError("t must be positive")
    lo, hi = spec.profile.support
    degenerate = t >= hi
    if spec.analytic and method in ("auto", "closed"):
        nu, s = indicator01_closed_form(t)
        return TruncatedWeight(t, nu, s, degenerate, "closed-form")
    if method not in ("auto", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    a = max(t, lo)
    pts = spec.profile.breakpoints()
    f2 = lambda x: np.abs(spec.f(x)) ** 2  # noqa: E731
    nu = _integrate(lambda x: f2(x) / _one_minus_exp(x), a, hi, pts)
    s = _integrate(lambda x: f2(x) / np.expm1(x), a, hi, pts)
    return TruncatedWeight(t, nu, s, degenerate, "quadrature")


# ---------------------------------------------------------------------------
# Generalized boundary representation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GBROperand:
    """``A = M (x) |u><v|`` on ``C^n (x) L^2(0, inf)``."""

    M: np.ndarray
    u: Indicator | Sampled | WeightVector
    v: Indicator | Sampled | WeightVector

    def __post_init__(self):
        object.__setattr__(self, "M", np.asarray(self.M, dtype=complex))

    def l2_norm(self, g) -> float:
        lo, hi = g.support
        return float(np.sqrt(_integrate(lambda x: np.abs(g(x)) ** 2, lo, hi, g.breakpoints())))

    @property
    def norm(self) -> float:
        """Operator norm ``||M|| ||u|| ||v||``."""
        return float(np.linalg.norm(self.M, 2) * self.l2_norm(self.u) * self.l2_norm(self.v))

    @property
    def support_start(self) -> float:
        return min(self.u.support[0], self.v.support[0])


def _pairing(spec: BoundaryWeightSpec, t: float, g) -> complex:
    """``(h_t, g) = int_t^inf conj(h(x)) g(x) dx``."""
    lo = max(t, spec.profile.support[0], g.support[0])
    hi = min(spec.profile.support[1], g.support[1])
    pts = tuple(spec.profile.breakpoints()) + tuple(g.breakpoints())
    return _integrate_complex(lambda x: np.conj(spec.h(x)) * g(x), lo, hi, pts)


def omega(spec: BoundaryWeightSpec, t: float, A: GBROperand) -> np.ndarray:
    """``Omega_{nu_t}(A)_ij = M_ij (h_t, u)(v, h_t)``."""
    if not np.any(A.M):
        return np.zeros_like(A.M)
    c = _pairing(spec, t, A.u) * np.conj(_pairing(spec, t, A.v))
    return A.M * c


def gbr_apply(phi: SuperOp, spec: BoundaryWeightSpec, t: float, A: GBROperand) -> np.ndarray:
    """``pi_t^#(A) = phi(I + s_t phi)^{-1}(Omega_{nu_t}(A))``."""
    if not phi.is_unital():
        raise NotUnital("the boundary representation needs a unital phi")
    tw = truncated_values(spec, t)
    return resolvent_subordinate(phi, tw.s_t).apply(omega(spec, t, A))


def _tsv(header, rows) -> str:
    def fmt(v):
        if isinstance(v, (bool, np.bool_)):
            return "true" if v else "false"
        if isinstance(v, float):
            return f"{v:.12g}"
        return str(v)

    lines = ["\t".join(header)] + ["\t".join(fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Table:
    header: tuple
    rows: tuple

    def to_tsv(self) -> str:
        return _tsv(self.header, self.rows)

    def column(self, name) -> np.ndarray:
        i = self.header.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)


def gbr_norm_bound(phi: SuperOp, spec: BoundaryWeightSpec, t_grid) -> Table:
    """Per ``t``: ``nu_t(I)``, ``s_t``, the bound ``nu_t(I)/(1+s_t)`` and ``||pi_t^#(I)||``.

    ``pi_t^#`` of the identity operand ``I (x) I`` is ``nu_t(I) phi^(s_t)(I)``.
    Raises :class:`ContractionViolated` if the bound exceeds ``1 + 1e-10``.
    """
    if not phi.is_unital():
        raise NotUnital("the boundary representation needs a unital phi")
    n = phi.dim_in
    rows = []
    for t in t_grid:
        tw = truncated_values(spec, float(t))
        if tw.bound > 1 + BOUND_TOL:
            raise ContractionViolated(f"nu_t(I)/(1+s_t) = {tw.bound:.15g} > 1 at t={t}")
        out = resolvent_subordinate(phi, tw.s_t).apply(tw.nu_I * np.eye(n))
        rows.append((float(t), tw.nu_I, tw.s_t, tw.bound, float(np.linalg.norm(out, 2)), tw.degenerate))
    return Table(("t", "nu_I", "s_t", "bound", "norm", "degenerate"), tuple(rows))


def normal_spine_decay(phi: SuperOp, spec: BoundaryWeightSpec, t_fixed: float, b_grid,
                       A: GBROperand) -> Table:
    """``||pi_b^#(A)||`` for ``b`` below ``t_fixed`` with ``A`` supported beyond ``t_fixed``.

    For such ``A``, ``Omega_{nu_b}(A) = Omega_{nu_{t_fixed}}(A)`` and
    ``||pi_b^#(A)|| <= ||Omega(A)||/(1 + s_b)``, which tends to zero with ``b``.
    The ``bound`` column is that right-hand side and ``monotone`` records
    whether the norms so far decrease as ``b`` decreases.
    """
    if not phi.is_unital():
        raise NotUnital("the boundary representation needs a unital phi")
    if np.any(A.M) and A.support_start < t_fixed - 1e-15:
        raise SupportViolation(f"operand is not supported in (t_fixed, inf) = ({t_fixed}, inf)")
    b_grid = [float(b) for b in b_grid]
    if any(not 0 < b < t_fixed for b in b_grid):
        raise SupportViolation("every b must lie in (0, t_fixed)")
    Om = omega(spec, t_fixed, A)
    om_norm = float(np.linalg.norm(Om, 2))
    rows = []
    prev = np.inf
    prev_b = np.inf
    for b in b_grid:
        tw = truncated_values(spec, b)
        val = float(np.linalg.norm(resolvent_subordinate(phi, tw.s_t).apply(Om), 2))
        bound = om_norm / (1 + tw.s_t)
        if val > bound * (1 + CONTRACTION_SLACK) + 1e-15:
            raise ContractionViolated(f"||pi_b(A)|| = {val:.6g} exceeds ||Omega(A)||/(1+s_b) at b={b}")
        monotone = (val <= prev + 1e-15) if b < prev_b else (val >= prev - 1e-15)
        rows.append((b, tw.nu_I, tw.s_t, bound, val, bool(monotone)))
        prev, prev_b = val, b
    return Table(("b", "nu_I", "s_t", "bound", "norm", "monotone"), tuple(rows))


__all__ = [
    "Indicator",
    "Sampled",
    "WeightVector",
    "BoundaryWeightSpec",
    "TruncatedWeight",
    "GBROperand",
    "Table",
    "indicator01_closed_form",
    "truncated_values",
    "omega",
    "gbr_apply",
    "gbr_norm_bound",
    "normal_spine_decay",
]
