import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qposmaps.bwsim import (
    BoundaryWeightSpec,
    GBROperand,
    Indicator,
    WeightVector,
    gbr_apply,
    gbr_norm_bound,
    indicator01_closed_form,
    normal_spine_decay,
    omega,
    truncated_values,
)
from qposmaps.errors import NotNormalized, NotUnital, SupportViolation
from qposmaps.generators import random_density, random_invertible_unital_q_positive, random_q_positive
from qposmaps.superop import identity, state_map

seeds = st.integers(0, 2**31 - 1)
SPEC = BoundaryWeightSpec.indicator01()
# s_t at t = 1/2 from ln((1 - e^-1)/(1 - e^-1/2)), evaluated with log1p/expm1
S_HALF = 0.4740769841801067
T_GRID = np.round(np.arange(0.01, 1.0, 0.01), 2)


def s_closed(t):
    return np.log((1 - np.exp(-1.0)) / (1 - np.exp(-t)))


def pairing_oracle(t, a, b):
    """``int conj(h) 1_(a,b)`` over ``x > t`` with ``h = 1_(0,1)/sqrt(1-e^-x)``."""
    F = lambda x: 2 * np.arctanh(np.sqrt(1 - np.exp(-x)))  # noqa: E731
    lo, hi = max(t, a, 0.0), min(b, 1.0)
    return F(hi) - F(lo) if hi > lo else 0.0


def test_half_example():
    tw = truncated_values(SPEC, 0.5)
    assert np.isclose(tw.s_t, S_HALF, rtol=0, atol=1e-14)
    assert np.isclose(tw.nu_I, S_HALF + 0.5, atol=1e-14)
    q = truncated_values(SPEC, 0.5, method="quadrature")
    assert abs(q.s_t - S_HALF) <= 1e-8 and abs(q.nu_I - S_HALF - 0.5) <= 1e-8


def test_closed_form_matches_quadrature():
    for t in T_GRID:
        c = truncated_values(SPEC, t, "closed")
        q = truncated_values(SPEC, t, "quadrature")
        assert abs(c.s_t - q.s_t) <= 1e-8
        assert abs(c.nu_I - q.nu_I) <= 1e-8
        assert abs(c.s_t - s_closed(t)) <= 1e-12
        assert abs(c.nu_I - c.s_t - (1 - t)) <= 1e-12


def test_s_t_diverges_at_zero():
    vals = [truncated_values(SPEC, t).s_t for t in (1e-2, 1e-4, 1e-6, 1e-8)]
    assert np.all(np.diff(vals) > 4)
    # s_t ~ ln((1 - e^-1)/t) as t -> 0
    assert abs(vals[-1] - np.log((1 - np.exp(-1.0)) / 1e-8)) <= 1e-7


def test_degenerate_beyond_support():
    for t in (1.0, 1.5, 3.0):
        tw = truncated_values(SPEC, t)
        assert tw.degenerate and tw.nu_I == 0 and tw.s_t == 0
    assert indicator01_closed_form(1.0) == (0.0, 0.0)
    with pytest.raises(ValueError):
        truncated_values(SPEC, 0.0)


def test_monotone_in_t():
    tws = [truncated_values(SPEC, t) for t in T_GRID]
    assert np.all(np.diff([w.s_t for w in tws]) <= 0)
    assert np.all(np.diff([w.nu_I for w in tws]) <= 0)


def test_unitality_transfer_limit():
    for t in T_GRID:
        tw = truncated_values(SPEC, t)
        assert tw.nu_I - tw.s_t <= 1
    tw = truncated_values(SPEC, 1e-7)
    assert abs(tw.nu_I - tw.s_t - 1) <= 1e-6


def test_normalization_checked():
    with pytest.raises(NotNormalized):
        BoundaryWeightSpec(Indicator(0.0, 2.0))
    x = np.linspace(0.0, 2.0, 41)
    spec = BoundaryWeightSpec.sampled(x, np.exp(-x), normalize=True)
    assert abs(spec.norm_squared - 1) <= 1e-8
    assert spec.unbounded()
    x = np.linspace(1.0, 2.0, 11)
    assert not BoundaryWeightSpec.sampled(x, np.ones(11), normalize=True).unbounded()
    assert SPEC.unbounded()


def test_sampled_profile_matches_indicator():
    x = np.array([0.0, 1e-12, 1.0 - 1e-12, 1.0])
    spec = BoundaryWeightSpec.sampled(x, [0.0, 1.0, 1.0, 0.0])
    for t in (0.1, 0.5):
        a = truncated_values(spec, t)
        b = truncated_values(SPEC, t)
        assert abs(a.s_t - b.s_t) <= 1e-8 and abs(a.nu_I - b.nu_I) <= 1e-8


def test_gbr_apply_weight_vector_operand(rng):
    _, phi = random_q_positive(2, rng, "schur")
    t = 0.3
    u = WeightVector(SPEC, t)
    A = GBROperand(np.eye(2), u, u)
    tw = truncated_values(SPEC, t)
    out = gbr_apply(phi, SPEC, t, A)
    assert np.allclose(out, tw.bound * np.eye(2), atol=1e-9)
    assert tw.bound <= 1


def test_gbr_apply_zero_operand():
    A = GBROperand(np.zeros((2, 2)), Indicator(0.2, 0.6), Indicator(0.1, 0.4))
    assert np.allclose(gbr_apply(identity(2), SPEC, 0.3, A), 0)


def test_gbr_apply_state_map_oracle():
    phi = state_map(np.eye(2) / 2)
    M = np.array([[1.0, 2j], [0.5, 3.0]])
    t = 0.25
    A = GBROperand(M, Indicator(0.2, 0.6), Indicator(0.1, 0.4))
    c = pairing_oracle(t, 0.2, 0.6) * pairing_oracle(t, 0.1, 0.4)
    assert np.allclose(omega(SPEC, t, A), c * M, atol=1e-9)
    expected = c * np.trace(M) / 2 / (1 + s_closed(t)) * np.eye(2)
    assert np.allclose(gbr_apply(phi, SPEC, t, A), expected, atol=1e-9)


def test_gbr_requires_unital():
    A = GBROperand(np.eye(2), Indicator(0.2, 0.6), Indicator(0.1, 0.4))
    with pytest.raises(NotUnital):
        gbr_apply(2.0 * identity(2), SPEC, 0.3, A)


def test_norm_bound_table():
    grid = list(np.round(np.arange(0.01, 0.91, 0.01), 2)) + [1.0, 1.5]
    tab = gbr_norm_bound(identity(2), SPEC, grid)
    t = tab.column("t")
    bound = tab.column("bound")
    live = t < 1
    assert np.all(bound <= 1)
    assert np.allclose(bound[live], 1 - t[live] / (1 + s_closed(t[live])), atol=1e-12)
    assert np.allclose(tab.column("norm"), bound)
    deg = [r[-1] for r in tab.rows]
    assert deg == [bool(x >= 1) for x in t]
    near0 = gbr_norm_bound(identity(2), SPEC, [1e-9]).column("bound")[0]
    assert abs(near0 - 1) <= 1e-6
    tsv = tab.to_tsv().splitlines()
    assert tsv[0].split("\t") == ["t", "nu_I", "s_t", "bound", "norm", "degenerate"]
    assert len(tsv) == len(grid) + 1


def test_decay_identity_map_exact():
    A = GBROperand(np.array([[1.0, 0.5], [0.5, 2.0]]), Indicator(0.5, 1.0), Indicator(0.6, 0.9))
    b = [0.3, 0.1, 0.03, 0.01]
    tab = normal_spine_decay(identity(2), SPEC, 0.5, b, A)
    om = np.linalg.norm(omega(SPEC, 0.5, A), 2)
    assert np.allclose(tab.column("norm"), om / (1 + s_closed(np.array(b))), rtol=1e-12)
    norms = tab.column("norm")
    assert np.all(np.diff(norms) < 0)
    assert all(r[-1] for r in tab.rows)
    # the ratio is fixed by s_b alone for unital phi
    ratio = norms[-1] / norms[0]
    assert np.isclose(ratio, (1 + s_closed(0.3)) / (1 + s_closed(0.01)), rtol=1e-12)


def test_decay_zero_operand():
    A = GBROperand(np.zeros((2, 2)), Indicator(0.5, 1.0), Indicator(0.5, 1.0))
    tab = normal_spine_decay(identity(2), SPEC, 0.5, [0.3, 0.1], A)
    assert np.all(tab.column("norm") == 0)


def test_decay_support_violations():
    A = GBROperand(np.eye(2), Indicator(0.2, 1.0), Indicator(0.5, 1.0))
    with pytest.raises(SupportViolation):
        normal_spine_decay(identity(2), SPEC, 0.5, [0.3], A)
    A = GBROperand(np.eye(2), Indicator(0.5, 1.0), Indicator(0.5, 1.0))
    with pytest.raises(SupportViolation):
        normal_spine_decay(identity(2), SPEC, 0.5, [0.7], A)


@settings(max_examples=10)
@given(seeds)
def test_gbr_contraction(seed):
    rng = np.random.default_rng(seed)
    phi = (random_invertible_unital_q_positive(2, rng), random_q_positive(2, rng, "schur")[1],
           state_map(random_density(2, rng)))[int(rng.integers(3))]
    t = float(rng.uniform(0.02, 0.95))
    a, b = np.sort(rng.uniform(0, 1.5, 2))
    c, d = np.sort(rng.uniform(0, 1.5, 2))
    M = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    A = GBROperand(M, Indicator(a, b), Indicator(c, d))
    out = gbr_apply(phi, SPEC, t, A)
    tw = truncated_values(SPEC, t)
    assert np.linalg.norm(out, 2) <= A.norm * tw.bound * (1 + 1e-8) + 1e-14
