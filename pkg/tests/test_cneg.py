import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import min_choi_eig, superop_of
from qposmaps.cneg import (
    CnegForm,
    extract_canonical_form,
    inverse_of_unital_cneg,
    invertible_subordinate_test,
    is_conditionally_negative,
    lindblad_form,
    quadratic_form_witness,
    semigroup,
)
from qposmaps.errors import NotConditionallyNegative, NotSelfAdjoint, NotUnital, ResidualNotCP
from qposmaps.generators import (
    phiu_map,
    random_invertible_unital_q_positive,
    random_unital_cneg,
    random_unital_cneg_form,
    schur_counterexample,
)
from qposmaps.qorder import is_q_positive, q_dominates, resolvent_subordinate
from qposmaps.superop import SuperOp, identity, schur_multipliers, transpose_map

seeds = st.integers(0, 2**31 - 1)
Y0 = np.diag([1j, -1j])
S_FLIP = np.diag([1.0, -1.0])


def test_cneg_examples():
    assert is_conditionally_negative(identity(2)).verdict
    assert is_conditionally_negative(lindblad_form(1, Y0)).verdict
    v = is_conditionally_negative(-1.0 * transpose_map(2))
    assert not v.verdict and v.cert.failures


def test_minus_transpose_semigroup_matches_closed_form():
    # exp(sT) = cosh(s) id + sinh(s) T since T^2 = id
    s = 0.7
    E = semigroup(-1.0 * transpose_map(2), s)
    expected = np.cosh(s) * np.eye(4) + np.sinh(s) * transpose_map(2).matrix
    assert np.allclose(E.matrix, expected)
    assert min_choi_eig(E.apply, 2) < 0


def test_cneg_requires_self_adjoint():
    with pytest.raises(NotSelfAdjoint):
        is_conditionally_negative(SuperOp.square(np.diag([1, 1j, 1, 1]), 2))


def test_extract_identity():
    f = extract_canonical_form(identity(2))
    assert np.isclose(f.s, 1) and np.allclose(f.Y, 0) and f.terms == ()


def test_extract_inverse_of_phiu():
    phi = phiu_map([1.0, -1.0])
    psi = SuperOp(np.linalg.inv(phi.matrix), phi.shape_in, phi.shape_out)
    f = extract_canonical_form(psi)
    assert np.isclose(f.s, 1) and np.allclose(f.Y, Y0) and f.terms == ()


def test_extract_single_term():
    S = S_FLIP
    psi = lindblad_form(2, np.zeros((2, 2)), [(1.0, S)])
    f = extract_canonical_form(psi)
    assert np.isclose(f.s, 2) and np.allclose(f.Y, 0)
    assert len(f.terms) == 1
    lam, T = f.terms[0]
    assert np.isclose(lam, 1)
    assert np.allclose(T, S)
    assert np.isclose(np.trace(T.conj().T @ T).real, 2)


def test_extract_reports_residual_witness():
    # psi = A + S A S^*: the residual is -S . S^*, not CP
    with pytest.raises(ResidualNotCP) as exc:
        extract_canonical_form(lindblad_form(1, np.zeros((2, 2)), [(-1.0, S_FLIP)]))
    assert exc.value.witness_eig < 0


def test_inverse_of_unital_cneg_examples():
    assert np.allclose(inverse_of_unital_cneg(identity(2)).matrix, np.eye(4))
    inv = inverse_of_unital_cneg(lindblad_form(1, Y0))
    assert np.allclose(schur_multipliers(inv), schur_multipliers(phiu_map([1.0, -1.0])))
    # the 2x2 Thm entries: off-diagonal 1/(1 +- 2i) = 0.2 -+ 0.4i
    assert np.isclose(schur_multipliers(inv)[0, 1], 0.2 - 0.4j)


def test_inverse_of_unital_cneg_preconditions():
    with pytest.raises(NotUnital):
        inverse_of_unital_cneg(2.0 * identity(2))
    # unital and self-adjoint, but exp(-s psi) = e^s (cosh(2s) id - sinh(2s) T)
    bad = -1.0 * identity(2) + 2.0 * transpose_map(2)
    with pytest.raises(NotConditionallyNegative):
        inverse_of_unital_cneg(bad)


def test_invertible_subordinate_examples():
    assert invertible_subordinate_test(identity(2), identity(2))
    phi = phiu_map([1.0, -1.0])
    assert invertible_subordinate_test(phi, resolvent_subordinate(phi, 1.0))
    ce = schur_counterexample()
    assert invertible_subordinate_test(identity(2), ce) == q_dominates(identity(2), ce).verdict


# ---------------------------------------------------------------------------
# Properties
# ---------------------------------------------------------------------------


@given(seeds, st.sampled_from([2, 3]))
def test_extract_reconstruct_round_trip(seed, n):
    form = random_unital_cneg_form(n, np.random.default_rng(seed), n_terms=3)
    psi = form.reconstruct()
    got = extract_canonical_form(psi)
    assert got.reconstruct().distance(psi) <= 1e-8
    assert np.isclose(got.s, form.s, atol=1e-8)
    assert np.allclose(got.Y, form.Y, atol=1e-8)


@given(seeds)
def test_extraction_independent_of_term_basis(seed):
    rng = np.random.default_rng(seed)
    form = random_unital_cneg_form(3, rng, n_terms=3)
    # rotate sqrt(lambda_i) S_i by a random unitary and renormalize
    G = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    W, _ = np.linalg.qr(G)
    base = [np.sqrt(lam) * S for lam, S in form.terms]
    terms = []
    for j in range(len(base)):
        T = sum(W[j, i] * base[i] for i in range(len(base)))
        w = np.trace(T.conj().T @ T).real / 3
        terms.append((w, T / np.sqrt(w)))
    other = CnegForm(form.s, form.Y, tuple(terms)).reconstruct()
    assert other.distance(form.reconstruct()) <= 1e-10
    got = extract_canonical_form(other)
    assert np.isclose(got.s, form.s, atol=1e-8) and np.allclose(got.Y, form.Y, atol=1e-8)


@given(seeds)
def test_cneg_inverse_is_q_positive(seed):
    psi = random_unital_cneg(2, np.random.default_rng(seed))
    assert is_conditionally_negative(psi).verdict
    phi = inverse_of_unital_cneg(psi)
    cert = is_q_positive(phi)
    assert cert.verdict


@given(seeds)
def test_q_positive_inverse_is_cneg(seed):
    phi = random_invertible_unital_q_positive(3, np.random.default_rng(seed))
    inv = SuperOp(np.linalg.inv(phi.matrix), phi.shape_in, phi.shape_out)
    assert is_conditionally_negative(inv).verdict


@given(seeds)
def test_exponential_contraction(seed):
    psi = random_unital_cneg(3, np.random.default_rng(seed))
    for s in (1.0, 5.0, 10.0):
        E = semigroup(psi, s)
        assert min_choi_eig(E.apply, 3) >= -1e-10
        # a CP map attains its norm at the identity
        assert np.linalg.norm(E.apply(np.eye(3)), 2) <= np.exp(-s) * (1 + 1e-8)


def _random_self_adjoint(rng, n=2):
    kind = rng.integers(3)
    if kind == 0:
        return random_unital_cneg(n, rng)
    G = rng.normal(size=(n * n, n * n)) + 1j * rng.normal(size=(n * n, n * n))
    C = (G + G.conj().T) / 2
    from qposmaps.superop import ChoiMatrix, from_choi

    phi = from_choi(ChoiMatrix(n, n, C))
    return phi if kind == 1 else -1.0 * phi


def test_quadratic_form_never_contradicts_exponential_test():
    rng = np.random.default_rng(7)
    found = 0
    for _ in range(100):
        psi = _random_self_adjoint(rng)
        exp_verdict = is_conditionally_negative(psi).verdict
        w = quadratic_form_witness(psi, rng, samples=50)
        if w is not None:
            found += 1
            assert not exp_verdict
            value, As, fs = w
            assert np.allclose(sum(A @ f for A, f in zip(As, fs)), 0, atol=1e-10)
            assert value > 0
    assert found > 10


def test_superop_of_lindblad_matches_definition(rng):
    form = random_unital_cneg_form(2, rng)
    Y = form.Y

    def direct(A):
        out = form.s * A + Y @ A + A @ Y.conj().T
        for lam, S in form.terms:
            out = out - lam * S @ A @ S.conj().T
        return out

    assert np.allclose(form.reconstruct().matrix, superop_of(direct, 2))
