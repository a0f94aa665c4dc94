import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import first_failure, min_choi_eig, resolvent_callable
from qposmaps.errors import Diverges, SingularResolvent
from qposmaps.generators import (
    phiu_map,
    random_density,
    random_dominance_pair,
    random_q_positive,
    random_unitary,
    schur_counterexample,
)
from qposmaps.qorder import (
    default_grid,
    eps_deform,
    fixed_point_of_limit,
    has_negative_eigenvalue,
    is_q_positive,
    limit_map,
    q_dominates,
    resolvent_subordinate,
)
from qposmaps.superop import (
    SuperOp,
    conjugate_by_unitary,
    identity,
    schur_map,
    schur_multipliers,
    state_map,
    transpose_map,
    zero,
)

seeds = st.integers(0, 2**31 - 1)

# Crossing points t* where phi^(t) - (lam phi)^(t) stops being CP for the 2x2
# Schur counterexample; root of d(t) = |o(t)| for the 2x2 multiplier matrix,
# found by bracketing plus brentq.
T_STAR = {0.1: 1.6029774697691959, 0.5: 0.7766461438534534, 0.9: 0.5836160027254574}


def test_default_grid():
    g = default_grid()
    assert g.size == 122 and g[0] == 0
    assert np.isclose(g[1], 1e-3) and np.isclose(g[-1], 1e6)
    assert np.allclose(np.diff(np.log10(g[1:])), 9 / 120)


def test_resolvent_examples():
    assert np.allclose(resolvent_subordinate(identity(2), 1.0).matrix, np.eye(4) / 2)
    D = np.diag([0.6, 0.4])
    for s in (0.0, 0.3, 7.0):
        assert np.allclose(resolvent_subordinate(state_map(D), s).matrix, state_map(D).matrix / (1 + s))
    lam = np.array([1.0, -1.0])
    r = resolvent_subordinate(phiu_map(lam), 2.0)
    expected = 1 / (3 + 1j * (lam[:, None] - lam[None, :]))
    assert np.allclose(schur_multipliers(r), expected)


def test_resolvent_singular():
    with pytest.raises(SingularResolvent):
        resolvent_subordinate(-1.0 * identity(2), 1.0)


def test_has_negative_eigenvalue_examples():
    assert not has_negative_eigenvalue(identity(2))
    assert has_negative_eigenvalue(-1.0 * identity(2))
    phi = schur_counterexample()
    assert not has_negative_eigenvalue(phi)
    assert np.allclose(np.sort_complex(phi.eigenvalues()), np.sort_complex([0.5 - 0.5j, 0.5 + 0.5j, 1, 1]))


def test_is_q_positive_examples():
    cert = is_q_positive(state_map(np.eye(2) / 2))
    assert cert.verdict and cert.method == "rank-one-exact"
    cert = is_q_positive(schur_counterexample())
    assert cert.verdict and cert.method == "schur-exact"
    cert = is_q_positive(transpose_map(2))
    assert not cert.verdict and cert.failures[0] == 0.0
    assert np.isclose(cert.min_eigs[0], -1)


def test_grid_path_matches_oracle_on_generic_map(rng):
    _, phi = random_q_positive(2, rng, "invertible")
    U = random_unitary(2, rng)
    phi = conjugate_by_unitary(phi, U)
    cert = is_q_positive(phi)
    assert cert.grid_certified and cert.verdict
    for i in (0, 40, 121):
        t = cert.grid[i]
        oracle = min_choi_eig(resolvent_callable(phi.apply, 2, t), 2) * (1 + t)
        assert np.isclose(cert.min_eigs[i], oracle, atol=1e-9)


def test_not_self_adjoint_is_not_q_positive():
    phi = SuperOp.square(np.diag([1, 1j, 1, 1]).astype(complex), 2)
    assert not is_q_positive(phi).verdict


def test_q_dominates_examples():
    phi = state_map(np.diag([0.7, 0.3]))
    assert q_dominates(phi, resolvent_subordinate(phi, 1.0)).verdict
    for _, psi in (random_q_positive(3, np.random.default_rng(1), k) for k in ("invertible", "schur")):
        assert q_dominates(psi, zero(3)).verdict


@pytest.mark.parametrize("lam", sorted(T_STAR))
def test_counterexample_first_violation(lam):
    phi = schur_counterexample()
    cert = q_dominates(phi, lam * phi)
    assert not cert.verdict
    g = cert.grid
    i = int(np.searchsorted(g, T_STAR[lam]))
    assert cert.failures[0] == g[i]
    assert cert.worst[1] < 0


def test_counterexample_crossing_matches_bruteforce_oracle():
    phi = schur_counterexample()
    ts = np.linspace(0.5, 2.0, 1501)
    t = first_failure(phi.apply, 2, (0.5 * phi).apply, ts)
    assert abs(t - T_STAR[0.5]) <= 1e-3


def test_limit_map_examples(rng):
    _, phi = random_q_positive(2, rng, "invertible")
    assert np.allclose(limit_map(phi).matrix, np.eye(4), atol=1e-6)
    D = random_density(2, rng)
    assert np.allclose(limit_map(state_map(D)).matrix, state_map(D).matrix, atol=1e-6)
    assert np.allclose(limit_map(zero(2)).matrix, 0)


def test_limit_map_jordan_diverges():
    N = np.zeros((4, 4), dtype=complex)
    N[0, 1] = 1
    with pytest.raises(Diverges):
        limit_map(SuperOp.square(N, 2))


def test_eps_deform_examples(rng):
    phi = state_map(random_density(2, rng))
    assert np.allclose(eps_deform(phi, 0).matrix, phi.matrix)
    assert np.allclose(eps_deform(phi, 1).matrix, np.eye(4))
    half = eps_deform(phi, 0.5)
    ev = np.sort(half.eigenvalues().real)
    assert np.allclose(ev, np.sort(0.5 + 0.5 * phi.eigenvalues().real))
    assert abs(np.linalg.det(half.matrix)) > 1e-6


def test_fixed_point_examples():
    T = fixed_point_of_limit(state_map(np.diag([0.6, 0.4])))
    assert np.allclose(T, np.eye(2), atol=1e-8)
    assert np.allclose(fixed_point_of_limit(identity(3)), np.eye(3), atol=1e-8)
    P = np.diag([1.0, 0.0])
    D = np.diag([1.0, 0.0])
    psi = SuperOp.square(np.outer(P.reshape(-1), D.T.reshape(-1)), 2)
    assert np.allclose(fixed_point_of_limit(psi), P, atol=1e-8)


# ---------------------------------------------------------------------------
# Properties
# ---------------------------------------------------------------------------


@given(seeds, st.sampled_from([2, 3]))
def test_semigroup_law(seed, n):
    _, phi = random_q_positive(n, np.random.default_rng(seed))
    for s in (0.1, 1.0, 10.0):
        for t in (0.1, 1.0, 10.0):
            lhs = resolvent_subordinate(resolvent_subordinate(phi, s), t)
            assert lhs.distance(resolvent_subordinate(phi, s + t)) <= 1e-9


@given(seeds)
def test_resolvent_monotone(seed):
    _, phi = random_q_positive(2, np.random.default_rng(seed))
    for s1, s2 in ((0, 0.5), (0, 2), (0.5, 2), (2, 2)):
        a, b = resolvent_subordinate(phi, s1), resolvent_subordinate(phi, s2)
        assert q_dominates(a, b).verdict


@given(seeds)
def test_eps_equivalence(seed):
    rng = np.random.default_rng(seed)
    phi, psi, _, _ = random_dominance_pair(2, rng)
    base = q_dominates(phi, psi).verdict
    for eps in (0.1, 0.5, 0.9):
        assert q_dominates(eps_deform(phi, eps), eps_deform(psi, eps)).verdict == base


@given(seeds)
def test_dominance_pairs_have_known_answer(seed):
    phi, psi, holds, _ = random_dominance_pair(3, np.random.default_rng(seed))
    assert q_dominates(phi, psi).verdict == holds


@given(seeds, st.sampled_from(["invertible", "rank-one", "schur", "resolvent"]))
def test_unitary_covariance(seed, kind):
    rng = np.random.default_rng(seed)
    _, phi = random_q_positive(2, rng, kind)
    U = random_unitary(2, rng)
    assert is_q_positive(phi).verdict
    assert is_q_positive(conjugate_by_unitary(phi, U)).verdict
    bad = phi - 0.3 * transpose_map(2)
    assert is_q_positive(bad).verdict == is_q_positive(conjugate_by_unitary(bad, U)).verdict


@given(seeds, st.floats(0, 0.99))
def test_deformation_stays_q_positive(seed, eps):
    _, phi = random_q_positive(2, np.random.default_rng(seed))
    assert is_q_positive(eps_deform(phi, eps)).verdict


def test_single_eps_deformation_is_not_equivalent_per_pair():
    # phi >=_q c phi fails for c = 0.5 and the Schur counterexample, yet the
    # deformed pair passes at eps = 0.9: the equivalence needs the deformation
    # of the pair to hold for every eps, not just one.
    phi = schur_counterexample()
    psi = 0.5 * phi
    assert not q_dominates(phi, psi).verdict
    assert q_dominates(eps_deform(phi, 0.9), eps_deform(psi, 0.9)).verdict
