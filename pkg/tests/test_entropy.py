import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vnalab import _linalg as la
from vnalab import algebra as alg
from vnalab import entropy as en
from vnalab.errors import DecompositionError, DomainError, NotApplicableError, ParameterError

import oracles

LN2 = np.log(2)


def st_pair(n, rng):
    M = alg.full_matrix_algebra(n)
    return M, alg.state(M, la.random_density(rng, n)), alg.state(M, la.random_density(rng, n))


def seeds():
    return st.integers(0, 10_000)


# -- relative entropy examples --------------------------------------------

@pytest.mark.parametrize("method", ["umegaki", "modular"])
def test_self_relative_entropy_is_zero(method, rng):
    _, phi, _ = st_pair(3, rng)
    assert abs(en.relative_entropy(phi, phi, method)) < 1e-10


@pytest.mark.parametrize("method", ["umegaki", "modular"])
def test_pure_against_maximally_mixed(method):
    M = alg.full_matrix_algebra(2)
    phi = alg.state(M, np.diag([1.0, 0.0]))
    psi = alg.state(M, np.eye(2) / 2)
    assert en.relative_entropy(phi, psi, method) == pytest.approx(LN2, abs=1e-10)


@pytest.mark.parametrize("method", ["umegaki", "modular"])
def test_support_violation_is_infinite(method):
    M = alg.full_matrix_algebra(2)
    phi = alg.state(M, np.eye(2) / 2)
    psi = alg.state(M, np.diag([1.0, 0.0]))
    value = en.relative_entropy(phi, psi, method)
    assert en.is_infinite(value) and value is en.INF
    assert en.to_json_value(value) == "+inf"


def test_infinite_token_is_not_overflow():
    assert not en.is_infinite(float("inf"))
    assert en.INF == float("inf")


def test_relative_entropy_domain_checks(rng):
    phi = alg.state(alg.full_matrix_algebra(2), np.eye(2) / 2)
    other = alg.state(alg.full_matrix_algebra(3), np.eye(3) / 3)
    with pytest.raises(DomainError):
        en.relative_entropy(phi, other)
    with pytest.raises(ParameterError):
        en.relative_entropy(phi, phi, "bogus")


@given(seeds(), st.sampled_from([2, 3, 4]))
def test_routes_match_matrix_log_oracle(seed, n):
    rng = np.random.default_rng(seed)
    _, phi, psi = st_pair(n, rng)
    want = oracles.umegaki(phi.density, psi.density)
    assert en.relative_entropy(phi, psi, "umegaki") == pytest.approx(want, abs=1e-8)
    assert en.relative_entropy(phi, psi, "modular") == pytest.approx(want, abs=1e-8)


@given(seeds())
def test_routes_agree_on_two_block_algebra(seed):
    rng = np.random.default_rng(seed)
    M = alg.FdAlgebra(5, ((2, 1), (1, 3)), la.random_unitary(rng, 5))
    phi = alg.state(M, M.random_state_density(rng))
    psi = alg.state(M, M.random_state_density(rng, rank=1))
    a = en.relative_entropy(phi, psi, "umegaki")
    b = en.relative_entropy(phi, psi, "modular")
    assert (a is en.INF) == (b is en.INF)
    if a is not en.INF:
        assert a == pytest.approx(b, abs=1e-8)


# -- cocycle route ---------------------------------------------------------

def test_cocycle_equal_states(rng):
    _, phi, _ = st_pair(2, rng)
    assert abs(en.relative_entropy_cocycle_check(phi, phi)) < 1e-7


def test_cocycle_diagonal_pair():
    M = alg.full_matrix_algebra(2)
    phi = alg.state(M, np.diag([1.0, 0.0]))
    psi = alg.state(M, np.eye(2) / 2)
    d = en.cocycle_derivative(phi, psi, 1e-4)
    assert d.estimate == pytest.approx(LN2, abs=1e-6)
    assert abs(d.estimate - LN2) <= d.constant * d.step ** 2 + 1e-9


@pytest.mark.parametrize("seed", range(5))
def test_cocycle_random_m3(seed):
    rng = np.random.default_rng(seed)
    _, phi, psi = st_pair(3, rng)
    want = oracles.umegaki(phi.density, psi.density)
    assert en.relative_entropy_cocycle_check(phi, psi, 1e-4) == pytest.approx(want, abs=1e-4)


def test_cocycle_rejects_infinite_and_bad_step():
    M = alg.full_matrix_algebra(2)
    phi = alg.state(M, np.eye(2) / 2)
    psi = alg.state(M, np.diag([1.0, 0.0]))
    with pytest.raises(NotApplicableError):
        en.relative_entropy_cocycle_check(phi, psi)
    with pytest.raises(ParameterError):
        en.relative_entropy_cocycle_check(psi, phi, h=1.0)


# -- relative entropy properties ------------------------------------------

@given(seeds(), st.floats(0.1, 3.0), st.floats(0.1, 3.0))
def test_scaling_identity(seed, lam, mu):
    rng = np.random.default_rng(seed)
    M, phi, psi = st_pair(3, rng)
    lhs = en.relative_entropy(lam * phi, mu * psi)
    rhs = lam * en.relative_entropy(phi, psi) - lam * np.log(mu / lam)
    assert lhs == pytest.approx(rhs, abs=1e-9)


@given(seeds())
def test_pinsker(seed):
    rng = np.random.default_rng(seed)
    _, phi, psi = st_pair(3, rng)
    assert en.relative_entropy(phi, psi) >= (phi - psi).norm ** 2 / 2 - 1e-12


@given(seeds(), st.floats(0.0, 1.0))
def test_joint_convexity(seed, t):
    rng = np.random.default_rng(seed)
    _, p1, q1 = st_pair(2, rng)
    _, p2, q2 = st_pair(2, rng)
    mix = en.relative_entropy(t * p1 + (1 - t) * p2, t * q1 + (1 - t) * q2)
    assert mix <= t * en.relative_entropy(p1, q1) + (1 - t) * en.relative_entropy(p2, q2) + 1e-9


@given(seeds())
def test_monotone_under_partial_trace(seed):
    rng = np.random.default_rng(seed)
    _, phi, psi = st_pair(4, rng)
    sub = alg.tensor(alg.full_matrix_algebra(2), alg.scalars(2))
    full = en.relative_entropy(phi, psi)
    restricted = en.relative_entropy(phi.restrict(sub), psi.restrict(sub))
    a = oracles.partial_trace(phi.density, [2, 2], [0])
    b = oracles.partial_trace(psi.density, [2, 2], [0])
    assert restricted == pytest.approx(oracles.umegaki(a, b), abs=1e-8)
    assert restricted <= full + 1e-10


@given(seeds())
def test_tensor_split(seed):
    rng = np.random.default_rng(seed)
    M = alg.full_matrix_algebra(4)
    phi = alg.state(M, la.random_density(rng, 4))
    s1, s2 = la.random_density(rng, 2), la.random_density(rng, 2)
    p1 = oracles.partial_trace(phi.density, [2, 2], [0])
    p2 = oracles.partial_trace(phi.density, [2, 2], [1])
    lhs = en.relative_entropy(phi, alg.state(M, np.kron(s1, s2)))
    rhs = (oracles.umegaki(p1, s1) + oracles.umegaki(p2, s2)
           + en.relative_entropy(phi, alg.state(M, np.kron(p1, p2))))
    assert lhs == pytest.approx(rhs, abs=1e-8)


# -- von Neumann entropy ---------------------------------------------------

def test_entropy_examples():
    M2, M3 = alg.full_matrix_algebra(2), alg.full_matrix_algebra(3)
    assert en.von_neumann_entropy(alg.state(M2, np.diag([1.0, 0]))) == 0.0
    assert en.von_neumann_entropy(alg.state(M3, np.eye(3) / 3)) == pytest.approx(np.log(3), abs=1e-12)
    v = en.von_neumann_entropy(alg.state(M2, np.diag([0.75, 0.25])))
    assert v == pytest.approx(float(oracles.eta(np.array([0.75, 0.25])).sum()), abs=1e-12)
    assert v == pytest.approx(0.5623, abs=1e-4)


def test_entropy_needs_state():
    M = alg.full_matrix_algebra(2)
    with pytest.raises(DomainError):
        en.von_neumann_entropy(alg.functional(M, np.eye(2)))


def test_entropy_of_block_algebra_uses_block_weights(rng):
    # the algebra M_1 (x) 1_3 (+) M_2: a state with weights w, 1-w
    M = alg.FdAlgebra(5, ((1, 3), (2, 1)), np.eye(5))
    rho = M.random_state_density(rng)
    parts = [r for r in alg.functional(M, rho).block_densities()]
    spectrum = np.concatenate([np.linalg.eigvalsh(r) for r in parts])
    assert en.von_neumann_entropy(alg.state(M, rho)) == pytest.approx(
        float(oracles.eta(spectrum).sum()), abs=1e-12)


@given(seeds(), st.floats(0.0, 1.0))
def test_concavity_sandwich(seed, lam):
    rng = np.random.default_rng(seed)
    _, phi, om = st_pair(3, rng)
    S = en.von_neumann_entropy
    mid = S(lam * phi + (1 - lam) * om)
    low = lam * S(phi) + (1 - lam) * S(om)
    assert low - 1e-10 <= mid <= low + float(oracles.eta(np.array([lam, 1 - lam])).sum()) + 1e-10


@given(seeds())
def test_strong_subadditivity(seed):
    rng = np.random.default_rng(seed)
    rho = la.random_density(rng, 8)
    S = oracles.entropy
    dims = [2, 2, 2]
    s123 = S(rho)
    s2 = S(oracles.partial_trace(rho, dims, [1]))
    s12 = S(oracles.partial_trace(rho, dims, [0, 1]))
    s23 = S(oracles.partial_trace(rho, dims, [1, 2]))
    assert s123 + s2 <= s12 + s23 + 1e-10
    M = alg.full_matrix_algebra(8)
    assert en.von_neumann_entropy(alg.state(M, rho)) == pytest.approx(s123, abs=1e-10)


@given(seeds())
def test_tensor_additivity(seed):
    rng = np.random.default_rng(seed)
    a, b = la.random_density(rng, 2), la.random_density(rng, 3)
    S = lambda r: en.von_neumann_entropy(alg.state(alg.full_matrix_algebra(r.shape[0]), r))
    assert S(np.kron(a, b)) == pytest.approx(S(a) + S(b), abs=1e-10)


# -- decompositions --------------------------------------------------------

def test_trivial_decomposition(rng):
    _, phi, _ = st_pair(2, rng)
    assert en.entropy_decomposition_value(phi, [(1.0, phi)]) == pytest.approx(0.0, abs=1e-12)


def test_spectral_decomposition_attains_entropy():
    M = alg.full_matrix_algebra(2)
    phi = alg.state(M, np.diag([0.75, 0.25]))
    ens = en.spectral_ensemble(phi)
    assert en.entropy_decomposition_value(phi, ens) == pytest.approx(
        en.von_neumann_entropy(phi), abs=1e-10)


@pytest.mark.parametrize("seed", range(100))
def test_mixture_of_pure_states_below_entropy(seed):
    rng = np.random.default_rng(seed)
    M = alg.full_matrix_algebra(3)
    u, v = la.random_pure(rng, 3), la.random_pure(rng, 3)
    pu, pv = alg.state(M, np.outer(u, u.conj())), alg.state(M, np.outer(v, v.conj()))
    phi = 0.5 * pu + 0.5 * pv
    phi = alg.state(M, phi.density)
    val = en.entropy_decomposition_value(phi, [(0.5, pu), (0.5, pv)])
    assert val <= en.von_neumann_entropy(phi) + 1e-8


def test_bad_decomposition_rejected(rng):
    _, phi, psi = st_pair(2, rng)
    with pytest.raises(DecompositionError):
        en.entropy_decomposition_value(phi, [(1.0, psi)])
    with pytest.raises(DecompositionError):
        en.entropy_decomposition_value(phi, [(0.5, phi)])


# -- conditional entropy ---------------------------------------------------

def test_conditional_entropy_scalars_vanish(rng):
    _, phi, _ = st_pair(2, rng)
    res = en.conditional_entropy(phi, alg.scalars(2), K=2, R=2)
    assert res.value == pytest.approx(0.0, abs=1e-10)


def test_conditional_entropy_full_algebra(rng):
    M, phi, _ = st_pair(2, rng)
    res = en.conditional_entropy(phi, M, K=2, R=2)
    assert res.value == pytest.approx(en.von_neumann_entropy(phi), abs=1e-8)


def test_conditional_entropy_separable_witness(rng):
    A = alg.tensor(alg.full_matrix_algebra(2), alg.scalars(2))
    B = alg.full_matrix_algebra(4)
    a0, a1 = np.diag([1.0, 0]), np.diag([0, 1.0])
    b0, b1 = la.random_density(rng, 2), la.random_density(rng, 2)
    terms = [(0.3, alg.state(B, np.kron(a0, b0))), (0.7, alg.state(B, np.kron(a1, b1)))]
    omega = alg.state(B, sum(l * f.density for l, f in terms))
    res = en.conditional_entropy(omega, A, K=1, R=1, witnesses=[terms])
    s_a = oracles.entropy(oracles.partial_trace(omega.density, [2, 2], [0]))
    assert res.value == pytest.approx(s_a, abs=1e-6)


def test_conditional_entropy_monotone_in_budget(rng):
    A = alg.tensor(alg.full_matrix_algebra(2), alg.scalars(2))
    phi = alg.state(alg.full_matrix_algebra(4), la.random_density(rng, 4))
    small = en.conditional_entropy(phi, A, K=2, R=1).value
    large = en.conditional_entropy(phi, A, K=3, R=2).value
    assert large >= small - 1e-12
    assert large <= en.von_neumann_entropy(phi.restrict(A).normalized()) + 1e-8


def test_conditional_entropy_argument_checks(rng):
    _, phi, _ = st_pair(2, rng)
    with pytest.raises(DomainError):
        en.conditional_entropy(phi, alg.full_matrix_algebra(3))
    with pytest.raises(ParameterError):
        en.conditional_entropy(phi, alg.scalars(2), K=0)
