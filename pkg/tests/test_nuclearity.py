import numpy as np
import pytest
from scipy.optimize import minimize

from vnalab import _linalg as la
from vnalab import algebra as alg
from vnalab import nuclearity as nu
from vnalab.entanglement import mutual_information, relative_entanglement_upper
from vnalab.errors import (ParameterError, StaleDecompositionError, StandardnessError,
                           ValidityError)
from vnalab.harness import pipeline

import oracles

BELL = oracles.bell_vector()


@pytest.fixture(scope="module")
def tracial_pair():
    return nu.doubled_split_pair(np.eye(4) / 4, 2, 2)


@pytest.fixture(scope="module")
def random_pair():
    rng = np.random.default_rng(7)
    return nu.doubled_split_pair(la.random_density(rng, 4), 2, 2)


def near_bell(eps=0.05):
    return (1 - eps) * np.outer(BELL, BELL.conj()) + eps * np.eye(4) / 4


# -- split pairs -----------------------------------------------------------

def test_doubled_pair_needs_faithful_density():
    with pytest.raises(StandardnessError):
        nu.doubled_split_pair(np.diag([1.0, 0, 0, 0]), 2, 2)
    with pytest.raises(ParameterError):
        nu.doubled_split_pair(np.eye(3) / 3, 2, 2)


def test_minimal_pair_needs_full_schmidt_rank():
    with pytest.raises(StandardnessError):
        nu.minimal_split_pair(np.kron([1.0, 0], [1.0, 0]))
    sp = nu.minimal_split_pair(BELL)
    assert sp.model == "minimal" and sp.dim == 4


def test_schmidt_vector_normalised():
    v = nu.schmidt_vector([1.0, 3.0])
    assert np.allclose(np.linalg.norm(v), 1.0)
    assert np.allclose(np.diag(v) ** 2, [0.25, 0.75])


# -- Xi maps ---------------------------------------------------------------

def test_xi_tracial_is_isometric_up_to_scale():
    # maximally entangled vector: tracial on A, so the modular operator is 1
    theta = nu.xi_map(nu.minimal_split_pair(BELL), "A")
    gram = la.dag(theta.matrix) @ theta.matrix
    assert np.allclose(gram, gram[0, 0] * np.eye(gram.shape[0]), atol=1e-10)


def test_xi_of_unit(random_pair):
    sp = random_pair
    theta = nu.xi_map(sp, "A")
    quarter = sp.modular_B_prime.delta_power(0.25)
    assert np.allclose(theta(sp.A.identity), quarter @ sp.omega, atol=1e-10)


def test_xi_product_state_is_rank_one(rng):
    # product states: Xi_A(a) = omega_A(a) Omega, so the bound is exactly 1
    rho = np.kron(la.random_density(rng, 2), la.random_density(rng, 2))
    sp = nu.doubled_split_pair(rho, 2, 2)
    theta = nu.xi_map(sp, "A")
    wa = sp.state.restrict(sp.A)
    assert theta.rank == 1
    assert np.allclose(theta.matrix, np.outer(sp.omega, [wa(b) for b in sp.A.basis]), atol=1e-10)
    assert nu.pnorm_upper(theta, 0.5)[0] == pytest.approx(1.0, abs=1e-10)


def test_xi_matches_direct_formula(rng):
    # (M_2 (x) M_2) (x) 1 on a 16-dimensional space, entangled full-rank vector
    psi = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    sp = nu.minimal_split_pair(psi)
    Bp = oracles.commutant_basis(list(sp.B.basis))
    delta = oracles.modular_operator(Bp, sp.omega)
    quarter = oracles.fractional_power(la.herm(delta), 0.25)
    theta = nu.xi_map(sp, "A")
    for k, b in enumerate(sp.A.basis):
        assert np.allclose(theta.matrix[:, k], quarter @ b @ sp.omega, atol=1e-9)


def test_xi_side_validation(tracial_pair):
    with pytest.raises(ParameterError):
        nu.xi_map(tracial_pair, "C")


# -- p-norm upper bounds ---------------------------------------------------

def test_rank_one_map(rng):
    M = alg.full_matrix_algebra(2)
    e = alg.functional(M, M.random_element(rng))
    f = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    theta = nu.AlgebraMap(M, np.outer(f, [e(b) for b in M.basis]))
    for p in (0.3, 1.0):
        bound, dec = nu.pnorm_upper(theta, p)
        assert bound == pytest.approx(e.norm * np.linalg.norm(f), rel=1e-12)
        assert len(dec.terms) == 1


def test_zero_map():
    M = alg.full_matrix_algebra(2)
    bound, dec = nu.pnorm_upper(nu.AlgebraMap(M, np.zeros((3, 4))), 0.5)
    assert bound == 0.0 and dec.terms == ()


@pytest.mark.parametrize("p", [0.0, -0.5, 1.5])
def test_exponent_domain(p, tracial_pair):
    with pytest.raises(ParameterError):
        nu.pnorm_upper(nu.xi_map(tracial_pair), p)


def test_unknown_strategy(tracial_pair):
    with pytest.raises(ParameterError):
        nu.pnorm_upper(nu.xi_map(tracial_pair), 0.5, "exhaustive")


def _mixing_oracle(theta, restarts, rng):
    """Cheapest 1-norm cost over decompositions with dim(M) terms, searched
    by random restarts over the mixing matrix applied to unit coordinates."""
    M = theta.source
    r = M.dim
    best = np.inf

    def cost(x):
        T = np.eye(r) + (x[:r * r] + 1j * x[r * r:]).reshape(r, r)
        if np.linalg.cond(T) > 1e6:
            return 1e9
        E = T  # rows: coefficient functionals T[i] @ coords
        F = theta.matrix @ np.linalg.inv(T)
        total = 0.0
        for i in range(r):
            dens = np.tensordot(E[i], M.basis.conj().transpose(0, 2, 1), axes=1)
            total += la.trace_norm(dens) * np.linalg.norm(F[:, i])
        return total

    for k in range(restarts):
        x0 = 0.3 * rng.standard_normal(2 * r * r) if k else np.zeros(2 * r * r)
        res = minimize(cost, x0, method="L-BFGS-B")
        best = min(best, res.fun)
    return best


@pytest.mark.parametrize("seed", range(2))
def test_rank_three_map_against_search_oracle(seed):
    rng = np.random.default_rng(seed)
    M = alg.full_matrix_algebra(2)
    theta = nu.AlgebraMap(M, (rng.standard_normal((3, 3)) @ rng.standard_normal((3, 4))).astype(complex))
    assert theta.rank == 3
    bound, dec = nu.pnorm_upper(theta, 1.0, "greedy")
    assert dec.residual(theta) <= 1e-9
    oracle = _mixing_oracle(theta, 2, rng)
    assert bound <= 1.05 * oracle
    # true lower bound: sup over unitaries (extreme points of the ball) of |Theta u|
    low = max(np.linalg.norm(theta(la.random_unitary(rng, 2))) for _ in range(500))
    assert low <= bound + 1e-12


def test_greedy_never_worse(random_pair):
    theta = nu.xi_map(random_pair)
    for p in (0.5, 1.0):
        svd, _ = nu.pnorm_upper(theta, p, "svd")
        greedy, dec = nu.pnorm_upper(theta, p, "greedy")
        assert greedy <= svd + 1e-12
        assert dec.residual(theta) <= 1e-9


def test_partition_function_monotone_in_p(random_pair):
    z_half = nu.partition_function_upper(random_pair, 0.5)
    z_one = nu.partition_function_upper(random_pair, 1.0)
    assert z_half >= z_one - 1e-12
    _, dec = nu.pnorm_upper(nu.xi_map(random_pair), 1.0)
    assert dec.bound(0.5) >= dec.bound(1.0) - 1e-12


def test_partition_function_tracial_is_finite(tracial_pair):
    z = nu.partition_function_upper(tracial_pair, 1.0)
    assert 1.0 - 1e-12 <= z < np.inf


def test_product_state_unit_decomposition(rng):
    rho = np.kron(la.random_density(rng, 2), la.random_density(rng, 2))
    sp = nu.doubled_split_pair(rho, 2, 2)
    theta = nu.xi_map(sp)
    M = sp.A
    terms = []
    for k in range(M.dim):
        row = np.zeros(M.dim)
        row[k] = 1.0
        dens = np.tensordot(row, M.basis.conj().transpose(0, 2, 1), axes=1)
        terms.append((alg.functional(M, dens), theta.matrix[:, k]))
    explicit = nu.NuclearDecomposition(M, terms, 1.0)
    assert explicit.residual(theta) <= 1e-10
    bound, _ = nu.pnorm_upper(theta, 1.0)
    assert bound <= explicit.bound() + 1e-12


# -- product decomposition and the chain -----------------------------------

def test_hs3_product_state_terms_proportional(rng):
    wa, wb = la.random_density(rng, 2), la.random_density(rng, 2)
    sp = nu.doubled_split_pair(np.kron(wa, wb), 2, 2)
    _, dec = nu.pnorm_upper(nu.xi_map(sp), 1.0)
    pdec = nu.hs3_product_decomposition(sp, dec)
    omega_b = sp.state.restrict(sp.B)
    for _, psi in pdec.terms:
        c = np.vdot(omega_b.density, psi.density) / np.vdot(omega_b.density, omega_b.density)
        assert np.allclose(psi.density, c * omega_b.density, atol=1e-9)


@pytest.mark.parametrize("p", [0.25, 0.5, 1.0])
def test_hs3_bell_all_basis_pairs(p):
    sp = nu.minimal_split_pair(BELL)
    _, dec = nu.pnorm_upper(nu.xi_map(sp), p)
    pdec = nu.hs3_product_decomposition(sp, dec)
    vals = pdec.values()
    assert vals.shape == (4, 4)
    target = sp.system.values(sp.state.density).reshape(4, 4)
    assert np.max(np.abs(vals - target)) <= 1e-8
    for (e, f), (_, psi) in zip(dec.terms, pdec.terms):
        assert psi.norm <= np.linalg.norm(f) + 1e-10
    assert pdec.cost(p) <= dec.cost(p) + 1e-10


def test_hs3_rejects_stale_decomposition(tracial_pair, random_pair):
    _, dec = nu.pnorm_upper(nu.xi_map(tracial_pair), 1.0)
    with pytest.raises(StaleDecompositionError):
        nu.hs3_product_decomposition(random_pair, dec)


def test_four_split_positive_product_has_no_negative_part(rng):
    wa, wb = la.random_density(rng, 2), la.random_density(rng, 2)
    sp = nu.doubled_split_pair(np.kron(wa, wb), 2, 2)
    om = sp.state
    pdec = nu.ProductDecomposition(sp.system, [om.restrict(sp.A), om.restrict(sp.B)] and
                                   [(om.restrict(sp.A), om.restrict(sp.B))])
    assert pdec.residual(om) <= 1e-10
    split = nu.four_split(pdec)
    assert split.lam <= 1e-12
    assert split.residual(om) <= 1e-10
    dom = nu.dominating_separable(pdec, om)
    assert np.allclose(dom.ensemble.density(), om.density, atol=1e-10)
    assert dom.norm == pytest.approx(1.0, abs=1e-12)


def _chain(sp, p):
    _, dec = nu.pnorm_upper(nu.xi_map(sp), p)
    pdec = nu.hs3_product_decomposition(sp, dec)
    return dec, pdec, nu.four_split(pdec), nu.dominating_separable(pdec, sp.state)


@pytest.mark.parametrize("seed", range(8))
def test_chain_inequalities(seed):
    rng = np.random.default_rng(seed)
    b = 2 if seed % 2 == 0 else 3
    sp = nu.doubled_split_pair(la.random_density(rng, 2 * b), 2, b)
    e_i = mutual_information(sp.system, sp.state)
    for p in (0.25, 0.5, 0.75):
        dec, pdec, split, dom = _chain(sp, p)
        mu = dec.cost(p)
        assert split.residual(sp.state) <= 1e-8
        assert (1 + split.lam) ** p <= 4 * mu + 1e-9
        assert dom.min_eig >= -1e-10
        assert dom.norm ** p <= mu + 1e-9
        assert dom.norm == pytest.approx(sum(f.norm * g.norm for f, g in pdec.terms), rel=1e-10)
        assert mu >= 1.0 - 1e-9
        assert e_i <= nu.mutual_information_bound(mu ** (1 / p), p) + 1e-9


def test_bell_dominating_separable():
    sp = nu.minimal_split_pair(BELL)
    *_, dom = _chain(sp, 0.5)
    assert dom.min_eig >= -1e-10
    assert dom.norm >= 1.0 - 1e-12


def test_relative_entanglement_below_log_sigma_norm(random_pair):
    sp = random_pair
    *_, dom = _chain(sp, 1.0)
    witness = nu.sigma_relative_entropy_witness(dom)
    er = relative_entanglement_upper(sp.system, sp.state, K=1, R=0, warm_starts=[witness])
    assert er.value <= np.log(dom.norm) + 1e-6


# -- scalar bounds ---------------------------------------------------------

def test_mutual_information_bound_at_one():
    assert nu.c_p(0.5) == pytest.approx(2 / np.e, abs=1e-15)
    assert nu.mutual_information_bound(1.0, 0.5) == pytest.approx(2 / np.e, abs=1e-15)


@pytest.mark.parametrize("p", [0.25, 0.5, 0.75])
def test_mutual_information_bound_monotone(p):
    zs = np.linspace(1, 10, 200)
    vals = [nu.mutual_information_bound(z, p) for z in zs]
    assert np.all(np.diff(vals) >= -1e-12)
    assert nu.mutual_information_bound(1.5, p) <= nu.mutual_information_bound(2.0, p)


def test_scalar_bound_domains():
    with pytest.raises(ParameterError):
        nu.mutual_information_bound(0.9, 0.5)
    with pytest.raises(ParameterError):
        nu.mutual_information_bound(2.0, 1.0)
    with pytest.raises(ParameterError):
        nu.otani_bound(2.0, 0.0)
    assert nu.otani_bound(1.0, 0.5) == pytest.approx(2 / np.e)


def test_end_to_end_bell_bound():
    sp = nu.doubled_split_pair(near_bell(), 2, 2)
    z = nu.partition_function_upper(sp, 0.5)
    assert mutual_information(sp.system, sp.state) <= nu.mutual_information_bound(z, 0.5)


# -- intermediate entropy --------------------------------------------------

def _two_qubits():
    A = alg.tensor(alg.full_matrix_algebra(2), alg.scalars(2))
    return A, alg.full_matrix_algebra(4)


def test_intermediate_product_candidate_is_zero():
    A, full = _two_qubits()
    omega = np.diag([1.0, 0, 0, 0])
    res = nu.intermediate_entropy_eval(A, omega, [(omega, 1.0)], full)
    assert res.value == pytest.approx(0.0, abs=1e-12) and res.index == 0


def test_intermediate_selects_minimum_and_rejects_non_dominating():
    A, full = _two_qubits()
    omega = np.diag([1.0, 0, 0, 0])
    mixed = np.eye(4) / 4
    res = nu.intermediate_entropy_eval(A, omega, [(mixed, 0.25), (mixed, 1.0), (omega, 1.0)], full)
    assert res.index == 2 and res.value == pytest.approx(0.0, abs=1e-12)
    assert [i for i, _ in res.rejected] == [1]
    only = nu.intermediate_entropy_eval(A, omega, [(mixed, 0.25)], full)
    assert only.value == pytest.approx(4 * np.log(2), abs=1e-12)


def test_intermediate_needs_factor_and_domination():
    _, full = _two_qubits()
    diag = alg.algebra_from_generators([np.diag([1.0, 0, 0, 0])])
    omega = np.diag([1.0, 0, 0, 0])
    with pytest.raises(ValidityError):
        nu.intermediate_entropy_eval(diag, omega, [(omega, 1.0)], full)
    A, _ = _two_qubits()
    with pytest.raises(ValidityError):
        nu.intermediate_entropy_eval(A, omega, [(np.eye(4) / 4, 1.0)], full)
    with pytest.raises(ParameterError):
        nu.intermediate_entropy_eval(A, omega, [(omega, 0.0)], full)


def test_near_bell_witness_below_bound():
    sp = nu.doubled_split_pair(near_bell(), 2, 2)
    record, checks = pipeline.certify(sp, (0.5,))
    assert record["witness"]
    names = [c.check_id for c in checks]
    assert "intermediate-entropy-bound@p=0.5" in names
    assert all(c.passed(None) for c in checks)
