import numpy as np
import pytest

from vnalab import _linalg as la
from vnalab import algebra as alg
from vnalab import nuclearity as nu
from vnalab import splitinc as si
from vnalab.errors import NoExpectationError, ScopeError, SupportError

import oracles

LN2 = np.log(2)


def diagonal(n):
    return alg.algebra_from_generators([np.diag(np.eye(n)[k]) for k in range(n)])


def m(n):
    return alg.full_matrix_algebra(n)


# -- Takesaki criterion ----------------------------------------------------

def test_tracial_state_always_admits_expectation(rng):
    M = m(3)
    u = la.random_unitary(rng, 3)
    N = alg.conjugate_algebra(diagonal(3), u)
    assert si.takesaki_check(N, M, alg.state(M, np.eye(3) / 3))


def test_diagonal_state_preserves_diagonal():
    M = m(2)
    assert si.takesaki_check(diagonal(2), M, alg.state(M, np.diag([0.7, 0.3])))


def test_off_diagonal_state_moves_diagonal():
    M = m(2)
    rho = np.array([[0.6, 0.2], [0.2, 0.4]])
    rep = si.takesaki_report(diagonal(2), M, alg.state(M, rho))
    assert not rep.holds and rep.residual > 1e-6


def test_takesaki_needs_faithful_state():
    M = m(2)
    with pytest.raises(SupportError):
        si.takesaki_check(diagonal(2), M, alg.state(M, np.diag([1.0, 0.0])))


# -- conditional expectations ---------------------------------------------

def test_expectation_onto_everything_is_identity(rng):
    M = m(2)
    eps = si.conditional_expectation(M, M, alg.state(M, la.random_density(rng, 2)))
    assert np.allclose(eps.matrix(), np.eye(4), atol=1e-9)


def test_expectation_onto_scalars_is_state(rng):
    M = m(3)
    phi = alg.state(M, la.random_density(rng, 3))
    eps = si.conditional_expectation(alg.scalars(3), M, phi)
    x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    assert np.allclose(eps(x), phi(x) * np.eye(3), atol=1e-9)


def test_expectation_onto_diagonal_is_pinching():
    M = m(2)
    eps = si.conditional_expectation(diagonal(2), M, alg.state(M, np.diag([0.8, 0.2])))
    for i in range(2):
        for j in range(2):
            e = np.zeros((2, 2))
            e[i, j] = 1.0
            assert np.allclose(eps(e), np.diag(np.diag(e)), atol=1e-9)


@pytest.mark.parametrize("seed", range(4))
def test_expectation_properties(seed):
    rng = np.random.default_rng(seed)
    # M_2 (x) 1 inside M_4 with a product state: preserved by its modular group
    M = m(4)
    N = alg.tensor(m(2), alg.scalars(2))
    phi = alg.state(M, np.kron(la.random_density(rng, 2), la.random_density(rng, 2)))
    eps = si.conditional_expectation(N, M, phi)
    for name, r in eps.checks(seed=seed).items():
        assert r <= 1e-9, name


def test_missing_expectation_reported():
    M = m(2)
    rho = np.array([[0.6, 0.2], [0.2, 0.4]])
    with pytest.raises(NoExpectationError):
        si.conditional_expectation(diagonal(2), M, alg.state(M, rho))


# -- Jones structure -------------------------------------------------------

def test_jones_trivial_inclusion(rng):
    M = m(2)
    eps = si.conditional_expectation(M, M, alg.state(M, la.random_density(rng, 2)))
    assert np.allclose(eps.e, np.eye(4), atol=1e-10)
    rep = si.verify_jones_structure(eps, cone_samples=10)
    assert rep.ok, rep.residuals


def test_jones_diagonal_tracial():
    M = m(2)
    eps = si.conditional_expectation(diagonal(2), M, alg.state(M, np.eye(2) / 2))
    rep = si.verify_jones_structure(eps, cone_samples=50)
    assert rep.ok, rep.residuals
    assert rep.residuals["cone_image"] <= 1e-9 and rep.residuals["cone_preimage"] <= 1e-9
    assert rep.residuals["uniqueness"] <= 1e-9


def test_jones_two_block_inclusion(rng):
    M = alg.FdAlgebra(5, ((2, 1), (1, 3)), np.eye(5))
    N = alg.algebra_from_generators([M.block_projections()[0], M.block_projections()[1]])
    eps = si.conditional_expectation(N, M, alg.state(M, M.random_state_density(rng)))
    rep = si.verify_jones_structure(eps, cone_samples=20, seed=3)
    assert rep.ok, rep.residuals


# -- standard implementation and canonical factor --------------------------

@pytest.fixture(scope="module")
def entangled_pair():
    rng = np.random.default_rng(11)
    return nu.doubled_split_pair(la.random_density(rng, 4), 2, 2)


@pytest.fixture(scope="module")
def entangled_factor(entangled_pair):
    return si.canonical_factor(entangled_pair)


def test_implementation_of_product_state(rng):
    rho = np.kron(la.random_density(rng, 2), la.random_density(rng, 2))
    sp = nu.doubled_split_pair(rho, 2, 2)
    impl = si.standard_implementation(sp)
    assert impl.is_unitary
    assert impl.isometry_residual() <= 1e-9
    product = np.kron(impl.sf_A.omega, impl.sf_B.omega)
    assert np.allclose(impl.U @ sp.omega, product, atol=1e-9)
    assert np.allclose(impl.xi, product, atol=1e-9)


def test_implementation_of_entangled_state(entangled_factor):
    impl = entangled_factor.impl
    assert impl.isometry_residual() <= 1e-9
    assert impl.intertwining_residual() <= 1e-9
    assert impl.cone_residual(samples=20) <= 1e-9
    assert impl.j_residual() <= 1e-8


def test_canonical_factor_structure(entangled_factor):
    cf = entangled_factor
    assert cf.F.is_factor and cf.F.center_dim == 1
    for name, r in cf.checks().items():
        if name == "factor":
            assert r
        else:
            assert r <= 1e-9, name


def _legs_algebra(dims, legs):
    """Full matrix algebra on the listed tensor legs, identity elsewhere."""
    n = int(np.prod(dims))
    rest = [i for i in range(len(dims)) if i not in legs]
    order = list(legs) + rest
    k = int(np.prod([dims[i] for i in legs]))
    perm = np.arange(n).reshape(dims).transpose(order).reshape(-1)
    P = np.eye(n)[:, perm]
    return alg.FdAlgebra(n, ((k, n // k),), P)


def test_canonical_factor_of_product_state(rng):
    rho = np.kron(la.random_density(rng, 2), la.random_density(rng, 2))
    sp = nu.doubled_split_pair(rho, 2, 2)
    cf = si.canonical_factor(sp)
    # K = C^a (x) C^b (x) C^a (x) C^b; F acts on the two A legs
    target = _legs_algebra((2, 2, 2, 2), [0, 2])
    assert cf.F.same_as(target)
    assert si.canonical_entanglement_entropy(sp, cf).value == pytest.approx(0.0, abs=1e-9)


def test_canonical_entropy_symmetry(entangled_pair, entangled_factor):
    ce = si.canonical_entanglement_entropy(entangled_pair, entangled_factor)
    assert ce.value == pytest.approx(ce.value_prime, abs=1e-8)
    assert ce.remark_holds
    assert ce.mutual_information <= 2 * ce.value + 1e-8


def test_canonical_entropy_bell():
    ce = si.canonical_entanglement_entropy(nu.minimal_split_pair(oracles.bell_vector()))
    assert ce.value == pytest.approx(LN2, abs=1e-8)
    assert ce.mutual_information == pytest.approx(2 * LN2, abs=1e-9)


def test_canonical_entropy_additive(rng):
    p1 = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    p2 = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    e1 = si.canonical_entanglement_entropy(nu.minimal_split_pair(p1)).value
    e2 = si.canonical_entanglement_entropy(nu.minimal_split_pair(p2)).value
    both = si.canonical_entanglement_entropy(nu.minimal_split_pair(np.kron(p1, p2))).value
    assert both == pytest.approx(e1 + e2, abs=1e-8)


def test_canonical_entropy_scope(entangled_pair, entangled_factor):
    bogus = si.CanonicalFactor(entangled_pair.A, entangled_pair.A, entangled_factor.impl)
    with pytest.raises(ScopeError):
        si.canonical_entanglement_entropy(entangled_pair, bogus)


def test_dominating_witness_restricts_to_ensemble(entangled_pair, entangled_factor):
    from vnalab.entanglement import ensemble_from_tensor
    sp = entangled_pair
    rng = np.random.default_rng(5)
    ens = ensemble_from_tensor(sp.system, [(0.4, la.random_density(rng, 2), la.random_density(rng, 2)),
                                           (0.6, la.random_density(rng, 2), la.random_density(rng, 2))])
    R = si.dominating_witness(entangled_factor.impl, ens)
    joint = sp.system.joint
    assert np.allclose(joint.expectation(R), joint.expectation(ens.density()), atol=1e-9)
