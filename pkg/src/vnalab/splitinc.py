"""State-preserving conditional expectations via the Jones projection, the
standard implementation of a split pair, the canonical intermediate type I
factor and the canonical entanglement entropy."""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _linalg as la
from .algebra import (
    FdAlgebra,
    algebra_from_generators,
    check_commuting,
    commutant,
    equality_residual,
    functional,
    inclusion_residual,
    intersection,
    join,
    tensor,
)
from .entropy import von_neumann_entropy
from .errors import (
    DomainError,
    NoExpectationError,
    ScopeError,
    StandardnessError,
    ValidityError,
)
from .modular import (
    StandardForm,
    antilinear_sandwich,
    gns,
    natural_cone_vector,
    standard_form,
    tomita,
)

CHECK_TOL = 1e-9
TAKESAKI_TIMES = (0.1, 1.0)


# ---------------------------------------------------------------------------
# Takesaki criterion and conditional expectations


@dataclass(frozen=True)
class TakesakiReport:
    holds: bool
    residual: float
    witness: int  # index of the worst basis element of N


def takesaki_report(N, M, phi, tol=CHECK_TOL):
    """Worst distance from ``N`` of ``[log Delta, n]`` and of
    ``Delta^{it} n Delta^{-it}`` over a basis of ``N``."""
    if inclusion_residual(N, M) > 1e-9:
        raise DomainError("N is not contained in M")
    sf = gns(M, phi)
    log_delta = la.psd_log(sf.delta)
    units = [sf.delta_power(1j * t) for t in TAKESAKI_TIMES]
    worst, where = 0.0, -1
    for k, n in enumerate(N.basis):
        r = sf.rep(n)
        imgs = [log_delta @ r - r @ log_delta]
        imgs += [u @ r @ la.dag(u) for u in units]
        for img in imgs:
            x = sf.pullback(img)
            d = N.distance(x)
            if d > worst:
                worst, where = d, k
    return TakesakiReport(bool(worst <= tol), float(worst), where)


def takesaki_check(N, M, phi, tol=CHECK_TOL):
    """True iff the modular group of ``phi`` leaves ``N`` globally invariant."""
    return takesaki_report(N, M, phi, tol).holds


@dataclass(frozen=True, eq=False)
class ConditionalExpectation:
    """``phi``-preserving conditional expectation of ``M`` onto ``N``."""

    N: FdAlgebra
    M: FdAlgebra
    phi: object
    sf: StandardForm
    e: np.ndarray          # Jones projection on the GNS space
    _solve: np.ndarray = field(repr=False)

    def __call__(self, x):
        v = self.e @ (self.sf.rep(x) @ self.sf.omega)
        return self.N.from_coordinates(self._solve @ v)

    def matrix(self):
        """Matrix of the map in the basis of ``M`` (columns images)."""
        return np.array([self.M.coordinates(self(b)) for b in self.M.basis]).T

    def checks(self, samples=8, seed=0):
        """Residuals of unitality, idempotence, bimodularity, invariance and
        positivity on basis elements and seeded samples."""
        M, N = self.M, self.N
        rng = np.random.default_rng(seed)
        out = {"unital": float(np.linalg.norm(self(M.identity) - M.identity))}
        out["range"] = max(N.distance(self(b)) for b in M.basis)
        out["idempotent"] = max(float(np.linalg.norm(self(self(b)) - self(b)))
                                for b in M.basis)
        out["invariance"] = max(abs(self.phi(self(b)) - self.phi(b)) for b in M.basis)
        bim, pos = 0.0, 0.0
        for _ in range(samples):
            x = M.random_element(rng)
            n1, n2 = N.random_element(rng), N.random_element(rng)
            bim = max(bim, float(np.linalg.norm(self(n1 @ x @ n2) - n1 @ self(x) @ n2)))
            y = self(x @ la.dag(x))
            pos = max(pos, -float(np.linalg.eigvalsh(la.herm(y)).min()))
        out["bimodular"] = bim
        out["positive"] = max(pos, 0.0)
        return out


def _represented(sf, sub):
    """``pi(sub)`` as a concrete algebra on the GNS space."""
    return algebra_from_generators([sf.rep(b) for b in sub.basis])


def conditional_expectation(N, M, phi, tol=CHECK_TOL):
    """Expectation built from the Jones projection onto ``[N Omega]``.

    Raises :class:`NoExpectationError` when the modular group of ``phi`` does
    not preserve ``N``.
    """
    rep = takesaki_report(N, M, phi, tol)
    if not rep.holds:
        raise NoExpectationError(
            f"modular group moves N (commutator residual {rep.residual:.2e} "
            f"at basis element {rep.witness})", rep.residual)
    sf = gns(M, phi)
    V = np.array([sf.rep(n) @ sf.omega for n in N.basis]).T
    e = la.subspace_projector(V)
    return ConditionalExpectation(N, M, phi, sf, e, np.linalg.pinv(V))


@dataclass(frozen=True)
class JonesReport:
    items: dict
    residuals: dict

    @property
    def ok(self):
        return all(self.items.values())


def verify_jones_structure(eps, cone_samples=50, seed=0, tol=CHECK_TOL):
    """Check the Jones-projection identities for a conditional expectation.

    Items: ``vector`` and ``corner`` identities, corner algebra
    ``pi(N) e = e (pi(M) v e) e``, ``pi(N)' = pi(M)' v e``, injectivity of
    ``n -> pi(n) e``, uniqueness of ``e`` and the cone correspondence.
    """
    sf, e, N, M = eps.sf, eps.e, eps.N, eps.M
    omega = sf.omega
    res = {}
    res["vector"] = max(float(np.linalg.norm(e @ sf.rep(x) @ omega -
                                             sf.rep(eps(x)) @ omega)) for x in M.basis)
    res["corner"] = max(float(np.linalg.norm(e @ sf.rep(x) @ e - sf.rep(eps(x)) @ e))
                        for x in M.basis)
    # uniqueness: the projection determined by e x Omega = eps(x) Omega
    X = np.array([sf.rep(x) @ omega for x in M.basis]).T
    Y = np.array([sf.rep(eps(x)) @ omega for x in M.basis]).T
    res["uniqueness"] = float(np.linalg.norm(Y @ np.linalg.inv(X) - e))

    piN = _represented(sf, N)
    piM = sf.algebra
    basic = algebra_from_generators(list(piM.basis) + [e])
    left = np.array([(b @ e).reshape(-1) for b in piN.basis]).T
    right = np.array([(e @ b @ e).reshape(-1) for b in basic.basis]).T
    res["corner_algebra"] = _subspace_gap(left, right)
    gen = join(commutant(piM), algebra_from_generators([e]))
    res["commutant"] = equality_residual(commutant(piN), gen)
    s = np.linalg.svd(left, compute_uv=False)
    res["injective_smin"] = float(s.min())

    cone_m, cone_n = _cone_checks(sf, e, piN, cone_samples, seed)
    res["cone_image"] = cone_m
    res["cone_preimage"] = cone_n
    items = {
        "i": res["vector"] <= tol and res["corner"] <= tol,
        "ii": res["corner_algebra"] <= tol,
        "iii": res["commutant"] <= tol,
        "iv": res["injective_smin"] > 1e-9,
        "unique": res["uniqueness"] <= tol,
        "cone": cone_m <= tol and cone_n <= tol,
    }
    return JonesReport(items, res)


def _subspace_gap(a, b):
    qa, qb = la.orthonormal_columns(a), la.orthonormal_columns(b)
    if qa.shape[1] != qb.shape[1]:
        return float("inf")
    return float(np.linalg.norm(qa @ la.dag(qa) - qb @ la.dag(qb)))


def _cone_checks(sf, e, piN, samples, seed):
    """Worst cone-membership defect of ``e v`` (``v`` in the cone of ``M``)
    and of cone vectors of ``N`` viewed in the cone of ``M``."""
    q = la.orthonormal_columns(e)
    N_e = algebra_from_generators([la.dag(q) @ b @ q for b in piN.basis])
    sf_n = standard_form(N_e, la.dag(q) @ sf.omega)
    rng = np.random.default_rng(seed)
    quarter_m = la.psd_power(sf.delta, 0.25)
    quarter_n = la.psd_power(sf_n.delta, 0.25)
    worst_img, worst_pre = 0.0, 0.0
    for _ in range(samples):
        x = sf.algebra.random_element(rng)
        v = quarter_m @ (la.dag(x) @ x @ sf.omega)
        w = la.dag(q) @ (e @ v)
        worst_img = max(worst_img, _cone_defect(sf_n, w))
        y = N_e.random_element(rng)
        u = q @ (quarter_n @ (la.dag(y) @ y @ sf_n.omega))
        worst_pre = max(worst_pre, _cone_defect(sf, u))
    return worst_img, worst_pre


def _cone_defect(sf, v):
    """Distance of ``v`` from the cone representative of its vector state."""
    v = np.asarray(v, dtype=complex)
    nv = np.linalg.norm(v)
    if nv == 0:
        return 0.0
    w = natural_cone_vector(sf, sf.vector_functional(v))
    return float(np.linalg.norm(v - w)) / max(1.0, nv)


# ---------------------------------------------------------------------------
# standard implementation and canonical factor


@dataclass(frozen=True, eq=False)
class StandardImplementation:
    """``U x Omega = (pi_A (x) pi_B)(x) xi`` with ``xi`` the cone vector of the
    transported state in ``K_A (x) K_B``."""

    pair: object
    U: np.ndarray
    sf_A: StandardForm
    sf_B: StandardForm
    sf_T: StandardForm
    xi: np.ndarray
    rep_unit_A: np.ndarray
    rep_unit_B: np.ndarray

    def pi(self, x):
        """Image of ``x`` in ``A v B`` on ``K_A (x) K_B``."""
        c = self.pair.system.tensor_coefficients(x)
        return np.einsum("ij,iab,jcd->acbd", c, self.rep_unit_A, self.rep_unit_B, optimize=True
                         ).reshape(self.space_dims[0] * self.space_dims[1], -1)

    @property
    def space_dims(self):
        return self.sf_A.space_dim, self.sf_B.space_dim

    @property
    def is_unitary(self):
        return self.U.shape[0] == self.U.shape[1]

    def isometry_residual(self):
        return float(np.linalg.norm(la.dag(self.U) @ self.U - np.eye(self.U.shape[1])))

    def intertwining_residual(self):
        sp = self.pair
        return max(float(np.linalg.norm(self.U @ x - self.pi(x) @ self.U))
                   for x in sp.system.joint.basis)

    @cached_property
    def joint_modular(self):
        return tomita(self.pair.system.joint, self.pair.omega, self.pair.omega)

    @property
    def joint_standard(self):
        """Whether ``Omega`` is also cyclic for the commutant of ``A v B``."""
        return self.pair.system.joint.dim == self.pair.dim ** 2 or \
            _separating(self.pair.system.joint, self.pair.omega)

    def j_residual(self):
        """``U J U^* = J_A (x) J_B`` (linear factors)."""
        if not self.is_unitary:
            return float("nan")
        J = self.joint_modular.J
        lhs = self.U @ J @ self.U.T
        rhs = np.kron(self.sf_A.J, self.sf_B.J)
        return float(np.linalg.norm(lhs - rhs))

    def cone_residual(self, samples=20, seed=0):
        """Worst defect of ``U v`` in the product cone for sampled cone vectors
        ``v = Delta^{1/4} x^* x Omega`` of ``(A v B, Omega)``."""
        rng = np.random.default_rng(seed)
        quarter = self.joint_modular.delta_power(0.25)
        joint = self.pair.system.joint
        worst = 0.0
        for _ in range(samples):
            x = joint.random_element(rng)
            v = quarter @ (la.dag(x) @ x @ self.pair.omega)
            w = self.U @ v
            worst = max(worst, _cone_defect(self.sf_T, w))
        return worst


def _separating(M, v):
    cols = np.array([b @ v for b in M.basis]).T
    s = np.linalg.svd(cols, compute_uv=False)
    return s[-1] > 1e-10 * max(1.0, s[0])


def _frame_standard_form(system, side, f):
    fa = system.frames[0 if side == "A" else 1][0]
    phi = functional(fa, system.abstract_density(f), "state")
    sf = gns(fa, phi)
    units = system.frames[0 if side == "A" else 1][1]
    return sf, np.array([sf.rep(u) for u in units])


def _tensor_standard_form(system, sf_A, sf_B, ua, ub):
    (fa, _, _), (fb, _, _) = system.frames
    T = tensor(fa, fb)
    units, _ = system.tensor_units
    na, nb = len(ua), len(ub)

    def rep(y):
        c = np.einsum("kab,ab->k", units.conj(), y).reshape(na, nb)
        return np.einsum("ij,iab,jcd->acbd", c, ua, ub, optimize=True).reshape(
            sf_A.space_dim * sf_B.space_dim, -1)

    images = np.array([rep(b) for b in T.basis])
    return StandardForm(T, tensor(sf_A.algebra, sf_B.algebra), images,
                        np.kron(sf_A.omega, sf_B.omega),
                        np.kron(sf_A.J, sf_B.J), np.kron(sf_A.delta, sf_B.delta))


def standard_implementation(sp):
    """Cone-preserving implementation of ``A v B ~ A (x) B``.

    Built by intertwining and certified afterwards: raises
    :class:`StandardnessError` if the result is not isometric or fails to
    intertwine.
    """
    system = sp.system
    wa, wb = system.marginals(sp.state)
    sf_A, ua = _frame_standard_form(system, "A", wa)
    sf_B, ub = _frame_standard_form(system, "B", wb)
    sf_T = _tensor_standard_form(system, sf_A, sf_B, ua, ub)
    omega_T = functional(sf_T.source, system.to_tensor(sp.state.density), "state")
    xi = natural_cone_vector(sf_T, omega_T)
    impl = StandardImplementation(sp, None, sf_A, sf_B, sf_T, xi, ua, ub)
    joint = system.joint
    X = np.array([b @ sp.omega for b in joint.basis]).T
    Y = np.array([impl.pi(b) @ xi for b in joint.basis]).T
    U = Y @ np.linalg.pinv(X, rcond=1e-10)
    impl = StandardImplementation(sp, U, sf_A, sf_B, sf_T, xi, ua, ub)
    iso = impl.isometry_residual()
    if iso > 1e-8:
        raise StandardnessError(f"implementation is not isometric (residual {iso:.2e})")
    tw = impl.intertwining_residual()
    if tw > 1e-8:
        raise StandardnessError(f"implementation does not intertwine (residual {tw:.2e})")
    return impl


@dataclass(frozen=True, eq=False)
class CanonicalFactor:
    F: FdAlgebra
    F_prime: FdAlgebra
    impl: StandardImplementation

    def checks(self):
        sp = self.impl.pair
        out = {
            "factor": len(self.F.blocks) == 1 and len(self.F_prime.blocks) == 1,
            "A_in_F": inclusion_residual(sp.A, self.F),
            "F_in_B_prime": inclusion_residual(self.F, sp.B_prime),
            "B_in_F_prime": inclusion_residual(sp.B, self.F_prime),
        }
        if self.impl.is_unitary:
            J = self.impl.joint_modular.J
            out["J_invariance"] = equality_residual(
                _conjugated(self.F, J), self.F)
            jaj = _conjugated(sp.A, J)
            formula = join(sp.A, jaj)
            out["join_formula"] = equality_residual(self.F, formula)
            out["commutant_formula"] = equality_residual(
                formula, intersection(sp.B_prime, _conjugated(sp.B_prime, J)))
            out["F_prime_formula"] = equality_residual(
                self.F_prime, join(sp.B, _conjugated(sp.B, J)))
        return out


def _conjugated(M, J):
    return algebra_from_generators([antilinear_sandwich(J, b) for b in M.basis])


def canonical_factor(sp, impl=None):
    """``F = U^* (B(K_A) (x) 1) U`` and ``F' = U^* (1 (x) B(K_B)) U``."""
    impl = impl or standard_implementation(sp)
    da, db = impl.space_dims
    U = impl.U
    gens_f, gens_fp = [], []
    for i in range(da):
        for j in range(da):
            e = np.zeros((da, da))
            e[i, j] = 1.0
            gens_f.append(la.dag(U) @ np.kron(e, np.eye(db)) @ U)
    for i in range(db):
        for j in range(db):
            e = np.zeros((db, db))
            e[i, j] = 1.0
            gens_fp.append(la.dag(U) @ np.kron(np.eye(da), e) @ U)
    F = algebra_from_generators(gens_f)
    Fp = algebra_from_generators(gens_fp)
    return CanonicalFactor(F, Fp, impl)


@dataclass(frozen=True)
class CanonicalEntropy:
    value: float
    value_prime: float
    mutual_information: float

    @property
    def remark_holds(self):
        return self.mutual_information <= 2 * self.value + 1e-8


def canonical_entanglement_entropy(sp, cf=None):
    """``E_C = S_F(omega) = S_F'(omega)``; raises :class:`ScopeError` when
    ``F v F'`` is not the full algebra."""
    from .entanglement import mutual_information
    cf = cf or canonical_factor(sp)
    d = sp.dim
    # commuting factors generate a copy of F (x) F', so the join is full
    # exactly when the dimensions multiply out
    factors = len(cf.F.blocks) == 1 and len(cf.F_prime.blocks) == 1
    if not (factors and cf.F.dim * cf.F_prime.dim == d * d and
            check_commuting(cf.F, cf.F_prime, 1e-8)):
        raise ScopeError("F and F' do not generate the full algebra")
    rho = np.outer(sp.omega, sp.omega.conj())
    s = von_neumann_entropy(functional(cf.F, rho, "state"))
    sp_ = von_neumann_entropy(functional(cf.F_prime, rho, "state"))
    ei = mutual_information(sp.system, sp.state)
    return CanonicalEntropy(float(s), float(sp_), float(ei))


# ---------------------------------------------------------------------------
# witness for the intermediate entanglement entropy


def dominating_witness(impl, ensemble):
    """Ambient density ``U^* (sum_j |xi_j (x) eta_j><.|) U`` whose restriction to
    ``A v B`` is the ensemble's functional, with ``xi_j``, ``eta_j`` the cone
    vectors of the factors. Needs a unitary implementation."""
    if not impl.is_unitary:
        raise ValidityError("witness lift needs a unitary implementation")
    system = impl.pair.system
    (fa, _, _), (fb, _, _) = system.frames
    R = np.zeros((impl.U.shape[0],) * 2, dtype=complex)
    for phi, psi in ensemble.terms:
        xa = _cone_vector_of(impl.sf_A, fa, system.abstract_density(phi))
        xb = _cone_vector_of(impl.sf_B, fb, system.abstract_density(psi))
        v = np.kron(xa, xb)
        R += np.outer(v, v.conj())
    return la.herm(la.dag(impl.U) @ R @ impl.U)


def _cone_vector_of(sf, frame, dens):
    return natural_cone_vector(sf, functional(frame, dens))
