"""Bipartite systems, separable ensembles, mutual information, relative
entanglement entropy upper bounds and separable operations.

A :class:`BipartiteSystem` carries an explicit identification of ``A v B``
with the multiplicity-free tensor frame ``T = A~ (x) B~`` where ``A~`` is the
block-diagonal matrix algebra ``(+)_k M_{n_k}`` on ``C^{sum n_k}``. States are
moved between the two pictures exactly (linear solves on product bases).
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import minimize

from . import _linalg as la
from .algebra import (
    FdAlgebra,
    check_commuting,
    functional,
    join,
    matrix_to_json,
)
from .entropy import INF, relative_entropy, von_neumann_entropy
from .errors import DecompositionError, DomainError, ShapeError, ValidityError

ISO_TOL = 1e-10
_FLOOR = 1e-13
_MIX = (0.0, 1e-12, 1e-9, 1e-6)


def _abstract_frame(M):
    """Matrix units of ``(+)_k M_{n_k}`` matched to ``M.basis`` and the scale
    ``sqrt(m_k)`` with ``extract(basis[i]) = units[i] / scale[i]``."""
    size = sum(n for n, _ in M.blocks)
    units, scale = [], []
    off = 0
    for n, m in M.blocks:
        for i in range(n):
            for j in range(n):
                e = np.zeros((size, size), dtype=complex)
                e[off + i, off + j] = 1.0
                units.append(e)
                scale.append(np.sqrt(m))
        off += n
    blocks = tuple((n, 1) for n, _ in M.blocks)
    return FdAlgebra(size, blocks, np.eye(size)), np.array(units), np.array(scale)


@dataclass(frozen=True, eq=False)
class BipartiteSystem:
    """Commuting algebras ``A``, ``B`` on one space with ``A v B = A (x) B``."""

    A: FdAlgebra
    B: FdAlgebra

    def __post_init__(self):
        if self.A.ambient_dim != self.B.ambient_dim:
            raise ShapeError("A and B must act on one space")
        if not check_commuting(self.A, self.B):
            raise DomainError("A and B do not commute")
        s = np.linalg.svd(self.products_matrix, compute_uv=False)
        if s.min() <= ISO_TOL * s.max():
            raise DomainError("products ab are linearly dependent: not split")

    @cached_property
    def products(self):
        """``a_i b_j`` for the orthonormal bases, index ``i * dim B + j``."""
        return np.einsum("iab,jbc->ijac", self.A.basis, self.B.basis).reshape(
            self.A.dim * self.B.dim, self.A.ambient_dim, self.A.ambient_dim)

    @cached_property
    def products_matrix(self):
        return self.products.reshape(len(self.products), -1).T

    @cached_property
    def joint(self):
        return join(self.A, self.B)

    @cached_property
    def frames(self):
        return _abstract_frame(self.A), _abstract_frame(self.B)

    @property
    def dims(self):
        (fa, _, _), (fb, _, _) = self.frames
        return fa.ambient_dim, fb.ambient_dim

    @cached_property
    def tensor_units(self):
        (_, ua, sa), (_, ub, sb) = self.frames
        units = np.einsum("iab,jcd->ijacbd", ua, ub)
        da, db = ua.shape[1], ub.shape[1]
        units = units.reshape(len(ua) * len(ub), da * db, da * db)
        scale = np.outer(sa, sb).reshape(-1)
        return units, scale

    @cached_property
    def _gram_solver(self):
        P = self.products_matrix
        G = la.dag(P) @ P
        return np.linalg.inv(G)

    # -- moving between the concrete and the tensor picture --------------

    def values(self, density):
        """``omega(a_i b_j)`` for an ambient density."""
        return np.einsum("ab,kba->k", density, self.products)

    def from_values(self, vals):
        """Density in ``A v B`` with prescribed values on the products."""
        P = self.products_matrix
        y = self._gram_solver.T @ vals
        d = self.A.ambient_dim
        return (P.conj() @ y).reshape(d, d).T

    def to_tensor(self, density):
        """Density on ``T`` of the transported functional."""
        units, scale = self.tensor_units
        vals = self.values(density) * scale
        return np.einsum("k,kba->ab", vals, units.conj())

    def from_tensor(self, rho_t):
        units, scale = self.tensor_units
        vals = np.einsum("ab,kba->k", rho_t, units) / scale
        return self.from_values(vals)

    def functional(self, density, kind=None):
        return functional(self.joint, density, kind)

    def state_from_tensor(self, rho_t):
        return self.functional(self.from_tensor(rho_t))

    def local_density(self, side, abstract):
        """Ambient density on ``A`` (or ``B``) of an abstract block density."""
        M = self.A if side == "A" else self.B
        frame = self.frames[0 if side == "A" else 1][0]
        parts = frame.extract(abstract)
        return M.embed([p / m for p, (_, m) in zip(parts, M.blocks)])

    def abstract_density(self, f):
        """Block-diagonal abstract density of a functional on ``A`` or ``B``."""
        M = f.algebra
        if M is self.A:
            side = 0
        elif M is self.B:
            side = 1
        else:
            side = 0 if M.same_as(self.A) else 1
        frame = self.frames[side][0]
        return frame.embed(f.block_densities())

    def product_density(self, phi, psi):
        """Density in ``A v B`` of ``a b -> phi(a) psi(b)``."""
        return self.from_tensor(np.kron(self.abstract_density(phi),
                                        self.abstract_density(psi)))

    def marginals(self, omega):
        return omega.restrict(self.A), omega.restrict(self.B)

    def iso_residual(self):
        """Worst deviation of ``a b -> a (x) b`` from multiplicativity."""
        worst = 0.0
        A, B = self.A, self.B
        (fa, _, _), (fb, _, _) = self.frames
        for a in A.basis:
            for b in B.basis:
                lhs = self.to_tensor_operator(a @ b)
                rhs = np.kron(fa.embed(A.extract(a)), fb.embed(B.extract(b)))
                worst = max(worst, float(np.linalg.norm(lhs - rhs)))
        return worst

    def tensor_coefficients(self, x):
        """``C`` with ``x = sum_ij C_ij u_i (x) v_j`` in the frame units."""
        _, scale = self.tensor_units
        P = self.products_matrix
        c = self._gram_solver @ (la.dag(P) @ np.asarray(x).reshape(-1))
        return (c / scale).reshape(self.A.dim, self.B.dim)

    def to_tensor_operator(self, x):
        """Image in ``T`` of an element of ``A v B``."""
        units, _ = self.tensor_units
        return np.einsum("k,kab->ab", self.tensor_coefficients(x).reshape(-1), units)

    def to_dict(self):
        return {"A": self.A.to_dict(), "B": self.B.to_dict()}


def tensor_system(da, db):
    """``M_da (x) 1`` and ``1 (x) M_db`` on ``C^da (x) C^db``."""
    d = da * db
    A = FdAlgebra(d, ((da, db),), np.eye(d))
    perm = np.arange(d).reshape(da, db).T.reshape(-1)
    B = FdAlgebra(d, ((db, da),), np.eye(d)[:, perm])
    return BipartiteSystem(A, B)


# ---------------------------------------------------------------------------
# ensembles


@dataclass(frozen=True, eq=False)
class ProductEnsemble:
    """Finite list of positive functional pairs ``(phi_j on A, psi_j on B)``."""

    system: BipartiteSystem
    terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        for phi, psi in self.terms:
            if phi.kind not in ("positive", "state") or \
                    psi.kind not in ("positive", "state"):
                raise DomainError("ensemble terms must be positive functionals")

    def density(self):
        d = self.system.A.ambient_dim
        out = np.zeros((d, d), dtype=complex)
        for phi, psi in self.terms:
            out = out + self.system.product_density(phi, psi)
        return out

    def induced(self):
        return self.system.functional(self.density())

    @property
    def norm(self):
        return float(sum(phi.unit_value * psi.unit_value for phi, psi in self.terms))

    def weights(self):
        return np.array([phi.unit_value * psi.unit_value for phi, psi in self.terms])

    def scaled(self, c):
        return ProductEnsemble(self.system, [(phi * c, psi) for phi, psi in self.terms])

    def to_dict(self):
        return {"terms": [{"phi": matrix_to_json(p.density),
                           "psi": matrix_to_json(q.density)}
                          for p, q in self.terms]}


def ensemble_from_tensor(system, items):
    """Ensemble from ``(weight, alpha, beta)`` with abstract densities."""
    terms = []
    for w, alpha, beta in items:
        da = system.local_density("A", alpha)
        db = system.local_density("B", beta)
        terms.append((functional(system.A, w * da), functional(system.B, db)))
    return ProductEnsemble(system, terms)


# ---------------------------------------------------------------------------
# measures


def mutual_information(system, omega, cross_check=True):
    """``E_I(omega) = S(omega || omega_A (x) omega_B)``.

    With ``cross_check`` the value is compared against
    ``S(omega_A) + S(omega_B) - S(omega)`` and a mismatch above 1e-8 raises.
    """
    wa, wb = system.marginals(omega)
    prod = system.functional(system.product_density(wa, wb), "state")
    value = relative_entropy(omega, prod)
    if cross_check and value is not INF:
        alt = von_neumann_entropy(wa) + von_neumann_entropy(wb) - \
            von_neumann_entropy(omega)
        if abs(alt - value) > 1e-8:
            raise ValidityError(f"mutual information routes disagree: "
                                f"{value} vs {alt}")
    return value


def mutual_information_formula(system, omega):
    wa, wb = system.marginals(omega)
    return von_neumann_entropy(wa) + von_neumann_entropy(wb) - \
        von_neumann_entropy(omega)


def separable_bound_e1(system, ensemble):
    """``sum_j eta(lambda_j)`` for a normalised ensemble; asserts the
    mutual-information inequality on the induced state."""
    lams = ensemble.weights()
    if abs(lams.sum() - 1.0) > 1e-10 or np.any(lams <= 0):
        raise DecompositionError("weights must be positive and sum to one",
                                 abs(lams.sum() - 1.0))
    for phi, psi in ensemble.terms:
        if abs(psi.unit_value - 1.0) > 1e-10:
            raise DecompositionError("B-side terms must be states")
    bound = float(np.sum(la.eta(lams)))
    omega = system.functional(ensemble.density(), "state")
    ei = mutual_information(system, omega)
    if ei > bound + 1e-8:
        raise ValidityError(f"E_I = {ei} exceeds the separable bound {bound}")
    return bound


@dataclass(frozen=True)
class EntanglementBound:
    value: float
    witness: ProductEnsemble
    runs: int


class _REObjective:
    """``-tr(rho log sigma)`` over ``sigma = sum_j p_j alpha_j (x) beta_j``
    with ``alpha = E(g g^*) / |g|^2`` block-pinched, ``p = softmax``."""

    def __init__(self, system, rho_t, k):
        (self.fa, _, _), (self.fb, _, _) = system.frames
        self.da, self.db = self.fa.ambient_dim, self.fb.ambient_dim
        self.rho = rho_t
        self.k = k
        self.sizes = (k, k * 2 * self.da * self.da, k * 2 * self.db * self.db)

    def unpack(self, x):
        k, da, db = self.k, self.da, self.db
        w = x[:k]
        ga = x[k:k + 2 * k * da * da]
        gb = x[k + 2 * k * da * da:]
        ga = (ga[: k * da * da] + 1j * ga[k * da * da:]).reshape(k, da, da)
        gb = (gb[: k * db * db] + 1j * gb[k * db * db:]).reshape(k, db, db)
        return w, ga, gb

    def pack(self, w, ga, gb):
        return np.concatenate([w, ga.real.ravel(), ga.imag.ravel(),
                               gb.real.ravel(), gb.imag.ravel()])

    @staticmethod
    def _local(frame, g):
        q = frame.expectation(g @ la.dag(g))
        t = float(np.trace(q).real)
        return q / t, t

    def parts(self, x):
        w, ga, gb = self.unpack(x)
        p = np.exp(w - w.max())
        p = p / p.sum()
        al = [self._local(self.fa, g) for g in ga]
        be = [self._local(self.fb, g) for g in gb]
        return p, al, be

    def sigma(self, x):
        p, al, be = self.parts(x)
        return sum(pj * np.kron(a, b) for pj, (a, _), (b, _) in zip(p, al, be))

    def value_and_grad(self, x):
        w, ga, gb = self.unpack(x)
        p, al, be = self.parts(x)
        sig = la.herm(sum(pj * np.kron(a, b) for pj, (a, _), (b, _) in zip(p, al, be)))
        # floor keeps the objective finite while the optimiser explores
        sig = sig + _FLOOR * np.eye(len(sig))
        val = -float(np.trace(self.rho @ la.spectral_apply(sig, np.log, clamp=0.0)).real)
        gam = -la.frechet_adjoint(sig, self.rho, np.log, lambda t: 1.0 / t)
        gam4 = gam.reshape(self.da, self.db, self.da, self.db)
        gp = np.array([float(np.trace(gam @ np.kron(a, b)).real)
                       for (a, _), (b, _) in zip(al, be)])
        gw = p * (gp - p @ gp)
        gga = np.zeros_like(ga)
        ggb = np.zeros_like(gb)
        for j, ((a, ta), (b, tb)) in enumerate(zip(al, be)):
            # partial traces of Gamma (1 (x) beta) and Gamma (alpha (x) 1)
            ga_loc = p[j] * np.einsum("iajb,ba->ij", gam4, b)
            gb_loc = p[j] * np.einsum("aibj,ba->ij", gam4, a)
            ga_loc = self.fa.expectation(la.herm(ga_loc))
            gb_loc = self.fb.expectation(la.herm(gb_loc))
            gq_a = (ga_loc - float(np.trace(ga_loc @ a).real) * np.eye(self.da)) / ta
            gq_b = (gb_loc - float(np.trace(gb_loc @ b).real) * np.eye(self.db)) / tb
            gga[j] = 2.0 * gq_a @ ga[j]
            ggb[j] = 2.0 * gq_b @ gb[j]
        return val, self.pack(gw, gga, ggb)


def _initial_point(obj, rng, warm=None):
    k, da, db = obj.k, obj.da, obj.db
    if warm is not None:
        return warm
    w = 0.1 * rng.standard_normal(k)
    ga = rng.standard_normal((k, da, da)) + 1j * rng.standard_normal((k, da, da))
    gb = rng.standard_normal((k, db, db)) + 1j * rng.standard_normal((k, db, db))
    return obj.pack(w, ga, gb)


def _warm_from_ensemble(obj, system, ensemble):
    terms = list(ensemble.terms)[: obj.k]
    if not terms:
        return None
    total = sum(p.unit_value * q.unit_value for p, q in terms)
    w, ga, gb = [], [], []
    for phi, psi in terms:
        wt = phi.unit_value * psi.unit_value / total
        w.append(np.log(max(wt, 1e-300)))
        ga.append(la.psd_sqrt(system.abstract_density(phi) / phi.unit_value))
        gb.append(la.psd_sqrt(system.abstract_density(psi) / psi.unit_value))
    while len(w) < obj.k:
        w.append(-60.0)
        ga.append(np.eye(obj.da) / np.sqrt(obj.da))
        gb.append(np.eye(obj.db) / np.sqrt(obj.db))
    return obj.pack(np.array(w), np.array(ga), np.array(gb))


def _ensemble_relative_entropy(system, omega, ensemble):
    sigma = system.functional(ensemble.density())
    sigma = functional(sigma.algebra, sigma.density / sigma.unit_value)
    return relative_entropy(omega, sigma)


def relative_entanglement_upper(system, omega, K=4, R=8, seed=0, warm_starts=()):
    """Certified upper bound of ``E_R(omega)`` with a separable witness.

    Candidates: ``omega_A (x) omega_B``, each warm start as given and after
    local optimisation, and ``R`` seeded random starts with ``K`` product
    terms. The bound is the smallest ``S(omega || sigma)`` found.
    """
    if K < 1:
        raise DomainError("K must be positive")
    rho_t = la.herm(system.to_tensor(omega.density))
    wa, wb = system.marginals(omega)
    best = ProductEnsemble(system, [(wa, wb)])
    best_val = _ensemble_relative_entropy(system, omega, best)
    candidates = [best] + list(warm_starts)
    for ens in candidates[1:]:
        v = _ensemble_relative_entropy(system, omega, ens)
        if v < best_val:
            best, best_val = ens, v
    obj = _REObjective(system, rho_t, K)
    starts = []
    for ens in candidates:
        x0 = _warm_from_ensemble(obj, system, ens)
        if x0 is not None:
            starts.append(x0)
    for r in range(R):
        starts.append(_initial_point(obj, np.random.default_rng([seed, K, r])))
    runs = 0
    for x0 in starts:
        res = minimize(obj.value_and_grad, x0, jac=True, method="L-BFGS-B",
                       options={"maxiter": 500, "gtol": 1e-10, "ftol": 1e-14})
        runs += 1
        p, al, be = obj.parts(res.x)
        ens = ensemble_from_tensor(
            system, [(pj, a, b) for pj, (a, _), (b, _) in zip(p, al, be)
                     if pj > 1e-15])
        for eps in _MIX:
            # a pinch of the product of marginals keeps supports compatible
            cand = ens if eps == 0 else ProductEnsemble(
                system, list(ens.scaled(1.0 - eps).terms) + [(wa * eps, wb)])
            v = _ensemble_relative_entropy(system, omega, cand)
            if v is not INF and v < best_val:
                best, best_val = cand, v
    return EntanglementBound(max(float(best_val), 0.0), best, runs)


# ---------------------------------------------------------------------------
# separable operations


def _kraus_from_choi(choi, d_in, d_out, tol=1e-10):
    w, v = la.eigh(choi)
    if w.min() < -tol:
        raise ValidityError(f"map is not completely positive "
                            f"(Choi eigenvalue {w.min():.2e})")
    kraus = []
    for lam, vec in zip(w, v.T):
        if lam > tol:
            kraus.append(np.sqrt(lam) * vec.reshape(d_in, d_out).T)
    return kraus


@dataclass(frozen=True, eq=False)
class LocalMap:
    """A completely positive map on one tensor factor, Heisenberg picture
    ``x -> sum K^* x K`` where the Kraus operators act on the abstract factor."""

    kraus: tuple

    @classmethod
    def from_kraus(cls, kraus):
        return cls(tuple(np.asarray(k, dtype=complex) for k in kraus))

    @classmethod
    def from_heisenberg(cls, fun, d):
        """From a linear map given as a callable on ``d x d`` matrices."""
        choi = np.zeros((d * d, d * d), dtype=complex)
        for i in range(d):
            for j in range(d):
                e = np.zeros((d, d), dtype=complex)
                e[i, j] = 1.0
                choi += np.kron(e, fun(e))
        return cls(tuple(_heis_kraus(choi, d)))

    def heisenberg(self, x):
        return sum(la.dag(k) @ x @ k for k in self.kraus)

    def unit(self):
        d = self.kraus[0].shape[0]
        return self.heisenberg(np.eye(d))


def _heis_kraus(choi, d, tol=1e-10):
    # choi = sum_ij e_ij (x) F(e_ij) with F(x) = sum_k K_k^* x K_k gives
    # choi = sum_k |v_k><v_k| where v_k[i, a] = conj(K_k[i, a]).
    w, v = la.eigh(choi)
    if w.min() < -tol:
        raise ValidityError(f"map is not completely positive "
                            f"(Choi eigenvalue {w.min():.2e})")
    out = []
    for lam, vec in zip(w, v.T):
        if lam > tol:
            out.append(np.sqrt(lam) * vec.reshape(d, d).conj())
    return out


def apply_separable_operation(system, ops, omega, tol=1e-10):
    """Outcomes ``(p_j, omega_j)`` of a separable operation.

    ``ops`` is a list of ``(LocalMap on A, LocalMap on B)``; their products
    must sum to the identity on ``1``.
    """
    da, db = system.dims
    total = sum(np.kron(fa.unit(), fb.unit()) for fa, fb in ops)
    resid = float(np.linalg.norm(total - np.eye(da * db)))
    if resid > tol:
        raise ValidityError(f"operation is not normalised (residual {resid:.2e})")
    rho_t = system.to_tensor(omega.density)
    out = []
    for fa, fb in ops:
        new = sum(np.kron(ka, kb) @ rho_t @ la.dag(np.kron(ka, kb))
                  for ka in fa.kraus for kb in fb.kraus)
        p = float(np.trace(new).real)
        if p <= 1e-14:
            out.append((0.0, None))
            continue
        out.append((p, system.state_from_tensor(new / p)))
    return out


def apply_separable_operation_ensemble(system, ops, ensemble):
    """Transform a product ensemble term by term (stays separable)."""
    results = []
    for fa, fb in ops:
        terms = []
        for phi, psi in ensemble.terms:
            a = system.abstract_density(phi)
            b = system.abstract_density(psi)
            na = sum(k @ a @ la.dag(k) for k in fa.kraus)
            nb = sum(k @ b @ la.dag(k) for k in fb.kraus)
            terms.append((functional(system.A, system.local_density("A", na)),
                          functional(system.B, system.local_density("B", nb))))
        results.append(ProductEnsemble(system, terms))
    return results
