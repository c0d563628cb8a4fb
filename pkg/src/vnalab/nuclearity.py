"""Split pairs in standard position, the modular maps ``Xi``, nuclear
p-norm upper bounds and the bound chain from a nuclear decomposition to
entropy estimates.

Two concrete split-pair models are provided:

``doubled_split_pair``
    ``K = C^{ab} (x) C^{ab}`` (Hilbert-Schmidt space of ``C^a (x) C^b``),
    ``A = M_a``, ``B = M_b`` acting on the left, ``Omega = rho^{1/2}`` for a
    faithful density ``rho``. ``Omega`` is cyclic and separating for ``A v B``.
``minimal_split_pair``
    ``K = C^a (x) C^a``, ``A = M_a (x) 1``, ``B = 1 (x) M_a`` and a vector of
    full Schmidt rank, cyclic and separating for ``A`` and ``B``.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import minimize

from . import _linalg as la
from .algebra import (
    FdAlgebra,
    commutant,
    functional,
    matrix_to_json,
    polarization,
)
from .entanglement import (
    BipartiteSystem,
    ProductEnsemble,
    ensemble_from_tensor,
    mutual_information,
)
from .errors import (
    ParameterError,
    StaleDecompositionError,
    StandardnessError,
    ValidityError,
)
from .modular import tomita

DEC_TOL = 1e-9
PAIR_TOL = 1e-8


def _full_rank(cols, dim, tol=1e-10):
    s = np.linalg.svd(cols, compute_uv=False)
    return len(s) >= dim and s[dim - 1] > tol * max(1.0, s[0])


def _orbit(M, v):
    return np.array([b @ v for b in M.basis]).T


@dataclass(frozen=True, eq=False)
class SplitPair:
    """A bipartite system with a joint vector ``omega`` that is separating
    for ``A`` and ``B`` and cyclic for ``A v B``."""

    system: BipartiteSystem
    omega: np.ndarray
    model: str = "custom"

    def __post_init__(self):
        v = np.asarray(self.omega, dtype=complex)
        object.__setattr__(self, "omega", v / np.linalg.norm(v))
        self.check_standard()

    @property
    def A(self):
        return self.system.A

    @property
    def B(self):
        return self.system.B

    @property
    def dim(self):
        return self.A.ambient_dim

    def check_standard(self):
        d = self.dim
        if len(self.omega) != d:
            raise StandardnessError("vector length does not match the ambient space")
        for name, M in (("A", self.A), ("B", self.B)):
            # separating for M  <=>  x -> x Omega injective on M
            if not _full_rank(_orbit(M, self.omega), M.dim):
                raise StandardnessError(f"vector is not separating for {name}")
        if not _full_rank(_orbit(self.system.joint, self.omega), d):
            raise StandardnessError("vector is not cyclic for A v B")

    @cached_property
    def state(self):
        """The vector state on ``A v B``."""
        return self.system.functional(np.outer(self.omega, self.omega.conj()), "state")

    @cached_property
    def A_prime(self):
        return commutant(self.A)

    @cached_property
    def B_prime(self):
        return commutant(self.B)

    @cached_property
    def modular_B_prime(self):
        return tomita(self.B_prime, self.omega, self.omega)

    @cached_property
    def modular_A_prime(self):
        return tomita(self.A_prime, self.omega, self.omega)

    @cached_property
    def modular_A(self):
        return tomita(self.A, self.omega, self.omega)

    @cached_property
    def modular_B(self):
        return tomita(self.B, self.omega, self.omega)

    def side(self, name):
        """``(algebra, opposite commutant modular data, own modular data)``."""
        if name == "A":
            return self.A, self.modular_B_prime, self.modular_A
        if name == "B":
            return self.B, self.modular_A_prime, self.modular_B
        raise ParameterError("side must be 'A' or 'B'")

    def to_dict(self):
        return {"model": self.model, **self.system.to_dict(),
                "Omega": matrix_to_json(self.omega)}


def _legs_unitary(dims, order):
    """Permutation matrix sending leg order ``order`` to the natural order."""
    n = int(np.prod(dims))
    idx = np.arange(n).reshape(dims).transpose(order).reshape(-1)
    return np.eye(n)[:, idx]


def doubled_split_pair(rho, a, b):
    """Split pair on ``HS(C^a (x) C^b)`` at ``Omega = rho^{1/2}``."""
    rho = la.herm(np.asarray(rho, dtype=complex))
    ab = a * b
    if rho.shape != (ab, ab):
        raise ParameterError(f"density must be {ab} x {ab}")
    if np.linalg.eigvalsh(rho).min() <= la.ZERO_EIG:
        raise StandardnessError("density must be faithful")
    dims = (a, b, ab)
    d = ab * ab
    A = FdAlgebra(d, ((a, b * ab),), np.eye(d))
    B = FdAlgebra(d, ((b, a * ab),), _legs_unitary(dims, (1, 0, 2)))
    omega = la.psd_sqrt(rho / np.trace(rho).real).reshape(-1)
    return SplitPair(BipartiteSystem(A, B), omega, "doubled")


def minimal_split_pair(psi):
    """Split pair ``M_a (x) 1``, ``1 (x) M_a`` at a vector given as an
    ``a x a`` coefficient matrix (or its flattening)."""
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim == 1:
        a = int(round(np.sqrt(len(psi))))
        if a * a != len(psi):
            raise ParameterError("vector length must be a square")
        psi = psi.reshape(a, a)
    a = psi.shape[0]
    d = a * a
    A = FdAlgebra(d, ((a, a),), np.eye(d))
    B = FdAlgebra(d, ((a, a),), _legs_unitary((a, a), (1, 0)))
    return SplitPair(BipartiteSystem(A, B), psi.reshape(-1), "minimal")


def schmidt_vector(coeffs):
    """``sum_i sqrt(c_i) e_i (x) e_i`` normalised, as an ``a x a`` matrix."""
    c = np.asarray(coeffs, dtype=float)
    c = c / c.sum()
    return np.diag(np.sqrt(c)).astype(complex)


# ---------------------------------------------------------------------------
# linear maps from algebras and their nuclear decompositions


@dataclass(frozen=True, eq=False)
class AlgebraMap:
    """Linear map ``M -> C^n``; column ``k`` is the image of ``M.basis[k]``."""

    source: FdAlgebra
    matrix: np.ndarray

    def __call__(self, x):
        return self.matrix @ self.source.coordinates(x)

    @property
    def rank(self):
        s = np.linalg.svd(self.matrix, compute_uv=False)
        return int(np.sum(s > 1e-12 * max(1.0, s[0] if s.size else 0.0)))


def xi_map(sp, side="A"):
    """``Xi_A(a) = Delta_{B'}^{1/4} a Omega`` (``Xi_B`` symmetrically)."""
    M, rel, _ = sp.side(side)
    quarter = rel.delta_power(0.25)
    cols = np.array([quarter @ (b @ sp.omega) for b in M.basis]).T
    return AlgebraMap(M, cols)


@dataclass(frozen=True, eq=False)
class NuclearDecomposition:
    """``Theta(x) = sum_i e_i(x) f_i`` with functionals ``e_i`` on ``source``."""

    source: FdAlgebra
    terms: tuple
    p: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        _check_p(self.p)

    def matrix(self, n=None):
        if not self.terms:
            return np.zeros((n or 0, self.source.dim), dtype=complex)
        basis = self.source.basis
        return sum(np.outer(f, [e(b) for b in basis]) for e, f in self.terms)

    def term_norms(self):
        return np.array([e.norm * np.linalg.norm(f) for e, f in self.terms])

    def cost(self, p=None):
        p = self.p if p is None else p
        return float(np.sum(self.term_norms() ** p))

    def bound(self, p=None):
        p = self.p if p is None else p
        return self.cost(p) ** (1.0 / p)

    def residual(self, theta):
        if not self.terms:
            return float(np.linalg.norm(theta.matrix))
        return float(np.linalg.norm(self.matrix() - theta.matrix))

    def to_dict(self):
        return {"p": self.p, "mu_p": self.cost(),
                "terms": [{"e": matrix_to_json(e.density), "f": matrix_to_json(f)}
                          for e, f in self.terms]}


def _check_p(p, open_top=False):
    ok = 0 < p < 1 if open_top else 0 < p <= 1
    if not ok:
        interval = "(0, 1)" if open_top else "(0, 1]"
        raise ParameterError(f"p = {p} is outside {interval}")


def _coefficient_functional(M, row):
    """Functional ``x -> sum_k row[k] * coord_k(x)``."""
    dens = np.tensordot(row, M.basis.conj().transpose(0, 2, 1), axes=1)
    return functional(M, dens)


def _factored(M, E, F, p):
    """Decomposition from ``Theta = F @ E`` with ``E`` acting on coordinates."""
    terms = []
    for i in range(E.shape[0]):
        if np.linalg.norm(E[i]) > 0 and np.linalg.norm(F[:, i]) > 0:
            terms.append((_coefficient_functional(M, E[i]), F[:, i].copy()))
    return NuclearDecomposition(M, terms, p)


def _svd_decomposition(theta, p):
    M = theta.source
    u, s, vh = np.linalg.svd(theta.matrix, full_matrices=False)
    keep = s > 1e-14 * max(1.0, s[0] if s.size else 0.0)
    u, s, vh = u[:, keep], s[keep], vh[keep]
    return _factored(M, vh, u * s, p), (u * s, vh)


def _unit_decomposition(theta, p):
    M = theta.source
    return _factored(M, np.eye(M.dim), theta.matrix, p)


def _mixing_cost(C, F, E, T, p):
    """Cost of the mixed decomposition ``(T E, F T^{-1})`` and its gradient
    in ``T`` (as ``d/dRe + i d/dIm``). ``C[k]`` is the density of the k-th
    coordinate functional; trace norms differentiate to polar factors."""
    Ti = np.linalg.inv(T)
    dens = np.tensordot(T @ E, C, axes=1)
    u, sv, vh = np.linalg.svd(dens)
    e_n = sv.sum(axis=1)
    H = F @ Ti
    f_n = np.linalg.norm(H, axis=0)
    t = e_n * f_n
    cost = float(np.sum(t ** p))
    w = p * np.where(t > 0, t, 1.0) ** (p - 1)
    # d e_i = Re tr(W_i^* dD_i) with W_i = u_i vh_i
    W = u @ vh
    g_e = np.einsum("iab,kab->ik", W.conj(), C).conj() * (w * f_n)[:, None]
    g_h = H / np.where(f_n > 0, f_n, 1.0) * (w * e_n)[None, :]
    grad = g_e @ la.dag(E) - la.dag(H) @ g_h @ la.dag(Ti)
    return cost, grad


def _greedy(theta, p, start, factors, seed=0, restarts=4):
    """Improve ``start`` by an invertible mixing ``T`` of its terms."""
    M = theta.source
    F, E = factors
    r = E.shape[0]
    if r <= 1:
        return start
    C = M.basis.conj().transpose(0, 2, 1)

    def unpack(x):
        return np.eye(r) + (x[: r * r] + 1j * x[r * r:]).reshape(r, r)

    def fun(x):
        T = unpack(x)
        if np.linalg.cond(T) > 1e8:
            return 1e300, np.zeros_like(x)
        c, g = _mixing_cost(C, F, E, T, p)
        return c, np.concatenate([g.real.ravel(), g.imag.ravel()])

    best_x, best_val = np.zeros(2 * r * r), start.cost(p)
    rng = np.random.default_rng(seed)
    for trial in range(restarts):
        x0 = best_x if trial == 0 else best_x + 0.05 * rng.standard_normal(2 * r * r)
        res = minimize(fun, x0, jac=True, method="L-BFGS-B",
                       options={"maxiter": 2000, "ftol": 1e-14, "gtol": 1e-10})
        if res.fun < best_val:
            best_x, best_val = res.x, float(res.fun)
    if best_val >= start.cost(p):
        return start
    T = unpack(best_x)
    dec = _factored(M, T @ E, F @ np.linalg.inv(T), p)
    if dec.residual(theta) > DEC_TOL or dec.cost(p) > start.cost(p):
        return start
    return dec


def pnorm_upper(theta, p=1.0, strategy="svd"):
    """Certified upper bound of the nuclear p-norm of ``theta`` together with
    the decomposition realising it."""
    _check_p(p)
    if strategy not in ("svd", "greedy"):
        raise ParameterError("strategy must be 'svd' or 'greedy'")
    svd_dec, factors = _svd_decomposition(theta, p)
    if not svd_dec.terms:
        return 0.0, svd_dec
    unit_dec = _unit_decomposition(theta, p)
    best = min((svd_dec, unit_dec), key=lambda d: d.cost(p))
    if strategy == "greedy":
        improved = _greedy(theta, p, svd_dec, factors)
        if improved.cost(p) < best.cost(p):
            best = improved
    if best.residual(theta) > DEC_TOL * max(1.0, np.linalg.norm(theta.matrix)):
        raise StaleDecompositionError("decomposition does not reconstruct the map",
                                      best.residual(theta))
    return best.bound(p), best


def partition_function_upper(sp, p=1.0, strategy="svd"):
    """Upper bound of ``z_p = min(|Xi_A|_p, |Xi_B|_p)``."""
    _check_p(p)
    za, _ = pnorm_upper(xi_map(sp, "A"), p, strategy)
    zb, _ = pnorm_upper(xi_map(sp, "B"), p, strategy)
    return min(za, zb)


# ---------------------------------------------------------------------------
# product decompositions of the joint state


@dataclass(frozen=True, eq=False)
class ProductDecomposition:
    """``omega(ab) = sum_j phi_j(a) psi_j(b)`` with general functionals."""

    system: BipartiteSystem
    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    def values(self):
        A, B = self.system.A, self.system.B
        out = np.zeros((A.dim, B.dim), dtype=complex)
        for phi, psi in self.terms:
            out += np.outer([phi(a) for a in A.basis], [psi(b) for b in B.basis])
        return out

    def residual(self, omega):
        target = self.system.values(omega.density).reshape(self.system.A.dim, -1)
        return float(np.max(np.abs(self.values() - target)))

    def cost(self, p):
        return float(sum((phi.norm * psi.norm) ** p for phi, psi in self.terms))


def hs3_product_decomposition(sp, dec):
    """Product decomposition of the vector state from a decomposition of ``Xi_A``.

    ``psi_j(b) = <(D^{1/4} + D^{-1/4})^{-1} (b^* Omega + J_B b Omega), f_j>``
    with ``D = Delta_{B'}``; the bracketed operator has norm at most 1/2, so
    ``|psi_j| <= |f_j|``.
    """
    theta = xi_map(sp, "A")
    if dec.residual(theta) > DEC_TOL * max(1.0, np.linalg.norm(theta.matrix)):
        raise StaleDecompositionError("decomposition does not reconstruct Xi_A",
                                      dec.residual(theta))
    rel = sp.modular_B_prime
    w, v = la.eigh(rel.delta)
    g = np.zeros_like(w)
    keep = w > la.CLAMP_EIG
    g[keep] = 1.0 / (w[keep] ** 0.25 + w[keep] ** -0.25)
    gamma = (v * g) @ la.dag(v)
    JB = sp.modular_B.J
    B = sp.B
    images = np.array([gamma @ (la.dag(b) @ sp.omega + JB @ np.conj(b @ sp.omega))
                       for b in B.basis])
    terms = []
    for e, f in dec.terms:
        vals = images.conj() @ f
        dens = np.tensordot(vals, B.basis.conj().transpose(0, 2, 1), axes=1)
        terms.append((e, functional(B, dens)))
    out = ProductDecomposition(sp.system, terms)
    resid = out.residual(sp.state)
    if resid > PAIR_TOL:
        raise StaleDecompositionError(
            f"product decomposition misses the state (residual {resid:.2e})", resid)
    return out


@dataclass(frozen=True, eq=False)
class FourSplit:
    lam: float
    plus: ProductEnsemble
    minus: ProductEnsemble

    def state_plus(self):
        return self.plus.scaled(1.0 / (1.0 + self.lam))

    def state_minus(self):
        return self.minus.scaled(1.0 / self.lam) if self.lam > 0 else self.minus

    def residual(self, omega):
        diff = self.plus.density() - self.minus.density() - omega.density
        return float(np.linalg.norm(diff))


def four_split(pdec):
    """``omega = (1 + lam) omega_+ - lam omega_-`` with separable ``omega_+-``.

    Each factor is polarised into four positive parts; products whose phases
    multiply to ``+1`` go to ``omega_+`` and those multiplying to ``-1`` to
    ``omega_-``. Imaginary products cancel because ``omega`` is hermitian.
    """
    system = pdec.system
    plus, minus = [], []
    for phi, psi in pdec.terms:
        pa, pb = polarization(phi), polarization(psi)
        for al, fa in enumerate(pa):
            if fa.unit_value <= 0:
                continue
            for be, fb in enumerate(pb):
                if fb.unit_value <= 0:
                    continue
                phase = (al + be) % 4
                if phase == 0:
                    plus.append((fa, fb))
                elif phase == 2:
                    minus.append((fa, fb))
    ens_p = ProductEnsemble(system, plus)
    ens_m = ProductEnsemble(system, minus)
    lam = ens_m.norm
    return FourSplit(float(lam), ens_p, ens_m)


@dataclass(frozen=True, eq=False)
class DominatingSeparable:
    ensemble: ProductEnsemble
    norm: float
    min_eig: float

    @property
    def functional(self):
        return self.ensemble.induced()


def _moduli(system, f):
    """Left and right moduli ``V S V^*`` and ``W S W^*`` of an abstract density."""
    rho = system.abstract_density(f)
    v, s, wh = np.linalg.svd(rho)
    w = la.dag(wh)
    return (v * s) @ la.dag(v), (w * s) @ la.dag(w)


def dominating_separable(pdec, omega=None):
    """Separable ``sigma >= omega`` with ``|sigma| = sum_j |phi_j| |psi_j|``.

    ``sigma_j = (|phi_j|_L (x) |psi_j|_L + |phi_j|_R (x) |psi_j|_R) / 2`` where
    ``|rho|_L``, ``|rho|_R`` are the left and right moduli of the density; in
    the tensor frame ``sigma_j - Re(phi_j (x) psi_j) = (X - Y)(X - Y)^* / 2``.
    """
    system = pdec.system
    items = []
    for phi, psi in pdec.terms:
        if phi.norm <= 1e-15 or psi.norm <= 1e-15:
            continue
        al, ar = _moduli(system, phi)
        bl, br = _moduli(system, psi)
        items.append((0.5, al, bl))
        items.append((0.5, ar, br))
    ens = ensemble_from_tensor(system, items)
    norm = ens.norm
    min_eig = np.nan
    if omega is not None:
        gap = system.to_tensor(ens.density() - omega.density)
        min_eig = float(np.linalg.eigvalsh(la.herm(gap)).min())
    return DominatingSeparable(ens, float(norm), min_eig)


# ---------------------------------------------------------------------------
# scalar bounds


def c_p(p):
    _check_p(p, open_top=True)
    return 1.0 / ((1.0 - p) * np.e)


def mutual_information_bound(z, p):
    """``c_p z + eta(z - 1) - eta(z)``, nondecreasing in ``z >= 1``."""
    _check_p(p, open_top=True)
    if not z >= 1.0:
        raise ParameterError(f"z = {z} must be at least 1")
    return float(c_p(p) * z + la.eta(z - 1.0) - la.eta(z))


def otani_bound(z, p):
    """``z ln z + c_p z^p``."""
    _check_p(p, open_top=True)
    if not z >= 1.0:
        raise ParameterError(f"z = {z} must be at least 1")
    return float(z * np.log(z) + c_p(p) * z ** p)


@dataclass(frozen=True)
class IntermediateValue:
    value: float
    index: int
    rejected: tuple


def intermediate_entropy_eval(factor, omega_density, candidates, domain, tol=1e-10):
    """``min S_R(phi) / lam`` over candidates ``(phi_density, lam)``.

    ``factor`` is the intermediate type I factor ``R`` (an FdAlgebra on the
    ambient space), ``omega_density`` the ambient density of the joint state
    and ``domain`` the algebra on which ``phi >= lam omega`` is checked.
    Candidates failing domination are rejected with their margin.
    """
    from .entropy import von_neumann_entropy
    if len(factor.blocks) != 1:
        raise ValidityError("intermediate algebra is not a factor")
    best, best_i, rejected = np.inf, -1, []
    for i, (phi, lam) in enumerate(candidates):
        if not 0 < lam <= 1:
            raise ParameterError("lam must lie in (0, 1]")
        gap = domain.expectation(phi - lam * omega_density)
        margin = _algebra_min_eig(domain, gap)
        if margin < -tol:
            rejected.append((i, margin))
            continue
        val = von_neumann_entropy(functional(factor, phi, "state")) / lam
        if val < best:
            best, best_i = val, i
    if best_i < 0:
        raise ValidityError(f"no candidate dominates the state: {rejected}")
    return IntermediateValue(float(best), best_i, tuple(rejected))


def _algebra_min_eig(M, dens):
    return min(float(np.linalg.eigvalsh(la.herm(r)).min())
               for r in M.extract(dens))


def sigma_relative_entropy_witness(dom):
    """The normalised dominating functional as an E_R warm start."""
    return dom.ensemble.scaled(1.0 / dom.norm)


def chain_mutual_information(sp):
    return mutual_information(sp.system, sp.state)

