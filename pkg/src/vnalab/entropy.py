"""Relative entropy (three routes), von Neumann entropy, conditional entropy.

All values are in nats. An infinite relative entropy is the dedicated
token :data:`INF`, never an overflowed float.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import _linalg as la
from .algebra import Functional, functional
from .errors import (
    DecompositionError,
    DomainError,
    NotApplicableError,
    ParameterError,
)
from .modular import gns, natural_cone_vector, tomita

SUPPORT_TOL = 1e-9


class _Infinity(float):
    """``+inf`` produced by a failed support condition."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls, float("inf"))
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


def is_infinite(value):
    return value is INF


def to_json_value(value):
    return "+inf" if value is INF else float(value)


def _check_pair(phi, psi):
    if phi.algebra is not psi.algebra and not phi.algebra.same_as(psi.algebra):
        raise DomainError("relative entropy needs functionals on one algebra")
    for f in (phi, psi):
        if f.kind not in ("positive", "state"):
            raise DomainError("relative entropy needs positive functionals")


def _umegaki(phi, psi):
    total = 0.0
    for rk, sk in zip(phi.block_densities(), psi.block_densities()):
        wr, vr = la.eigh(rk)
        ws, vs = la.eigh(sk)
        keep_s = ws > la.ZERO_EIG
        outside = vr[:, wr > la.ZERO_EIG]
        if outside.size:
            kernel = vs[:, ~keep_s]
            leak = la.dag(kernel) @ outside * np.sqrt(wr[wr > la.ZERO_EIG])
            if np.linalg.norm(leak) > SUPPORT_TOL:
                return INF
        total += float(np.sum(wr[wr > la.ZERO_EIG] * np.log(wr[wr > la.ZERO_EIG])))
        log_s = (vs[:, keep_s] * np.log(ws[keep_s])) @ la.dag(vs[:, keep_s])
        total -= float(np.trace(rk @ log_s).real)
    return total


def _reference_form(M):
    return gns(M, functional(M, M.tracial_density()))


def _modular(phi, psi):
    sf = _reference_form(phi.algebra)
    xi = natural_cone_vector(sf, phi)
    eta = natural_cone_vector(sf, psi)
    if np.linalg.norm(xi) == 0:
        return 0.0
    if np.linalg.norm(eta) == 0:
        return INF
    rel = tomita(sf.algebra, eta, xi)
    # s(phi) <= s(psi) iff xi is fixed by the support [M' eta] of psi
    if np.linalg.norm(xi - rel.s_phi @ xi) > SUPPORT_TOL * np.linalg.norm(xi):
        return INF
    return float(-np.vdot(xi, rel.log_delta() @ xi).real)


def relative_entropy(phi, psi, method="umegaki"):
    """Araki relative entropy ``S(phi || psi)`` in nats."""
    _check_pair(phi, psi)
    if method == "umegaki":
        return _umegaki(phi, psi)
    if method == "modular":
        return _modular(phi, psi)
    raise ParameterError(f"unknown method {method!r}")


@dataclass(frozen=True)
class CocycleDerivative:
    estimate: float
    step: float
    constant: float


def cocycle_derivative(phi, psi, h=1e-4):
    """Central difference of ``t -> i phi((D psi : D phi)_t)`` at ``t = 0``.

    The cocycle is realised as ``Delta_{eta,xi}^{it} Delta_{xi}^{-it}`` on
    the cone vectors, so non-faithful ``phi`` is handled on its support.
    ``constant`` estimates ``C`` in the ``C h^2`` error from the step-2h
    difference.
    """
    if not 1e-6 <= h <= 1e-2:
        raise ParameterError("step must lie in [1e-6, 1e-2]")
    if relative_entropy(phi, psi) is INF:
        raise NotApplicableError("relative entropy is infinite")
    sf = _reference_form(phi.algebra)
    xi = natural_cone_vector(sf, phi)
    eta = natural_cone_vector(sf, psi)
    rel = tomita(sf.algebra, eta, xi)
    own = tomita(sf.algebra, xi, xi)
    w1, v1 = la.eigh(rel.delta)
    w2, v2 = la.eigh(own.delta)
    a = la.dag(v1) @ xi
    b = la.dag(v2) @ xi
    cross = la.dag(v1) @ v2
    k1 = w1 > la.CLAMP_EIG
    k2 = w2 > la.CLAMP_EIG
    l1 = np.where(k1, np.log(np.where(k1, w1, 1.0)), 0.0)
    l2 = np.where(k2, np.log(np.where(k2, w2, 1.0)), 0.0)

    def f(t):
        p1 = np.where(k1, np.exp(1j * t * l1), 0.0)
        p2 = np.where(k2, np.exp(-1j * t * l2), 0.0)
        return np.vdot(a, p1 * (cross @ (p2 * b)))

    def central(step):
        return float((1j * (f(step) - f(-step)) / (2 * step)).real)

    d1 = central(h)
    d2 = central(2 * h)
    const = abs(d2 - d1) / (3 * h * h)
    return CocycleDerivative(d1, h, const)


def relative_entropy_cocycle_check(phi, psi, h=1e-4):
    """Cocycle-derivative estimate of ``S(phi || psi)``."""
    return cocycle_derivative(phi, psi, h).estimate


def relative_entropy_record(phi, psi, method="umegaki", tolerance=1e-8):
    value = relative_entropy(phi, psi, method)
    return {"value": to_json_value(value), "method": method,
            "tolerance": tolerance, "witnesses": []}


# ---------------------------------------------------------------------------
# von Neumann entropy


def von_neumann_entropy(phi):
    """``-sum eta`` over the spectra of the block densities."""
    if phi.kind != "state":
        raise DomainError("von Neumann entropy needs a state")
    return float(sum(la.entropy_of_spectrum(np.linalg.eigvalsh(la.herm(r)))
                     for r in phi.block_densities()))


def _check_ensemble(phi, ensemble, tol=1e-10):
    lams = np.array([float(l) for l, _ in ensemble])
    if np.any(lams <= 0) or abs(lams.sum() - 1.0) > tol:
        raise DecompositionError("weights must be positive and sum to one",
                                 abs(lams.sum() - 1.0))
    rec = sum(l * f.density for l, f in ensemble)
    resid = float(np.linalg.norm(rec - phi.density))
    if resid > tol:
        raise DecompositionError(f"ensemble does not reconstruct the state "
                                 f"(residual {resid:.2e})", resid)


def entropy_decomposition_value(phi, ensemble):
    """``sum_i lambda_i S(phi_i || phi)`` for ``phi = sum_i lambda_i phi_i``."""
    _check_ensemble(phi, ensemble)
    total = 0.0
    for lam, f in ensemble:
        v = relative_entropy(f, phi)
        if v is INF:
            return INF
        total += lam * v
    return total


def spectral_ensemble(phi):
    """Orthogonal pure-state decomposition attaining ``S(phi)``."""
    M = phi.algebra
    out = []
    for k, rk in enumerate(phi.block_densities()):
        w, v = la.eigh(rk)
        for lam, vec in zip(w, v.T):
            if lam <= la.ZERO_EIG:
                continue
            parts = [np.zeros((n, n), dtype=complex) for n, _ in M.blocks]
            parts[k] = np.outer(vec, vec.conj())
            proj = M.embed(parts)
            out.append((float(lam), functional(M, proj / np.trace(proj).real,
                                               "state")))
    total = sum(l for l, _ in out)
    return [(l / total, f) for l, f in out]


# ---------------------------------------------------------------------------
# conditional entropy


@dataclass(frozen=True)
class ConditionalEntropy:
    value: float
    ensemble: list
    runs: int


def _multiplicity(A):
    return A.embed([m * np.eye(n) for n, m in A.blocks])


class _EnsembleObjective:
    """``J = sum_i h_A(E_A tau_i) + lambda_i ln lambda_i`` (to be minimised)
    over ``tau_i = R T Q_i T R``, ``Q_i = G_i G_i^*``, ``T = (sum Q)^{-1/2}``,
    ``R = rho^{1/2}``; ``G_i`` has coordinates in the basis of ``B``."""

    def __init__(self, phi, A, k):
        self.B = phi.algebra
        self.A = A
        self.k = k
        self.R = la.psd_sqrt(phi.density)
        self.mult = _multiplicity(A)
        self.basis = self.B.basis
        self.dim = self.B.dim

    def unpack(self, x):
        c = x[: self.k * self.dim] + 1j * x[self.k * self.dim:]
        c = c.reshape(self.k, self.dim)
        return np.tensordot(c, self.basis, axes=1)

    def taus(self, G):
        Q = np.array([g @ la.dag(g) for g in G])
        S = la.herm(Q.sum(axis=0))
        T = la.psd_power(S, -0.5)
        E = np.array([T @ q @ T for q in Q])
        tau = np.array([la.herm(self.R @ e @ self.R) for e in E])
        return Q, S, T, E, tau

    def value_and_grad(self, x):
        G = self.unpack(x)
        Q, S, T, E, tau = self.taus(G)
        J = 0.0
        grads_E = []
        for t in tau:
            ta = la.herm(self.A.expectation(t))
            lam = float(np.trace(ta).real)
            mt = la.herm(self.mult @ ta)
            log_mt = la.psd_log(mt)
            J += -float(np.trace(ta @ log_mt).real)
            if lam > 0:
                J += lam * np.log(lam)
            gam = -log_mt + (np.log(lam) if lam > 0 else 0.0) * np.eye(len(t))
            grads_E.append(la.herm(self.R @ gam @ self.R))
        Y = sum(q @ T @ g + g @ T @ q for q, g in zip(Q, grads_E))
        LY = la.frechet_adjoint(S, la.herm(Y), lambda w: w ** -0.5,
                                lambda w: -0.5 * w ** -1.5)
        grad = []
        for g_e, g in zip(grads_E, G):
            gq = T @ g_e @ T + LY
            xg = 2.0 * gq @ g
            grad.append(self.B.coordinates(xg))
        grad = np.array(grad).reshape(-1)
        return J, np.concatenate([grad.real, grad.imag])

    def ensemble(self, x):
        G = self.unpack(x)
        *_, tau = self.taus(G)
        out = []
        for t in tau:
            lam = float(np.trace(t).real)
            if lam > 1e-14:
                out.append((lam, t / lam))
        return out


def _materialise(phi, raw):
    B = phi.algebra
    lams = np.array([l for l, _ in raw])
    lams = lams / lams.sum()
    states = []
    for l, rho in raw:
        rho = B.expectation(la.herm(rho))
        rho = la.pos_part(rho)
        states.append(rho / np.trace(rho).real)
    # absorb rounding into the heaviest term so the ensemble reconstructs exactly
    rec = sum(l * r for l, r in zip(lams, states))
    j = int(np.argmax(lams))
    fixed = states[j] + (phi.density - rec) / lams[j]
    if np.linalg.eigvalsh(la.herm(fixed)).min() >= -1e-13:
        states[j] = la.herm(fixed)
    out = []
    for l, r in zip(lams, states):
        try:
            out.append((float(l), functional(B, r, "state")))
        except DomainError:
            return None
    try:
        _check_ensemble(phi, out)
    except DecompositionError:
        return None
    return out


def decomposition_value(phi, A, ensemble):
    """``sum_i lambda_i S_A(phi_i || phi)`` (restrictions to ``A``)."""
    _check_ensemble(phi, ensemble)
    ref = phi.restrict(A)
    total = 0.0
    for lam, f in ensemble:
        v = relative_entropy(f.restrict(A), ref)
        if v is INF:
            return INF
        total += lam * v
    return total


def conditional_entropy(phi, A, K=8, R=32, seed=0, witnesses=()):
    """Certified lower bound of ``H_phi^B(A)`` with its achieving ensemble.

    Runs one optimisation for every ``(k, r)`` with ``k <= K`` terms and
    ``r < R``; each run is seeded by ``(seed, k, r)`` so the estimate is
    nondecreasing in ``K`` and ``R``. ``witnesses`` are extra ensembles
    evaluated as given.
    """
    B = phi.algebra
    if phi.kind != "state":
        raise DomainError("conditional entropy needs a state")
    if A.ambient_dim != B.ambient_dim or not B.includes(A):
        raise DomainError("A must be a subalgebra of the state's algebra")
    if K < 1 or R < 1:
        raise ParameterError("K and R must be positive")
    best = [(1.0, phi)]
    best_val = 0.0
    candidates = [spectral_ensemble(phi)] + [list(w) for w in witnesses]
    for ens in candidates:
        v = decomposition_value(phi, A, ens)
        if v > best_val:
            best, best_val = ens, v
    runs = 0
    for k in range(2, K + 1):
        obj = _EnsembleObjective(phi, A, k)
        for r in range(R):
            rng = np.random.default_rng([seed, k, r])
            x0 = rng.standard_normal(2 * k * obj.dim)
            res = minimize(obj.value_and_grad, x0, jac=True, method="L-BFGS-B",
                           options={"maxiter": 200})
            runs += 1
            ens = _materialise(phi, obj.ensemble(res.x))
            if ens is None:
                continue
            v = decomposition_value(phi, A, ens)
            if v is not INF and v > best_val:
                best, best_val = ens, v
    return ConditionalEntropy(float(best_val), best, runs)
