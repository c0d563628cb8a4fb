"""Standard forms, Tomita operators, natural cones and Connes cocycles.

Conjugate-linear operators are stored as a linear matrix ``L`` acting after
coordinate conjugation, ``S v = L conj(v)``.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _linalg as la
from .algebra import (
    FdAlgebra,
    Functional,
    commutant,
    functional,
    matrix_to_json,
)
from .errors import DegenerateInputError, DomainError, SupportError

MODULAR_TOL = 1e-9


def antilinear_compose(l1, l2):
    """Linear factor of ``(L1 C)(L2 C) = L1 conj(L2)`` -- the result is linear."""
    return l1 @ l2.conj()


def antilinear_sandwich(lj, x):
    """Linear operator ``J x J`` for ``J = lj C``."""
    return lj @ x.conj() @ lj.conj()


@dataclass(frozen=True, eq=False)
class RelativeModular:
    """Polar data of the Tomita relative operator ``S_{xi,eta}``.

    ``S_{xi,eta}(x eta + zeta) = s(psi) x^* xi`` for ``x`` in the algebra and
    ``zeta`` orthogonal to the closure of ``M eta``.
    """

    S: np.ndarray          # linear factor of S_{xi,eta}
    J: np.ndarray          # linear factor of J_{xi,eta}
    delta: np.ndarray      # Delta_{xi,eta}
    s_phi: np.ndarray      # [M' xi]
    s_psi: np.ndarray      # [M' eta]
    sp_phi: np.ndarray     # [M xi]
    sp_psi: np.ndarray     # [M eta]

    def delta_power(self, z):
        if np.isscalar(z) and np.iscomplexobj(z):
            w, v = la.eigh(self.delta)
            fw = np.zeros(len(w), dtype=complex)
            keep = w > la.CLAMP_EIG
            fw[keep] = np.exp(z * np.log(w[keep]))
            return (v * fw) @ la.dag(v)
        return la.psd_power(self.delta, z)

    @cached_property
    def support(self):
        return la.support_projection(self.delta, tol=la.CLAMP_EIG)

    def log_delta(self):
        return la.psd_log(self.delta)


def tomita(N, xi, eta):
    """Relative Tomita operator for a concrete algebra ``N`` on ``C^D``.

    Neither vector needs to be cyclic or separating; support projections
    are tracked explicitly.
    """
    xi = np.asarray(xi, dtype=complex)
    eta = np.asarray(eta, dtype=complex)
    if np.linalg.norm(xi) == 0 or np.linalg.norm(eta) == 0:
        raise DegenerateInputError("Tomita operator needs nonzero vectors")
    Nc = commutant(N)
    s_phi = _cyclic_projection(Nc, xi)
    s_psi = _cyclic_projection(Nc, eta)
    sp_phi = _cyclic_projection(N, xi)
    sp_psi = _cyclic_projection(N, eta)
    basis = N.basis
    V = np.array([b @ eta for b in basis]).T
    W = np.array([s_psi @ (la.dag(b) @ xi) for b in basis]).T
    L = W @ np.linalg.pinv(V.conj(), rcond=1e-12)
    delta = la.herm(L.T @ L.conj())
    # polar factor straight from the SVD: L = W s V^* gives J = W V^* on the support
    w, sv, vh = np.linalg.svd(L)
    keep = sv > la.CLAMP_EIG ** 0.5 * max(1.0, sv[0])
    J = w[:, keep] @ vh[keep]
    return RelativeModular(L, J, delta, s_phi, s_psi, sp_phi, sp_psi)


def _cyclic_projection(N, v):
    cols = np.array([b @ v for b in N.basis]).T
    return la.subspace_projector(cols)


@dataclass(frozen=True, eq=False)
class StandardForm:
    """An algebra represented on ``K = C^space_dim`` with a cyclic separating
    vector ``omega``, modular conjugation (linear factor ``J``) and modular
    operator ``delta``.

    ``source`` is the abstract algebra being represented; ``rep_images[k]`` is
    the image of ``source.basis[k]``.
    """

    source: FdAlgebra
    algebra: FdAlgebra
    rep_images: np.ndarray
    omega: np.ndarray
    J: np.ndarray
    delta: np.ndarray

    @property
    def space_dim(self):
        return self.algebra.ambient_dim

    def rep(self, x):
        c = self.source.coordinates(x)
        return np.tensordot(c, self.rep_images, axes=1)

    def pullback(self, op, tol=MODULAR_TOL):
        """Source element ``x`` with ``rep(x) = op``; checks membership."""
        A = np.array([r.reshape(-1) for r in self.rep_images]).T
        c, *_ = np.linalg.lstsq(A, np.asarray(op).reshape(-1), rcond=None)
        resid = np.linalg.norm(A @ c - np.asarray(op).reshape(-1))
        if resid > tol * max(1.0, np.linalg.norm(op)):
            raise DomainError(f"operator is not in the represented algebra "
                              f"(residual {resid:.2e})")
        return self.source.from_coordinates(c)

    def apply_J(self, v):
        return self.J @ np.conj(v)

    def JxJ(self, x):
        return antilinear_sandwich(self.J, x)

    def delta_power(self, z):
        if np.iscomplexobj(z) or isinstance(z, complex):
            w, v = la.eigh(self.delta)
            fw = np.exp(z * np.log(np.clip(w, la.CLAMP_EIG, None)))
            return (v * fw) @ la.dag(v)
        return la.psd_power(self.delta, z)

    def modular_group(self, x, t):
        """``Delta^{it} x Delta^{-it}`` for an operator ``x`` on ``K``."""
        u = self.delta_power(1j * t)
        return u @ x @ la.dag(u)

    def vector_functional(self, v):
        """The functional ``x -> <v, rep(x) v>`` on the source algebra."""
        v = np.asarray(v, dtype=complex)
        vals = np.array([np.vdot(v, r @ v) for r in self.rep_images])
        dens = np.tensordot(vals, self.source.basis.conj().transpose(0, 2, 1), axes=1)
        return functional(self.source, dens)

    @cached_property
    def omega_state(self):
        return self.vector_functional(self.omega)

    @cached_property
    def commutant(self):
        return commutant(self.algebra)

    def relative_delta(self, phi):
        """``Delta_{phi, omega}`` for a positive functional ``phi`` on the source.

        Depends on ``phi`` only: ``<x omega, Delta x omega> = phi(x x^*)``.
        """
        basis = self.source.basis
        V = np.array([r @ self.omega for r in self.rep_images]).T
        G = np.array([[phi(bk @ la.dag(bl)) for bl in basis] for bk in basis])
        Vi = np.linalg.inv(V)
        return la.herm(la.dag(Vi) @ G.T @ Vi)

    def to_dict(self):
        return {
            "space_dim": self.space_dim,
            "source": self.source.to_dict(),
            "algebra": self.algebra.to_dict(),
            "rep_images": [matrix_to_json(r) for r in self.rep_images],
            "omega": matrix_to_json(self.omega),
            "J": {"linear": matrix_to_json(self.J), "conjugate": True},
            "delta": matrix_to_json(self.delta),
        }


def _check_standard(N, omega, tol=1e-10):
    D = N.ambient_dim
    V = np.array([b @ omega for b in N.basis]).T
    s = np.linalg.svd(V, compute_uv=False)
    if N.dim != D or s.min() <= tol * max(1.0, s.max()):
        raise SupportError("vector is not cyclic and separating for the algebra; "
                           "reduce to the support first")


def standard_form(N, omega):
    """Standard form of a concrete algebra ``N`` on ``C^D`` at vector ``omega``."""
    omega = np.asarray(omega, dtype=complex)
    _check_standard(N, omega)
    rm = tomita(N, omega, omega)
    return StandardForm(N, N, N.basis, omega, rm.J, rm.delta)


def gns(M, phi):
    """GNS standard form of ``M`` for a faithful state ``phi``.

    ``K`` is the direct sum of Hilbert-Schmidt spaces ``C^{n_k} (x) C^{n_k}``
    with the algebra acting by left multiplication and ``omega`` the direct
    sum of ``rho_k^{1/2}``. ``J`` and ``Delta`` are then obtained from the
    Tomita operator.
    """
    if not isinstance(phi, Functional) or phi.kind != "state":
        raise DomainError("gns needs a state")
    if not phi.is_faithful:
        raise SupportError("state is not faithful; restrict the algebra to its "
                           "support before building a standard form")
    blocks = M.blocks
    K = sum(n * n for n, _ in blocks)
    Kalg = FdAlgebra(K, tuple((n, n) for n, _ in blocks), np.eye(K))
    images = []
    for b in M.basis:
        images.append(Kalg.embed(M.extract(b)))
    omega_parts = []
    for (n, m), rk in zip(blocks, phi.block_densities()):
        omega_parts.append(la.psd_sqrt(rk).reshape(-1))
    omega = np.concatenate(omega_parts)
    rm = tomita(Kalg, omega, omega)
    return StandardForm(M, Kalg, np.array(images), omega, rm.J, rm.delta)


def relative_modular(sf, xi, eta):
    """Relative modular data ``S_{xi,eta} = J_{xi,eta} Delta_{xi,eta}^{1/2}``."""
    return tomita(sf.algebra, xi, eta)


def natural_cone_vector(sf, phi):
    """Unique representative of a positive functional in the natural cone."""
    if phi.kind not in ("positive", "state"):
        raise DomainError("natural cone vectors represent positive functionals")
    d = sf.relative_delta(phi)
    return sf.apply_J(la.psd_sqrt(d) @ sf.omega)


def natural_cone_contains(sf, v, tol=MODULAR_TOL):
    v = np.asarray(v, dtype=complex)
    if np.linalg.norm(v) == 0:
        return True
    phi = sf.vector_functional(v)
    w = natural_cone_vector(sf, phi)
    return float(np.linalg.norm(v - w)) <= tol * max(1.0, np.linalg.norm(v))


def cone_sample(sf, x):
    """``Delta^{1/4} x^* x omega`` -- a natural-cone vector for any ``x``."""
    r = sf.rep(x)
    return la.psd_power(sf.delta, 0.25) @ (la.dag(r) @ r @ sf.omega)


def connes_cocycle(phi, psi, t):
    """``(D phi : D psi)_t`` as an element of the common algebra."""
    if phi.algebra is not psi.algebra and not phi.algebra.same_as(psi.algebra):
        raise DomainError("states live on different algebras")
    if not (phi.is_faithful and psi.is_faithful):
        raise SupportError("cocycle requires faithful states")
    sf = gns(phi.algebra, psi)
    xi = natural_cone_vector(sf, phi)
    eta = sf.omega
    rel = tomita(sf.algebra, xi, eta)
    op = rel.delta_power(1j * t) @ sf.delta_power(-1j * t)
    return sf.pullback(op)
