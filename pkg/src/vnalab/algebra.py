"""Finite-dimensional von Neumann algebras and their linear functionals.

An :class:`FdAlgebra` is a unital *-subalgebra of ``M_d(C)`` stored through
its Artin-Wedderburn data: a list of blocks ``(n_k, m_k)`` and a unitary
``W`` whose columns form an adapted basis. Elements are the matrices

    x = W (x_1 (x) 1_{m_1}  +  ...  +  x_K (x) 1_{m_K}) W^*,

with ``x_k`` in ``M_{n_k}`` and the block spaces ``C^{n_k} (x) C^{m_k}`` laid
out consecutively in row-major order.
"""

from dataclasses import dataclass
from functools import cached_property
import hashlib
import json

import numpy as np

from . import _linalg as la
from .errors import (
    DecompositionError,
    DomainError,
    InvalidDimensionError,
    ShapeError,
)

_SEED = 20240917


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FdAlgebra:
    ambient_dim: int
    blocks: tuple
    basis_unitary: np.ndarray

    def __post_init__(self):
        blocks = tuple((int(n), int(m)) for n, m in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "basis_unitary", _frozen(self.basis_unitary))
        d = self.ambient_dim
        if d < 1 or any(n < 1 or m < 1 for n, m in blocks):
            raise InvalidDimensionError("dimensions must be positive")
        if sum(n * m for n, m in blocks) != d:
            raise InvalidDimensionError(
                f"blocks {blocks} do not fill ambient dimension {d}")
        if self.basis_unitary.shape != (d, d):
            raise ShapeError("basis unitary must be d x d")
        if not la.is_unitary(self.basis_unitary, 1e-10):
            raise DecompositionError("basis matrix is not unitary")

    # -- structure -------------------------------------------------------

    @property
    def dim(self):
        """Linear dimension ``sum n_k^2``."""
        return sum(n * n for n, _ in self.blocks)

    @property
    def center_dim(self):
        return len(self.blocks)

    @property
    def is_factor(self):
        return len(self.blocks) == 1

    @cached_property
    def _offsets(self):
        off, out = 0, []
        for n, m in self.blocks:
            out.append(off)
            off += n * m
        return tuple(out)

    def block_columns(self, k):
        n, m = self.blocks[k]
        o = self._offsets[k]
        return self.basis_unitary[:, o:o + n * m]

    def embed(self, parts):
        """Ambient matrix from per-block matrices ``x_k``."""
        d = self.ambient_dim
        inner = np.zeros((d, d), dtype=complex)
        for k, ((n, m), xk) in enumerate(zip(self.blocks, parts)):
            o = self._offsets[k]
            inner[o:o + n * m, o:o + n * m] = np.kron(xk, np.eye(m))
        w = self.basis_unitary
        return w @ inner @ la.dag(w)

    def extract(self, x):
        """Per-block matrices of the trace-preserving expectation of ``x``."""
        w = self.basis_unitary
        y = la.dag(w) @ np.asarray(x) @ w
        parts = []
        for k, (n, m) in enumerate(self.blocks):
            o = self._offsets[k]
            blk = y[o:o + n * m, o:o + n * m].reshape(n, m, n, m)
            parts.append(np.trace(blk, axis1=1, axis2=3) / m)
        return parts

    def expectation(self, x):
        """Trace-preserving conditional expectation of ``M_d`` onto the algebra."""
        return self.embed(self.extract(x))

    def distance(self, x):
        x = np.asarray(x)
        return float(np.linalg.norm(x - self.expectation(x)))

    def contains(self, x, tol=la.STRUCT_TOL):
        x = np.asarray(x)
        return self.distance(x) <= tol * max(1.0, float(np.linalg.norm(x)))

    @cached_property
    def identity(self):
        return np.eye(self.ambient_dim, dtype=complex)

    @cached_property
    def basis(self):
        """Hilbert-Schmidt orthonormal basis ``W (e_ij (x) 1_m) W^* / sqrt(m)``."""
        out = []
        for k, (n, m) in enumerate(self.blocks):
            cols = self.block_columns(k)
            for i in range(n):
                for j in range(n):
                    e = np.zeros((n, n))
                    e[i, j] = 1.0
                    inner = np.kron(e, np.eye(m)) / np.sqrt(m)
                    out.append(cols @ inner @ la.dag(cols))
        arr = np.array(out)
        arr.setflags(write=False)
        return arr

    @cached_property
    def basis_matrix(self):
        """``d^2 x dim`` matrix whose columns are the vectorised basis."""
        return np.array([b.reshape(-1) for b in self.basis]).T

    def coordinates(self, x):
        """Coefficients of ``x`` in :attr:`basis` (HS inner products)."""
        return la.dag(self.basis_matrix) @ np.asarray(x).reshape(-1)

    def from_coordinates(self, c):
        d = self.ambient_dim
        return (self.basis_matrix @ c).reshape(d, d)

    def block_projections(self):
        return [c @ la.dag(c) for c in
                (self.block_columns(k) for k in range(len(self.blocks)))]

    def center_basis(self):
        return self.block_projections()

    def minimal_projection(self, k=0):
        n, m = self.blocks[k]
        e = np.zeros((n, n))
        e[0, 0] = 1.0
        parts = [np.zeros((nn, nn)) for nn, _ in self.blocks]
        parts[k] = e
        return self.embed(parts)

    def random_element(self, rng, hermitian=False):
        c = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
        x = self.from_coordinates(c)
        return la.herm(x) if hermitian else x

    def random_unitary(self, rng):
        return self.embed([la.random_unitary(rng, n) for n, _ in self.blocks])

    def random_state_density(self, rng, rank=None):
        """Faithful (by default) state density, block weights random."""
        weights = rng.dirichlet(np.ones(len(self.blocks)))
        parts = []
        for (n, m), wk in zip(self.blocks, weights):
            r = None if rank is None else min(rank, n)
            parts.append(wk * la.random_density(rng, n, r) / m)
        return self.embed(parts)

    def tracial_density(self):
        """Density of the state giving every block equal weight per unit trace."""
        return self.identity / self.ambient_dim

    # -- comparisons -----------------------------------------------------

    @cached_property
    def projector(self):
        """Orthogonal projector (on ``C^{d^2}``) onto the algebra."""
        b = self.basis_matrix
        return b @ la.dag(b)

    def includes(self, other, tol=1e-9):
        """``other`` is a subset of ``self`` (as subspaces of ``M_d``)."""
        return inclusion_residual(other, self) <= tol

    def same_as(self, other, tol=1e-9):
        if self.ambient_dim != other.ambient_dim:
            return False
        return equality_residual(self, other) <= tol

    # -- serialisation ---------------------------------------------------

    def to_dict(self):
        return {
            "ambient_dim": self.ambient_dim,
            "blocks": [list(b) for b in self.blocks],
            "basis_unitary": matrix_to_json(self.basis_unitary),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(int(d["ambient_dim"]), tuple(tuple(b) for b in d["blocks"]),
                   matrix_from_json(d["basis_unitary"]))

    @cached_property
    def ref(self):
        """Content hash used as ``algebra_ref`` in serialised functionals."""
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def __repr__(self):
        return f"FdAlgebra(ambient_dim={self.ambient_dim}, blocks={list(self.blocks)})"


def inclusion_residual(sub, sup):
    """Largest distance from a basis element of ``sub`` to ``sup``."""
    if sub.ambient_dim != sup.ambient_dim:
        raise ShapeError("ambient dimensions differ")
    return max(sup.distance(b) for b in sub.basis)


def equality_residual(a, b):
    if a.ambient_dim != b.ambient_dim:
        raise ShapeError("ambient dimensions differ")
    if a.dim != b.dim:
        return float("inf")
    # equal dimensions: mutual inclusion is equality
    return max(inclusion_residual(a, b), inclusion_residual(b, a))


# ---------------------------------------------------------------------------
# construction


def full_matrix_algebra(n):
    """``M_n`` acting on ``C^n``."""
    if int(n) < 1:
        raise InvalidDimensionError("n must be a positive integer")
    n = int(n)
    return FdAlgebra(n, ((n, 1),), np.eye(n))


def scalars(d):
    """``C 1_d``."""
    return FdAlgebra(int(d), ((1, int(d)),), np.eye(int(d)))


def _new_directions(q, w, tol, ref=None):
    """Orthonormal directions of the columns of ``w`` missing from ``q``.

    ``ref`` is the size of the factors that produced ``w``; cutoffs are taken
    relative to it so that products cancelling to rounding noise are dropped.
    """
    scale = float(np.max(np.linalg.norm(w, axis=0))) if w.size else 0.0
    if ref is not None:
        scale = max(scale, ref)
    if scale == 0.0:
        return w[:, :0]
    r = w - q @ (la.dag(q) @ w)
    r = r - q @ (la.dag(q) @ r)
    if np.max(np.linalg.norm(r, axis=0)) <= max(tol, 1e-12) * scale:
        return w[:, :0]
    u, sv, _ = np.linalg.svd(r, full_matrices=False)
    # products that vanish up to rounding are not new directions
    return u[:, sv > max(tol, 1e-12) * scale]


def _probe_closed(q, mult, d, tol, rng, probes=2):
    """Random bilinear test: a product ``x g`` of generic ``x`` in the span
    and generic ``g`` in the generator span escapes the span with
    probability one unless the span is closed."""
    g_all = np.array(mult)
    for _ in range(probes):
        c = rng.standard_normal(q.shape[1]) + 1j * rng.standard_normal(q.shape[1])
        x = (q @ (c / np.linalg.norm(c))).reshape(d, d)
        w = rng.standard_normal(len(mult)) + 1j * rng.standard_normal(len(mult))
        g = np.tensordot(w / np.linalg.norm(w), g_all, axes=1)
        y = (x @ g).reshape(-1)
        r = y - q @ (la.dag(q) @ y)
        scale = np.linalg.norm(x) * np.linalg.norm(g)
        if np.linalg.norm(r) > 0.01 * max(tol, 1e-12) * scale:
            return False
    return True


def _span_closure(gens, tol):
    """Orthonormal basis (columns) of the unital algebra generated by ``gens``."""
    d = gens[0].shape[0]
    mult = []
    for g in gens:
        mult += [g, la.dag(g)]
    start = np.array([np.eye(d, dtype=complex).reshape(-1)] +
                     [g.reshape(-1) for g in mult]).T
    q = _new_directions(np.zeros((d * d, 0), dtype=complex), start, tol)
    frontier = q
    rng = np.random.default_rng(_SEED)
    while frontier.shape[1] and q.shape[1] < d * d:
        if _probe_closed(q, mult, d, tol, rng):
            break
        found = []
        mats = frontier.T.reshape(-1, d, d)
        for g in mult:
            w = (mats @ g).reshape(len(mats), -1).T
            cur = np.hstack([q] + found) if found else q
            extra = _new_directions(cur, w, tol, ref=np.linalg.norm(g))
            if extra.shape[1]:
                found.append(extra)
        frontier = np.hstack(found) if found else q[:, :0]
        q = np.hstack([q, frontier])
    return q


def _cluster(values, gap):
    order = np.argsort(values)
    groups, cur = [], [order[0]]
    for a, b in zip(order[:-1], order[1:]):
        if values[b] - values[a] > gap:
            groups.append(cur)
            cur = [b]
        else:
            cur.append(b)
    groups.append(cur)
    return groups


def _central_projections(q, mult, d, rng, tol):
    # centre = span elements commuting with every generator
    mats = [q[:, i].reshape(d, d) for i in range(q.shape[1])]
    if len(mult) > 6:
        # three generic elements already generate the algebra
        probe = []
        for _ in range(3):
            c = rng.standard_normal(len(mats)) + 1j * rng.standard_normal(len(mats))
            z = np.tensordot(c, np.array(mats), axes=1)
            probe += [z, la.dag(z)]
        mult = probe
    rows = []
    for g in mult:
        rows.append(np.array([(x @ g - g @ x).reshape(-1) for x in mats]).T)
    system = np.vstack(rows)
    coeff = la.null_space(system, tol=1e-9)
    center = [sum(c[i] * mats[i] for i in range(len(mats))) for c in coeff.T]
    for attempt in range(8):
        z = sum(rng.standard_normal() * la.herm(c) +
                rng.standard_normal() * la.herm(1j * c) for c in center)
        w, v = la.eigh(z)
        scale = max(1.0, float(np.max(np.abs(w))))
        groups = _cluster(w, 1e-7 * scale)
        if len(groups) == len(center):
            return [v[:, g] @ la.dag(v[:, g]) for g in groups]
    raise DecompositionError("could not separate central projections",
                             residual=float(len(groups) - len(center)))


def _block_basis(p, mats, rng, tol):
    """Adapted basis of the range of central projection ``p``."""
    d = p.shape[0]
    comp = [p @ x @ p for x in mats]
    vecs = np.array([c.reshape(-1) for c in comp]).T
    r = la.orthonormal_columns(vecs).shape[1]
    n = int(round(np.sqrt(r)))
    rank = int(round(np.trace(p).real))
    if n * n != r or rank % n:
        raise DecompositionError(
            f"block of dimension {r} and rank {rank} is not M_n (x) 1_m",
            residual=float(abs(n * n - r)))
    m = rank // n
    pr = la.orthonormal_columns(p)
    for attempt in range(8):
        h = la.herm(sum(rng.standard_normal() * c + 1j * rng.standard_normal() * c
                        for c in comp))
        w, v = la.eigh(pr.conj().T @ h @ pr)
        scale = max(1.0, float(np.max(np.abs(w))))
        groups = _cluster(w, 1e-7 * scale)
        if len(groups) == n and all(len(g) == m for g in groups):
            break
    else:
        raise DecompositionError("eigenvalue clusters do not match block shape")
    spaces = [pr @ v[:, g] for g in groups]
    f = spaces[0]
    p1 = f @ la.dag(f)
    units = [p1]
    for j in range(1, n):
        pj = spaces[j] @ la.dag(spaces[j])
        best = None
        for attempt in range(8):
            a = sum((rng.standard_normal() + 1j * rng.standard_normal()) * c
                    for c in comp)
            x = pj @ a @ p1
            nx = la.op_norm(x)
            if nx > 1e-6:
                best = x / nx
                break
        if best is None:
            raise DecompositionError("could not build matrix units")
        units.append(best)
    cols = [units[i] @ f[:, l] for i in range(n) for l in range(m)]
    return n, m, np.array(cols).T


def algebra_from_generators(gens, tol=1e-10):
    """Smallest unital *-algebra containing ``gens``, with certified blocks.

    Raises
    ------
    ShapeError
        Generators are not square or do not share a dimension.
    DecompositionError
        The computed adapted basis fails to block-diagonalise the span
        within ``tol``.
    """
    gens = [np.asarray(g, dtype=complex) for g in gens]
    if not gens:
        raise ShapeError("at least one generator is required")
    d = gens[0].shape[0]
    for g in gens:
        if g.ndim != 2 or g.shape != (d, d):
            raise ShapeError("generators must be square matrices of one size")
    if not 0 < tol <= 1e-4:
        raise DomainError("tol must lie in (0, 1e-4]")
    rng = np.random.default_rng(_SEED)
    q = _span_closure(gens, tol)
    mats = [q[:, i].reshape(d, d) for i in range(q.shape[1])]
    mult = [g for g in gens] + [la.dag(g) for g in gens]
    projs = _central_projections(q, mult, d, rng, tol)
    found = []
    for p in projs:
        n, m, cols = _block_basis(p, mats, rng, tol)
        key_diag = tuple(-np.round(np.diag(p).real, 9))
        found.append(((n, m), key_diag, cols))
    found.sort(key=lambda t: (t[0][0], t[0][1], t[1]))
    w = np.hstack([f[2] for f in found])
    # re-orthonormalise away rounding before certification
    u, _, vh = np.linalg.svd(w)
    w = u @ vh
    alg = FdAlgebra(d, tuple(f[0] for f in found), w)
    resid = max(alg.distance(x) for x in mats)
    if resid > max(tol, 1e-12) * 10 * np.sqrt(d):
        raise DecompositionError(
            f"block separation residual {resid:.3e} exceeds tolerance", resid)
    if abs(alg.dim - len(mats)) != 0:
        raise DecompositionError("dimension count mismatch",
                                 residual=float(alg.dim - len(mats)))
    return alg


def commutant(M):
    """Commutant ``M'`` in the same adapted basis: blocks ``(m_k, n_k)``."""
    cols = []
    blocks = []
    for k, (n, m) in enumerate(M.blocks):
        c = M.block_columns(k)
        perm = [i * m + l for l in range(m) for i in range(n)]
        cols.append(c[:, perm])
        blocks.append((m, n))
    return FdAlgebra(M.ambient_dim, tuple(blocks), np.hstack(cols))


def tensor(M, N):
    """Spatial tensor product on ``C^{d_M} (x) C^{d_N}``."""
    cols, blocks = [], []
    for k, (n1, m1) in enumerate(M.blocks):
        c1 = M.block_columns(k)
        for l, (n2, m2) in enumerate(N.blocks):
            c2 = N.block_columns(l)
            c = np.kron(c1, c2)
            # (i1 l1)(i2 l2) -> (i1 i2)(l1 l2)
            idx = np.arange(n1 * m1 * n2 * m2).reshape(n1, m1, n2, m2)
            perm = idx.transpose(0, 2, 1, 3).reshape(-1)
            cols.append(c[:, perm])
            blocks.append((n1 * n2, m1 * m2))
    return FdAlgebra(M.ambient_dim * N.ambient_dim, tuple(blocks), np.hstack(cols))


def join(M, N, tol=1e-10):
    if M.ambient_dim != N.ambient_dim:
        raise ShapeError("join needs a common ambient space")
    return algebra_from_generators(list(M.basis) + list(N.basis), tol)


def intersection(M, N, tol=1e-10):
    """``M`` intersected with ``N`` as subspaces, returned as an algebra."""
    if M.ambient_dim != N.ambient_dim:
        raise ShapeError("intersection needs a common ambient space")
    qm, qn = M.basis_matrix, N.basis_matrix
    u, s, vh = np.linalg.svd(la.dag(qm) @ qn)
    common = qm @ u[:, s > 1 - 1e-9]
    d = M.ambient_dim
    gens = [common[:, i].reshape(d, d) for i in range(common.shape[1])]
    if not gens:
        gens = [np.eye(d)]
    return algebra_from_generators(gens, tol)


def check_commuting(M, N, tol=la.STRUCT_TOL):
    if M.ambient_dim != N.ambient_dim:
        raise ShapeError("ambient dimensions differ")
    worst = 0.0
    for a in M.basis:
        for b in N.basis:
            worst = max(worst, float(np.linalg.norm(a @ b - b @ a)))
    return worst <= tol


def conjugate_algebra(M, u):
    """``u M u^*`` for a unitary ``u`` of matching size."""
    return FdAlgebra(M.ambient_dim, M.blocks, u @ M.basis_unitary)


def compress(M, q):
    """Algebra of ``q^* x q`` for ``x`` in ``M`` where ``q`` has orthonormal
    columns spanning an ``M``-invariant subspace."""
    return algebra_from_generators([la.dag(q) @ b @ q for b in M.basis])


# ---------------------------------------------------------------------------
# functionals

KINDS = ("general", "selfadjoint", "positive", "state")


def _classify(rho, tol=1e-12):
    if np.linalg.norm(rho - la.dag(rho)) > 1e-10 * max(1.0, np.linalg.norm(rho)):
        return "general"
    w = np.linalg.eigvalsh(la.herm(rho))
    if w.min() < -tol:
        return "selfadjoint"
    if abs(np.trace(rho).real - 1.0) <= tol:
        return "state"
    return "positive"


@dataclass(frozen=True, eq=False)
class Functional:
    """Linear functional ``x -> tr(density x)`` with ``density`` in the algebra."""

    algebra: FdAlgebra
    density: np.ndarray
    kind: str = "general"

    def __post_init__(self):
        rho = _frozen(self.density)
        object.__setattr__(self, "density", rho)
        if self.kind not in KINDS:
            raise DomainError(f"unknown functional kind {self.kind!r}")
        d = self.algebra.ambient_dim
        if rho.shape != (d, d):
            raise ShapeError("density must be an ambient d x d matrix")
        if self.algebra.distance(rho) > 1e-10 * max(1.0, np.linalg.norm(rho)):
            raise DomainError("density does not lie in the algebra")
        if self.kind in ("positive", "state"):
            if np.linalg.eigvalsh(la.herm(rho)).min() < -1e-12:
                raise DomainError("positive functional with negative density")
        if self.kind == "state" and abs(np.trace(rho) - 1.0) > 1e-12:
            raise DomainError("state must have phi(1) = 1")

    def __call__(self, x):
        return complex(np.trace(self.density @ np.asarray(x)))

    def __add__(self, other):
        _same(self, other)
        return functional(self.algebra, self.density + other.density)

    def __sub__(self, other):
        _same(self, other)
        return functional(self.algebra, self.density - other.density)

    def __mul__(self, c):
        return functional(self.algebra, c * self.density)

    __rmul__ = __mul__

    @property
    def unit_value(self):
        return float(np.trace(self.density).real)

    @property
    def norm(self):
        """Dual (trace) norm; equals ``phi(1)`` for positive functionals."""
        if self.kind in ("positive", "state"):
            return self.unit_value
        return la.trace_norm(self.density)

    def block_densities(self):
        """Densities ``rho_k`` with ``phi(x) = sum_k tr(rho_k x_k)``."""
        return [m * r for (n, m), r in
                zip(self.algebra.blocks, self.algebra.extract(self.density))]

    def support(self):
        return la.support_projection(self.density)

    @property
    def is_faithful(self):
        if self.kind not in ("positive", "state"):
            return False
        return all(np.linalg.eigvalsh(la.herm(r)).min() > la.ZERO_EIG
                   for r in self.block_densities())

    def restrict(self, sub):
        """Restriction to a subalgebra sharing the ambient space."""
        if sub.ambient_dim != self.algebra.ambient_dim:
            raise ShapeError("restriction needs a common ambient space")
        return functional(sub, sub.expectation(self.density))

    def normalized(self):
        return functional(self.algebra, self.density / self.unit_value)

    def to_dict(self):
        return {"algebra_ref": self.algebra.ref,
                "density": matrix_to_json(self.density),
                "kind": self.kind}

    @classmethod
    def from_dict(cls, d, algebras):
        alg = algebras[d["algebra_ref"]]
        return cls(alg, matrix_from_json(d["density"]), d["kind"])

    def __repr__(self):
        return f"Functional(kind={self.kind!r}, algebra={self.algebra!r})"


def _same(a, b):
    if a.algebra is not b.algebra and not a.algebra.same_as(b.algebra):
        raise DomainError("functionals live on different algebras")


def functional(M, rho, kind=None):
    """Functional on ``M`` from any ambient density (projected onto ``M``)."""
    rho = M.expectation(np.asarray(rho, dtype=complex))
    if kind is None:
        kind = _classify(rho)
    return Functional(M, rho, kind)


def state(M, rho):
    f = functional(M, rho)
    if f.kind != "state":
        raise DomainError(f"density defines a {f.kind} functional, not a state")
    return f


def vector_state(M, v):
    v = np.asarray(v, dtype=complex)
    return functional(M, np.outer(v, v.conj()))


@dataclass(frozen=True)
class Polar:
    u: np.ndarray
    modulus: Functional


@dataclass(frozen=True)
class FunctionalCalculus:
    adjoint: Functional
    jordan: tuple
    polar: Polar
    polarization: tuple


def adjoint(phi):
    """``phi^*(x) = conj(phi(x^*))``; its density is the adjoint density."""
    return functional(phi.algebra, la.dag(phi.density))


def jordan(phi):
    """Jordan parts of the self-adjoint part of ``phi`` (orthogonal supports)."""
    h = la.herm(phi.density)
    return (functional(phi.algebra, la.pos_part(h)),
            functional(phi.algebra, la.neg_part(h)))


def polar(phi):
    """``phi(x) = |phi|(u x)`` with ``u`` a partial isometry in the algebra."""
    v, s, wh = np.linalg.svd(phi.density)
    keep = s > 1e-12 * max(1.0, s[0] if s.size else 1.0)
    vr, sr, wr = v[:, keep], s[keep], la.dag(wh)[:, keep]
    u = vr @ la.dag(wr)
    mod = functional(phi.algebra, (vr * sr) @ la.dag(vr))
    return Polar(u, mod)


def polarization(phi):
    """Four positive functionals with ``phi = sum_a i^a omega_a``."""
    rho = phi.density
    re = la.herm(rho)
    im = la.herm(-1j * rho)  # (rho - rho^*) / 2i
    M = phi.algebra
    return (functional(M, la.pos_part(re)), functional(M, la.pos_part(im)),
            functional(M, la.neg_part(re)), functional(M, la.neg_part(im)))


def functional_calculus(phi):
    return FunctionalCalculus(adjoint(phi), jordan(phi), polar(phi),
                              polarization(phi))


# ---------------------------------------------------------------------------
# JSON


def matrix_to_json(a):
    a = np.asarray(a)
    if a.ndim == 1:
        return [[float(z.real), float(z.imag)] for z in a]
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def matrix_from_json(rows):
    arr = np.array(rows, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


def dumps(obj):
    return json.dumps(obj, sort_keys=True)
