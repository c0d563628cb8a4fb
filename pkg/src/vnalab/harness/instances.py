"""Seeded scenario files and their loaders.

Sampling: every density is ``G G^* / tr(G G^*)`` with ``G`` a square complex
Gaussian matrix (independent standard normal real and imaginary parts)
drawn from ``numpy.random.default_rng([seed, kind_code])``. Stored files, not
this generator, are the reproducibility contract across platforms.
"""

import re

import numpy as np

from .. import _linalg as la
from ..algebra import FdAlgebra, full_matrix_algebra, functional, matrix_from_json, matrix_to_json
from ..entanglement import BipartiteSystem, tensor_system
from ..errors import LimitError, ParameterError
from ..nuclearity import SplitPair, doubled_split_pair, minimal_split_pair

SCHEMA_VERSION = 1
MAX_AMBIENT = 64
KINDS = ("state", "bipartite", "split_pair", "inclusion")
_CODES = {k: i for i, k in enumerate(KINDS)}


def _dims(dims):
    if isinstance(dims, (int, np.integer)):
        return [int(dims)]
    if isinstance(dims, str):
        m = re.fullmatch(r"diagonal-in-M_(\d+)", dims)
        if m:
            return [int(m.group(1))]
        return [int(x) for x in re.split(r"[,x ]+", dims.strip()) if x]
    return [int(x) for x in dims]


def _limit(ambient):
    if ambient > MAX_AMBIENT:
        raise LimitError(f"ambient dimension {ambient} exceeds {MAX_AMBIENT}")


def block_algebra(sizes):
    """``M_{n_1} (+) M_{n_2} (+) ...`` on ``C^{sum n_i}``."""
    d = sum(sizes)
    return FdAlgebra(d, tuple((n, 1) for n in sizes), np.eye(d))


def diagonal_algebra(n):
    return FdAlgebra(n, tuple((1, 1) for _ in range(n)), np.eye(n))


def _density_on(M, rng):
    parts = [la.random_density(rng, n) for n, _ in M.blocks]
    w = rng.dirichlet(np.ones(len(parts)))
    rho = M.embed([wk * p for wk, p in zip(w, parts)])
    # block densities carry the multiplicity; renormalise the ambient trace
    return rho / np.trace(rho).real


def generate_instance(kind, dims, seed, model="doubled"):
    """Deterministic scenario dictionary for ``(kind, dims, seed)``."""
    if kind not in KINDS:
        raise ParameterError(f"unknown instance kind {kind!r}")
    dims = _dims(dims)
    if not dims or min(dims) < 1:
        raise ParameterError("dimensions must be positive")
    rng = np.random.default_rng([int(seed), _CODES[kind]])
    base = {"schema_version": SCHEMA_VERSION, "kind": kind, "dims": dims,
            "seed": int(seed)}
    if kind == "state":
        M = full_matrix_algebra(dims[0]) if len(dims) == 1 else block_algebra(dims)
        _limit(M.ambient_dim)
        base.update(algebra=M.to_dict(), density=matrix_to_json(_density_on(M, rng)),
                    reference=matrix_to_json(_density_on(M, rng)))
    elif kind == "bipartite":
        if len(dims) != 2:
            raise ParameterError("bipartite instances need two dimensions")
        _limit(dims[0] * dims[1])
        system = tensor_system(*dims)
        rho = la.random_density(rng, dims[0] * dims[1])
        base.update(A=system.A.to_dict(), B=system.B.to_dict(),
                    omega_density=matrix_to_json(rho))
    elif kind == "split_pair":
        if len(dims) != 2:
            raise ParameterError("split pairs need two dimensions")
        a, b = dims
        if model == "doubled":
            _limit((a * b) ** 2)
            rho = la.random_density(rng, a * b)
            sp = doubled_split_pair(rho, a, b)
            base["rho"] = matrix_to_json(rho)
        elif model == "minimal":
            if a != b:
                raise ParameterError("the minimal model needs equal dimensions")
            _limit(a * a)
            sp = minimal_split_pair(la.random_pure(rng, a * a))
        else:
            raise ParameterError(f"unknown split-pair model {model!r}")
        base.update(sp.to_dict())
    else:
        if len(dims) == 1:
            n = dims[0]
            _limit(n)
            M, N = full_matrix_algebra(n), diagonal_algebra(n)
            phi = np.diag(rng.dirichlet(np.ones(n))).astype(complex)
            base["inclusion"] = "diagonal"
        elif len(dims) == 2:
            a, b = dims
            _limit(a * b)
            M = full_matrix_algebra(a * b)
            N = FdAlgebra(a * b, ((a, b),), np.eye(a * b))
            phi = np.kron(la.random_density(rng, a), la.random_density(rng, b))
            base["inclusion"] = "tensor"
        else:
            raise ParameterError("inclusion instances take one or two dimensions")
        base.update(M=M.to_dict(), N=N.to_dict(), phi=matrix_to_json(phi))
    return base


# ---------------------------------------------------------------------------
# loaders


def _check_schema(d):
    if d.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise ParameterError(f"unsupported schema_version {d.get('schema_version')}")


def load_state_pair(d):
    _check_schema(d)
    M = FdAlgebra.from_dict(d["algebra"])
    phi = functional(M, matrix_from_json(d["density"]))
    ref = d.get("reference")
    psi = functional(M, matrix_from_json(ref)) if ref is not None else None
    return M, phi, psi


def load_bipartite(d):
    _check_schema(d)
    system = BipartiteSystem(FdAlgebra.from_dict(d["A"]), FdAlgebra.from_dict(d["B"]))
    omega = system.functional(matrix_from_json(d["omega_density"]), "state")
    return system, omega


def load_split_pair(d):
    _check_schema(d)
    system = BipartiteSystem(FdAlgebra.from_dict(d["A"]), FdAlgebra.from_dict(d["B"]))
    return SplitPair(system, matrix_from_json(d["Omega"]), d.get("model", "custom"))


def load_inclusion(d):
    _check_schema(d)
    M = FdAlgebra.from_dict(d["M"])
    N = FdAlgebra.from_dict(d["N"])
    phi = functional(M, matrix_from_json(d["phi"]), "state")
    return N, M, phi
