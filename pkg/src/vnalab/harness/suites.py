"""Registered invariant suites and the runner.

A suite is a pair ``generate(seed, trial) -> instance`` and
``evaluate(instance) -> [Check]``. Instances are plain JSON data; the runner
round-trips each one through JSON before evaluating it, so a stored worst
case replays to the same residuals bit for bit.
"""

import json
import math
import zlib
from dataclasses import dataclass

import numpy as np

from .. import _linalg as la
from ..algebra import (FdAlgebra, algebra_from_generators, full_matrix_algebra,
                       functional, matrix_from_json, matrix_to_json, scalars)
from ..entanglement import (BipartiteSystem, LocalMap, apply_separable_operation,
                            apply_separable_operation_ensemble, ensemble_from_tensor,
                            mutual_information, mutual_information_formula,
                            relative_entanglement_upper, tensor_system)
from ..entropy import (INF, conditional_entropy, decomposition_value,
                       entropy_decomposition_value, relative_entropy,
                       relative_entropy_cocycle_check, spectral_ensemble,
                       von_neumann_entropy)
from ..errors import ParameterError
from ..nuclearity import doubled_split_pair, minimal_split_pair
from ..splitinc import (canonical_entanglement_entropy, canonical_factor,
                        conditional_expectation, takesaki_report,
                        verify_jones_structure)
from . import pipeline, scan
from .instances import block_algebra, diagonal_algebra, generate_instance, load_inclusion
from .report import (SCHEMA_VERSION, at_least, at_most, equal, flag, small,
                     summarize)

ROUTE_TOL = 1e-8
COCYCLE_TOL = 1e-4
ID_TOL = 1e-9
INEQ_TOL = 1e-9


@dataclass(frozen=True)
class Suite:
    name: str
    generate: object
    evaluate: object
    trials: int
    description: str


SUITES = {}


def register(name, trials, description):
    def wrap(pair):
        gen, ev = pair
        SUITES[name] = Suite(name, gen, ev, trials, description)
        return pair
    return wrap


def _rng(seed, name, trial):
    return np.random.default_rng([int(seed), zlib.crc32(name.encode()), int(trial)])


def _J(a):
    return matrix_to_json(a)


def _M(x):
    return matrix_from_json(x)


def _state(M, rho):
    return functional(M, rho, "state")


# ---------------------------------------------------------------------------
# relative entropy: two routes and the cocycle derivative

_ROUTE_ALGEBRAS = ([2], [3], [1, 2], [2, 2])


def _gen_routes(seed, trial):
    rng = _rng(seed, "relative-entropy-routes", trial)
    sizes = _ROUTE_ALGEBRAS[trial % len(_ROUTE_ALGEBRAS)]
    M = full_matrix_algebra(sizes[0]) if len(sizes) == 1 else block_algebra(sizes)
    from .instances import _density_on
    return {"algebra": M.to_dict(), "phi": _J(_density_on(M, rng)),
            "psi": _J(_density_on(M, rng))}


def _eval_routes(inst):
    M = FdAlgebra.from_dict(inst["algebra"])
    phi, psi = _state(M, _M(inst["phi"])), _state(M, _M(inst["psi"]))
    u = relative_entropy(phi, psi, "umegaki")
    m = relative_entropy(phi, psi, "modular")
    c = relative_entropy_cocycle_check(phi, psi, 1e-4)
    return [equal("umegaki-vs-modular", "relative-entropy.routes", u, m, ROUTE_TOL),
            equal("umegaki-vs-cocycle", "relative-entropy.cocycle-derivative", u, c,
                  COCYCLE_TOL)]


register("relative-entropy-routes", 200,
         "Umegaki, modular and cocycle routes agree")((_gen_routes, _eval_routes))


# ---------------------------------------------------------------------------
# support violations


def _gen_support(seed, trial):
    rng = _rng(seed, "support", trial)
    sizes = _ROUTE_ALGEBRAS[trial % len(_ROUTE_ALGEBRAS)]
    M = full_matrix_algebra(sizes[0]) if len(sizes) == 1 else block_algebra(sizes)
    from .instances import _density_on
    phi = _density_on(M, rng)
    psi = _density_on(M, rng)
    # remove a random direction inside the last block from psi
    n = sizes[-1]
    off = sum(sizes[:-1])
    v = np.zeros(M.ambient_dim, dtype=complex)
    v[off:off + n] = la.random_pure(rng, n)
    q = np.eye(M.ambient_dim) - np.outer(v, v.conj())
    psi = la.herm(q @ psi @ q)
    return {"algebra": M.to_dict(), "phi": _J(phi), "psi": _J(psi / np.trace(psi).real)}


def _eval_support(inst):
    M = FdAlgebra.from_dict(inst["algebra"])
    phi, psi = _state(M, _M(inst["phi"])), _state(M, _M(inst["psi"]))
    out = []
    for method in ("umegaki", "modular"):
        v = relative_entropy(phi, psi, method)
        out.append(equal(f"{method}-infinite", "relative-entropy.support", v, INF, 0.5))
    return out


register("support", 50, "support violations give the infinity token")(
    (_gen_support, _eval_support))


# ---------------------------------------------------------------------------
# relative entropy properties


def _kraus(rng, n, k=3):
    G = [rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)) for _ in range(k)]
    T = la.psd_power(sum(la.dag(g) @ g for g in G), -0.5)
    return [g @ T for g in G]


def _gen_re_props(seed, trial):
    rng = _rng(seed, "relative-entropy-properties", trial)
    n = 2 + trial % 3
    r = [la.random_density(rng, n) for _ in range(4)]
    defect = la.random_density(rng, n, rank=n - 1)
    return {
        "n": n, "phi1": _J(r[0]), "phi2": _J(r[1]), "psi1": _J(r[2]), "psi2": _J(r[3]),
        "psi_defect": _J(defect),
        "lam": float(rng.uniform(0.1, 3.0)), "mu": float(rng.uniform(0.1, 3.0)),
        "mix": float(rng.uniform(0.05, 0.95)), "shrink": float(rng.uniform(0.1, 0.9)),
        "a": float(rng.uniform(0.2, 1.0)), "b": float(rng.uniform(0.2, 1.0)),
        "kraus": [_J(k) for k in _kraus(rng, n)],
        "rotation": _J(la.random_unitary(rng, n)),
        "tensor_phi": _J(la.random_density(rng, 4)),
        "tensor_psi": [_J(la.random_density(rng, 2)), _J(la.random_density(rng, 2))],
    }


def _pinch(x):
    return np.diag(np.diag(x))


def _eval_re_props(inst):
    n = inst["n"]
    Mn = full_matrix_algebra(n)
    S = relative_entropy
    r1, r2, s1, s2 = (_M(inst[k]) for k in ("phi1", "phi2", "psi1", "psi2"))
    phi1, phi2, psi1, psi2 = (_state(Mn, x) for x in (r1, r2, s1, s2))
    out = []
    base = S(phi1, psi1)

    lam, mu = inst["lam"], inst["mu"]
    scaled = S(phi1 * lam, psi1 * mu)
    out.append(equal("scaling", "relative-entropy.scaling", scaled,
                     lam * base - lam * math.log(mu / lam), ID_TOL))
    out.append(at_least("pinsker", "relative-entropy.pinsker", base,
                        (phi1 - psi1).norm ** 2 / 2, INEQ_TOL))

    # lower semicontinuity: along a faithful segment any drop below the limit
    # must vanish linearly in t, and approaching a support violation drives
    # the value up
    def drop(t):
        v = S(_state(Mn, (1 - t) * r1 + t * r2), _state(Mn, (1 - t) * s1 + t * s2))
        return max(0.0, base - v)
    out.append(at_most("lower-semicontinuity", "relative-entropy.lsc",
                       drop(1e-8), 0.02 * drop(1e-6), 1e-9))
    dfc = _M(inst["psi_defect"])
    far, close = (S(phi1, _state(Mn, (1 - e) * dfc + e * np.eye(n) / n))
                  for e in (1e-3, 1e-6))
    out.append(at_least("lsc-support-blowup", "relative-entropy.lsc", close, far, INEQ_TOL))

    m = inst["mix"]
    joint = S(_state(Mn, m * r1 + (1 - m) * r2), _state(Mn, m * s1 + (1 - m) * s2))
    out.append(at_most("joint-convexity", "relative-entropy.joint-convexity", joint,
                       m * base + (1 - m) * S(phi2, psi2), INEQ_TOL))

    a, b = inst["a"], inst["b"]
    sup = S(phi1 * a + phi2 * b, psi1)
    out.append(at_least("superadditivity", "relative-entropy.superadditivity", sup,
                        S(phi1 * a, psi1) + S(phi2 * b, psi1), INEQ_TOL))
    w, v = la.eigh(s1)
    smaller = functional(Mn, s1 - inst["shrink"] * w[0] * np.outer(v[:, 0], v[:, 0].conj()))
    out.append(at_most("monotone-in-reference", "relative-entropy.monotone-reference",
                       base, S(phi1, smaller), INEQ_TOL))

    K = [_M(k) for k in inst["kraus"]]
    chan = lambda x: sum(k @ x @ la.dag(k) for k in K)
    out.append(at_most("cp-monotonicity", "relative-entropy.cp-monotonicity",
                       S(_state(Mn, chan(r1)), _state(Mn, chan(s1))), base, INEQ_TOL))

    D = FdAlgebra(n, tuple((1, 1) for _ in range(n)), _M(inst["rotation"]))
    on_c = S(phi1.restrict(scalars(n)), psi1.restrict(scalars(n)))
    on_d = S(phi1.restrict(D), psi1.restrict(D))
    out.append(at_most("restriction-monotone-scalars", "relative-entropy.subalgebra-monotone",
                       on_c, on_d, INEQ_TOL))
    out.append(at_most("restriction-monotone-full", "relative-entropy.subalgebra-monotone",
                       on_d, base, INEQ_TOL))

    N = diagonal_algebra(n)
    lhs = S(phi1, _state(Mn, _pinch(s1)))
    rhs = S(phi1.restrict(N), psi1.restrict(N)) + S(phi1, _state(Mn, _pinch(r1)))
    out.append(equal("expectation-chain-rule", "relative-entropy.chain-rule", lhs, rhs, ID_TOL))

    M4, M2 = full_matrix_algebra(4), full_matrix_algebra(2)
    rt = _M(inst["tensor_phi"])
    q1, q2 = (_M(x) for x in inst["tensor_psi"])
    t1, t2 = la.partial_trace(rt, (2, 2), [0]), la.partial_trace(rt, (2, 2), [1])
    lhs = S(_state(M4, rt), _state(M4, np.kron(q1, q2)))
    rhs = (S(_state(M2, t1), _state(M2, q1)) + S(_state(M2, t2), _state(M2, q2))
           + S(_state(M4, rt), _state(M4, np.kron(t1, t2))))
    out.append(equal("tensor-split", "relative-entropy.tensor-split", lhs, rhs, ID_TOL))
    return out


register("relative-entropy-properties", 100,
         "relative entropy identities and inequalities")((_gen_re_props, _eval_re_props))


# ---------------------------------------------------------------------------
# von Neumann entropy


def _gen_entropy(seed, trial):
    rng = _rng(seed, "entropy-properties", trial)
    n = 2 + trial % 3
    return {"n": n, "phi": _J(la.random_density(rng, n)),
            "omega": _J(la.random_density(rng, n)), "lam": float(rng.uniform(0.05, 0.95)),
            "tripartite": _J(la.random_density(rng, 8)),
            "unitary": _J(la.random_unitary(rng, n)),
            "factor_a": _J(la.random_density(rng, 2)),
            "factor_b": _J(la.random_density(rng, 3)),
            "pure": _J(la.random_pure(rng, n))}


def _vn(rho):
    return von_neumann_entropy(_state(full_matrix_algebra(rho.shape[0]), rho))


def _eval_entropy(inst):
    n = inst["n"]
    Mn = full_matrix_algebra(n)
    r, w, lam = _M(inst["phi"]), _M(inst["omega"]), inst["lam"]
    out = []
    mid = _vn(lam * r + (1 - lam) * w)
    avg = lam * _vn(r) + (1 - lam) * _vn(w)
    out.append(at_least("concavity", "entropy.sandwich", mid, avg, INEQ_TOL))
    out.append(at_most("mixing-bound", "entropy.sandwich", mid,
                       avg + la.eta(lam) + la.eta(1 - lam), INEQ_TOL))

    rho = _M(inst["tripartite"])
    pt = lambda keep: la.partial_trace(rho, (2, 2, 2), keep)
    out.append(at_most("strong-subadditivity", "entropy.strong-subadditivity",
                       _vn(rho) + _vn(pt([1])), _vn(pt([0, 1])) + _vn(pt([1, 2])), INEQ_TOL))

    phi = _state(Mn, r)
    s = von_neumann_entropy(phi)
    out.append(equal("spectral-decomposition", "entropy.decomposition",
                     entropy_decomposition_value(phi, spectral_ensemble(phi)), s, 1e-8))
    root = la.psd_sqrt(r)
    U = _M(inst["unitary"])
    ens = []
    for col in U.T:
        v = root @ col
        p = float(np.vdot(v, v).real)
        ens.append((p, _state(Mn, np.outer(v, v.conj()) / p)))
    total = sum(p for p, _ in ens)
    ens = [(p / total, f) for p, f in ens]
    out.append(at_most("pure-decomposition-sup", "entropy.decomposition",
                       entropy_decomposition_value(phi, ens), s, 1e-8))
    out.append(at_most("pure-decomposition-weights", "entropy.decomposition", s,
                       float(np.sum(la.eta(np.array([p for p, _ in ens])))), 1e-8))

    a, b = _M(inst["factor_a"]), _M(inst["factor_b"])
    out.append(equal("tensor-additivity", "entropy.additivity", _vn(np.kron(a, b)),
                     _vn(a) + _vn(b), 1e-10))
    v = _M(inst["pure"])
    out.append(small("pure-state-zero", "entropy.pure", _vn(np.outer(v, v.conj())), 1e-10))
    return out


register("entropy-properties", 100, "von Neumann entropy properties")(
    (_gen_entropy, _eval_entropy))


# ---------------------------------------------------------------------------
# conditional entropy

_I2 = np.eye(2)


def _nested_algebras(choice, u):
    """``A_1 <= B_1 = M_2 (x) 1`` and ``A_1 <= A_2 <= M_4``."""
    P = [np.outer(u[:, k], u[:, k].conj()) for k in range(2)]
    E = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    rot_diag = algebra_from_generators([np.kron(p, _I2) for p in P])
    left = FdAlgebra(4, ((2, 2),), np.eye(4))
    if choice == 0:
        return rot_diag, left
    if choice == 1:
        gens = [np.kron(x, e) for e in E for x in
                (np.array([[0, 1], [0, 0]]), np.array([[1, 0], [0, 0]]))]
        return rot_diag, algebra_from_generators(gens + [np.kron(p, _I2) for p in P])
    if choice == 2:
        return left, full_matrix_algebra(4)
    return scalars(4), algebra_from_generators([np.kron(x, y) for x in E for y in E])


def _gen_conditional(seed, trial):
    rng = _rng(seed, "conditional-entropy", trial)
    povm = _kraus(rng, 2, 3)
    return {"choice": trial % 4, "rho1": _J(la.random_density(rng, 2)),
            "rho2": _J(la.random_density(rng, 2)), "rotation": _J(la.random_unitary(rng, 2)),
            "povm": [_J(la.dag(k) @ k) for k in povm],
            "sep_basis": _J(la.random_unitary(rng, 2)),
            "sep_weights": [float(x) for x in rng.dirichlet(np.ones(2))],
            "sep_states": [_J(la.random_density(rng, 2)) for _ in range(2)],
            "seed": int(rng.integers(2 ** 31))}


def _eval_conditional(inst):
    r1, r2 = _M(inst["rho1"]), _M(inst["rho2"])
    A1, A2 = _nested_algebras(inst["choice"], _M(inst["rotation"]))
    M4 = full_matrix_algebra(4)
    B1 = FdAlgebra(4, ((2, 2),), np.eye(4))
    phi = _state(M4, np.kron(r1, r2))
    root = la.psd_sqrt(r1)
    parts = [root @ _M(q) @ root for q in inst["povm"]]
    lams = [float(np.trace(x).real) for x in parts]
    # the same decomposition on B_1 and, lifted by the expectation, on M_4
    on_b1 = [(l, _state(B1, np.kron(x / l, r2))) for l, x in zip(lams, parts)]
    lifted = [(l, _state(M4, np.kron(x / l, r2))) for l, x in zip(lams, parts)]
    phi1 = phi.restrict(B1)
    out = [at_most("expectation-inequality", "conditional-entropy.expectation-inequality",
                   decomposition_value(phi1, A1, on_b1),
                   decomposition_value(phi, A2, lifted), INEQ_TOL)]

    M2 = full_matrix_algebra(2)
    f1 = _state(M2, r1)
    full = conditional_entropy(f1, M2, K=1, R=1)
    out.append(equal("full-subalgebra", "conditional-entropy.full", full.value,
                     von_neumann_entropy(f1), 1e-8))
    out.append(small("scalar-subalgebra", "conditional-entropy.scalars",
                     conditional_entropy(f1, scalars(2), K=1, R=1).value, 1e-12))

    V = _M(inst["sep_basis"])
    betas = [_M(x) for x in inst["sep_states"]]
    terms = [(p, np.kron(np.outer(V[:, k], V[:, k].conj()), betas[k]))
             for k, p in enumerate(inst["sep_weights"])]
    omega = _state(M4, sum(p * t for p, t in terms))
    witness = [(p, _state(M4, t)) for p, t in terms]
    est = conditional_entropy(omega, B1, K=1, R=1, witnesses=[witness])
    s_a = von_neumann_entropy(omega.restrict(B1))
    out.append(equal("separable-witness", "conditional-entropy.separable-witness",
                     est.value, s_a, 1e-6))
    return out


register("conditional-entropy", 100, "conditional entropy inequalities")(
    (_gen_conditional, _eval_conditional))


# ---------------------------------------------------------------------------
# entanglement measures


def _gen_entanglement(seed, trial):
    rng = _rng(seed, "entanglement-properties", trial)
    a, b = (2, 2) if trial % 2 == 0 else (2, 3)
    items = [(float(w), _J(la.random_density(rng, a)), _J(la.random_density(rng, b)))
             for w in rng.dirichlet(np.ones(3))]
    return {"dims": [a, b], "omega1": _J(la.random_density(rng, a * b)),
            "omega2": _J(la.random_density(rng, a * b)),
            "mix": float(rng.uniform(0.05, 0.95)), "ensemble": items,
            "local_a": _J(la.random_unitary(rng, a)), "local_b": _J(la.random_unitary(rng, b)),
            "measure": _J(la.random_unitary(rng, a)), "seed": int(rng.integers(2 ** 31))}


def _eval_entanglement(inst):
    a, b = inst["dims"]
    system = tensor_system(a, b)
    w1, w2 = _M(inst["omega1"]), _M(inst["omega2"])
    om1, om2 = system.functional(w1, "state"), system.functional(w2, "state")
    out = []
    e1 = mutual_information(system, om1, cross_check=False)
    out.append(equal("mutual-information-routes", "entanglement.mutual-information",
                     e1, mutual_information_formula(system, om1), 1e-8))
    out.append(at_least("mutual-information-nonnegative", "entanglement.mutual-information",
                        e1, 0.0, 1e-12))
    swapped = BipartiteSystem(system.B, system.A)
    out.append(equal("mutual-information-symmetric", "entanglement.symmetry",
                     mutual_information(swapped, swapped.functional(w1, "state")), e1, 1e-10))
    er = relative_entanglement_upper(system, om1, K=2, R=1, seed=inst["seed"])
    out.append(at_most("relative-below-mutual", "entanglement.relative-below-mutual",
                       er.value, e1, 1e-8))

    m = inst["mix"]
    mixed = system.functional(m * w1 + (1 - m) * w2, "state")
    e2 = mutual_information(system, om2)
    emix = mutual_information(system, mixed)
    avg = m * e1 + (1 - m) * e2
    h = float(la.eta(m) + la.eta(1 - m))
    out.append(at_least("concave-sandwich-lower", "entanglement.concave-mutual-information",
                        emix, avg - h, INEQ_TOL))
    out.append(at_most("concave-sandwich-upper", "entanglement.concave-mutual-information",
                       emix, avg + 2 * h, INEQ_TOL))

    items = [(w, _M(x), _M(y)) for w, x, y in inst["ensemble"]]
    ens = ensemble_from_tensor(system, items)
    sep = system.functional(ens.density(), "state")
    weights = ens.weights()
    out.append(at_most("separable-eta-bound", "entanglement.separable-bound",
                       mutual_information(system, sep), float(np.sum(la.eta(weights))),
                       INEQ_TOL))
    er_sep = relative_entanglement_upper(system, sep, K=1, R=0, warm_starts=[ens])
    out.append(small("separable-relative-zero", "entanglement.separable-zero",
                     er_sep.value, 1e-8))

    ua, ub = _M(inst["local_a"]), _M(inst["local_b"])
    ((p, rotated),) = apply_separable_operation(
        system, [(LocalMap.from_kraus([ua]), LocalMap.from_kraus([ub]))], om1)
    out.append(equal("local-unitary-invariance", "entanglement.separable-operations",
                     mutual_information(system, rotated), e1, 1e-9))
    V = _M(inst["measure"])
    proj = [np.outer(V[:, k], V[:, k].conj()) for k in range(a)]
    ops = [(LocalMap.from_kraus([q]), LocalMap.from_kraus([np.eye(b)])) for q in proj]
    outcomes = apply_separable_operation(system, ops, sep)
    images = apply_separable_operation_ensemble(system, ops, ens)
    worst = 0.0
    for (p, w), img in zip(outcomes, images):
        if p <= 1e-12:
            continue
        bound = relative_entanglement_upper(system, w, K=1, R=0, warm_starts=[img])
        worst = max(worst, bound.value)
    out.append(small("separable-stays-separable", "entanglement.separable-operations",
                     worst, 1e-8))
    return out


register("entanglement-properties", 20, "entanglement measure properties")(
    (_gen_entanglement, _eval_entanglement))


# ---------------------------------------------------------------------------
# Bell benchmarks


def _gen_bell(seed, trial):
    return {"restarts": 64, "terms": 2, "seed": int(seed)}


def _bell_vector():
    v = np.zeros(4, dtype=complex)
    v[0] = v[3] = 1 / np.sqrt(2)
    return v


def _eval_bell(inst):
    v = _bell_vector()
    system = tensor_system(2, 2)
    omega = system.functional(np.outer(v, v.conj()), "state")
    ln2 = math.log(2)
    e_i = mutual_information(system, omega)
    er = relative_entanglement_upper(system, omega, K=inst["terms"], R=inst["restarts"],
                                     seed=inst["seed"])
    ce = canonical_entanglement_entropy(minimal_split_pair(v))
    return [equal("bell-mutual-information", "entanglement.bell", e_i, 2 * ln2, 1e-9),
            equal("bell-relative-entanglement", "entanglement.bell", er.value, ln2, 1e-3),
            equal("bell-canonical-entropy", "canonical.bell", ce.value, ln2, 1e-8),
            equal("bell-canonical-symmetry", "canonical.purity", ce.value_prime,
                  ce.value, 1e-8),
            at_most("bell-remark", "canonical.mutual-information-bound",
                    ce.mutual_information, 2 * ce.value, 1e-8)]


register("bell", 1, "Bell-state benchmark values")((_gen_bell, _eval_bell))


# ---------------------------------------------------------------------------
# split pairs: nuclearity chain and canonical factor


def _gen_pair(name):
    def gen(seed, trial):
        rng = _rng(seed, name, trial)
        a, b = (2, 2) if trial % 2 == 0 else (2, 3)
        return {"dims": [a, b], "rho": _J(la.random_density(rng, a * b)),
                "seed": int(rng.integers(2 ** 31))}
    return gen


def _pair(inst):
    a, b = inst["dims"]
    return doubled_split_pair(_M(inst["rho"]), a, b)


def _eval_pipeline(inst):
    _, checks = pipeline.certify(_pair(inst), inst.get("ps", pipeline.DEFAULT_PS))
    return checks


register("pipeline", 100, "nuclearity-to-entanglement chain on doubled pairs")(
    (_gen_pair("pipeline"), _eval_pipeline))


def _eval_canonical(inst):
    sp = _pair(inst)
    cf = canonical_factor(sp)
    impl = cf.impl
    out = [small("isometry", "canonical.standard-implementation",
                 impl.isometry_residual(), ID_TOL),
           small("intertwining", "canonical.standard-implementation",
                 impl.intertwining_residual(), ID_TOL),
           small("cone-mapping", "canonical.standard-implementation",
                 impl.cone_residual(10, inst["seed"]), ID_TOL)]
    if impl.is_unitary:
        out.append(small("modular-conjugation", "canonical.standard-implementation",
                         impl.j_residual(), ID_TOL))
    for key, val in cf.checks().items():
        ref = "canonical.factor" if key == "factor" else "canonical." + key.replace("_", "-")
        out.append(flag(key, ref, val) if isinstance(val, bool) else
                   small(key, ref, val, ID_TOL))
    ce = canonical_entanglement_entropy(sp, cf)
    out.append(equal("entropy-symmetry", "canonical.purity", ce.value, ce.value_prime, 1e-8))
    out.append(at_most("mutual-information-remark", "canonical.mutual-information-bound",
                       ce.mutual_information, 2 * ce.value, 1e-8))
    return out


register("canonical-factor", 50, "canonical intermediate factor checks")(
    (_gen_pair("canonical-factor"), _eval_canonical))


# ---------------------------------------------------------------------------
# Jones structure

_JONES_DIMS = ([2], [3], [2, 2], [4])


def _gen_jones(seed, trial):
    rng = _rng(seed, "jones", trial)
    sub = int(rng.integers(2 ** 31))
    inst = generate_instance("inclusion", _JONES_DIMS[trial % len(_JONES_DIMS)], sub)
    inst["cone_seed"] = int(rng.integers(2 ** 31))
    return inst


def _eval_jones(inst):
    N, M, phi = load_inclusion(inst)
    rep = takesaki_report(N, M, phi)
    out = [small("takesaki", "inclusion.takesaki", rep.residual, ID_TOL)]
    eps = conditional_expectation(N, M, phi)
    for key, val in sorted(eps.checks(samples=8, seed=inst["cone_seed"]).items()):
        out.append(small("expectation-" + key, "inclusion.conditional-expectation", val,
                         ID_TOL))
    jr = verify_jones_structure(eps, cone_samples=50, seed=inst["cone_seed"])
    for key, val in sorted(jr.residuals.items()):
        if key == "injective_smin":
            out.append(at_least(key, "inclusion.jones-injective", val, 1e-9, 1e-12))
        else:
            out.append(small(key, "inclusion.jones-" + key.replace("_", "-"), val, ID_TOL))
    for key, ok in sorted(jr.items.items()):
        out.append(flag("item-" + key, "inclusion.jones-items", ok))
    return out


register("jones", 50, "Jones projection structure of state-preserving expectations")(
    (_gen_jones, _eval_jones))


# ---------------------------------------------------------------------------
# distance scan


def _gen_scan(seed, trial):
    return {"steps": 10, "p": 0.5, "seed": int(seed)}


def _eval_scan(inst):
    _, checks = scan.scan_distance(inst["steps"], inst["p"], seed=inst["seed"])
    return checks


register("scan", 1, "distance scan on the two-qubit family")((_gen_scan, _eval_scan))


# ---------------------------------------------------------------------------
# runner


def _roundtrip(inst):
    return json.loads(json.dumps(inst))


def _score(checks, tol):
    worst = 0.0
    for c in checks:
        t = c.tol if tol is None else tol
        r = c.residual
        if math.isnan(r) or math.isinf(r):
            return math.inf
        worst = max(worst, r / t if t > 0 else (math.inf if r > 0 else 0.0))
    return worst


def get_suite(name):
    if name not in SUITES:
        raise ParameterError(f"unknown suite {name!r}; known: {', '.join(sorted(SUITES))}")
    return SUITES[name]


def run_suite(name, tol=None, seed=0, trials=None):
    """Run ``trials`` seeded instances of a registered suite.

    ``tol`` overrides every per-check tolerance (``residual < tol`` passes).
    """
    suite = get_suite(name)
    trials = suite.trials if trials is None else int(trials)
    if trials < 1:
        raise ParameterError("trials must be positive")
    if tol is not None and not tol >= 0:
        raise ParameterError("tol must be non-negative")
    results, instances = [], {}
    for t in range(trials):
        inst = _roundtrip(suite.generate(seed, t))
        results.append((t, suite.evaluate(inst)))
        instances[t] = inst
    return _report(suite, results, instances, tol, seed)


def replay(case, tol=None):
    """Re-evaluate a stored worst case ``{"suite", "trial", "instance"}``."""
    suite = get_suite(case["suite"])
    if case.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise ParameterError("unsupported schema_version")
    inst = _roundtrip(case["instance"])
    t = int(case.get("trial", 0))
    return _report(suite, [(t, suite.evaluate(inst))], {t: inst}, tol, case.get("seed"))


def _report(suite, results, instances, tol, seed):
    results = sorted(results, key=lambda r: r[0])
    scores = [(_score(c, tol), t) for t, c in results]
    worst_t = max(scores, key=lambda s: (s[0], -s[1]))[1]
    passed = all(c.passed(tol) for _, cs in results for c in cs)
    return {
        "schema_version": SCHEMA_VERSION,
        "suite": suite.name,
        "seed": seed,
        "trials": len(results),
        "tol_override": tol,
        "passed": passed,
        "summary": summarize(results, tol),
        "results": [{"trial": t, "checks": [c.to_dict(tol) for c in cs]}
                    for t, cs in results],
        "worst_case": {"schema_version": SCHEMA_VERSION, "suite": suite.name,
                       "seed": seed, "trial": worst_t, "instance": instances[worst_t]},
    }
