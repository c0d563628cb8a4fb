"""Distance scan on the two-qubit family with Schmidt weights ``(1, e^{-s})``.

At ``s = 0`` the vector is maximally correlated; as ``s`` grows it tends to a
product vector. Each row records the nuclear 1-norm bound ``mu_1``, an upper
bound of the relative entanglement entropy warm-started from the normalised
dominating separable functional, the mutual information and the
mutual-information bound at the requested exponent.
"""

import math

import numpy as np

from ..entanglement import mutual_information, relative_entanglement_upper
from ..nuclearity import (dominating_separable, hs3_product_decomposition,
                          minimal_split_pair, mutual_information_bound, pnorm_upper,
                          schmidt_vector, sigma_relative_entropy_witness, xi_map)
from .report import at_most, equal

S_MAX = 10.0
MONO_TOL = 1e-8
ER_TOL = 1e-6


def family_pair(s):
    return minimal_split_pair(schmidt_vector([1.0, math.exp(-s)]))


def scan_row(s, p=0.5, K=2, R=2, seed=0):
    sp = family_pair(s)
    theta = xi_map(sp, "A")
    mu1, dec1 = pnorm_upper(theta, 1.0)
    dom = dominating_separable(hs3_product_decomposition(sp, dec1), sp.state)
    warm = sigma_relative_entropy_witness(dom)
    er = relative_entanglement_upper(sp.system, sp.state, K=K, R=R, seed=seed,
                                     warm_starts=[warm])
    zp, _ = pnorm_upper(theta, p)
    e_i = mutual_information(sp.system, sp.state)
    return {"s": s, "mu_1": mu1, "ln_mu_1": math.log(mu1), "sigma_norm": dom.norm,
            "E_R_upper": er.value, "E_I": e_i, "z_p": zp,
            "E_I_bound": mutual_information_bound(zp, p)}


def scan_distance(steps=10, p=0.5, s_max=S_MAX, K=2, R=2, seed=0):
    """Rows at ``s_k = k s_max / steps`` for ``k = 0..steps`` plus checks."""
    if steps < 1:
        raise ValueError("steps must be positive")
    rows = [scan_row(k * s_max / steps, p, K, R, seed) for k in range(steps + 1)]
    return rows, scan_checks(rows)


def scan_checks(rows):
    out = []
    for k, r in enumerate(rows):
        tag = f"@s={r['s']:g}"
        out.append(at_most("E_R-below-ln-mu_1" + tag, "scan.relative-entanglement-bound",
                           r["E_R_upper"], r["ln_mu_1"], ER_TOL))
        out.append(at_most("E_I-bound" + tag, "scan.mutual-information-bound",
                           r["E_I"], r["E_I_bound"], 1e-9))
        if k:
            prev = rows[k - 1]
            out.append(at_most("mu_1-nonincreasing" + tag, "scan.monotone",
                               r["mu_1"], prev["mu_1"], MONO_TOL))
            out.append(at_most("E_R-nonincreasing" + tag, "scan.monotone",
                               r["E_R_upper"], prev["E_R_upper"], ER_TOL))
    first, last = rows[0], rows[-1]
    if first["s"] == 0:
        out.append(equal("E_I-at-zero", "scan.endpoint", first["E_I"],
                         2 * np.log(2), 1e-8))
    if last["s"] >= S_MAX:
        out.append(at_most("E_R-at-far-end", "scan.endpoint", last["E_R_upper"],
                           1e-3, 1e-12))
    return out
