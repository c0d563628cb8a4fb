"""Nuclearity-to-entanglement certificate for one split pair.

For each exponent ``p`` the chain runs: decomposition of ``Xi_A`` with cost
``mu_p``, product decomposition of the state, the four-way separable split,
the dominating separable functional, the mutual-information bound at
``z = mu_p^{1/p}`` and the intermediate-entropy witness lifted through the
standard implementation.
"""

import numpy as np

from ..entanglement import mutual_information
from ..nuclearity import (c_p, dominating_separable, four_split,
                          hs3_product_decomposition, intermediate_entropy_eval,
                          mutual_information_bound, otani_bound, pnorm_upper, xi_map)
from ..splitinc import canonical_factor, dominating_witness
from .report import at_least, at_most, small

DEFAULT_PS = (0.25, 0.5, 0.75)
RECON_TOL = 1e-8
INEQ_TOL = 1e-9
EIG_TOL = 1e-10


def certify(sp, ps=DEFAULT_PS, strategy="svd", witness=True, cf=None):
    """Run the chain on ``sp``; returns ``(record, checks)``.

    ``witness`` requires a unitary standard implementation (doubled pairs);
    it is skipped otherwise and the record says so.
    """
    e_i = mutual_information(sp.system, sp.state)
    theta = xi_map(sp, "A")
    impl = None
    if witness:
        cf = cf or canonical_factor(sp)
        impl = cf.impl
        if not impl.is_unitary:
            witness = False
    rho = np.outer(sp.omega, sp.omega.conj())
    checks, rows = [], []
    for p in ps:
        tag = f"@p={p:g}"
        z, dec = pnorm_upper(theta, p, strategy)
        mu = dec.cost(p)
        pdec = hs3_product_decomposition(sp, dec)
        split = four_split(pdec)
        dom = dominating_separable(pdec, sp.state)
        lam = split.lam
        bound = mutual_information_bound(z, p)
        row = {"p": p, "mu_p": mu, "z_upper": z, "c_p": c_p(p),
               "product_terms": len(pdec.terms), "lambda": lam,
               "sigma_norm": dom.norm, "min_eig": dom.min_eig,
               "E_I": e_i, "E_I_bound": bound}
        checks += [
            small("reconstruction" + tag, "nuclearity.product-decomposition",
                  pdec.residual(sp.state), RECON_TOL),
            small("four-split-residual" + tag, "nuclearity.four-split",
                  split.residual(sp.state), RECON_TOL),
            at_most("four-split-lambda" + tag, "nuclearity.four-split",
                    (1 + lam) ** p, 4 * mu, INEQ_TOL),
            at_least("sigma-dominates" + tag, "nuclearity.dominating-separable",
                     dom.min_eig, 0.0, EIG_TOL),
            at_most("sigma-norm" + tag, "nuclearity.dominating-separable",
                    dom.norm ** p, mu, INEQ_TOL),
            at_least("mu-at-least-one" + tag, "nuclearity.partition-function",
                     mu, 1.0, INEQ_TOL),
            at_most("mutual-information-bound" + tag, "nuclearity.mutual-information-bound",
                    e_i, bound, INEQ_TOL),
        ]
        if witness:
            R = dominating_witness(impl, dom.ensemble)
            # tr R equals the ensemble norm up to rounding in the cone vectors
            t = float(np.trace(R).real)
            ev = intermediate_entropy_eval(cf.F, rho, [(R / t, 1.0 / t)],
                                           sp.system.joint)
            ob = otani_bound(z, p)
            row.update(witness_value=ev.value, witness_bound=ob)
            checks.append(at_most("intermediate-entropy-bound" + tag,
                                  "nuclearity.intermediate-entropy-bound",
                                  ev.value, ob, INEQ_TOL))
        rows.append(row)
    record = {"model": sp.model, "E_I": e_i, "witness": bool(witness), "chain": rows}
    return record, checks
