"""``vnalab`` command line.

Exit codes: 0 every check passed, 1 some check failed, 2 usage error
(unknown suite, bad parameters, unreadable input), 3 numerical-validity
error raised by the library.
"""

import argparse
import json
import sys

from ..errors import LimitError, ParameterError, VnaError
from . import pipeline, scan
from .instances import (KINDS, SCHEMA_VERSION, generate_instance, load_bipartite,
                        load_inclusion, load_split_pair, load_state_pair)
from .report import _cell, _num, dumps, to_tsv
from .suites import SUITES, replay, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

QUANTITIES = ("relative-entropy", "entropy", "mutual-information",
              "relative-entanglement", "partition-function", "canonical-entropy",
              "takesaki", "jones")


class UsageError(Exception):
    pass


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _global_flags(repeated=False):
    # the copy attached to subcommands must not clobber values given before them
    d = (lambda v: argparse.SUPPRESS) if repeated else (lambda v: v)
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=d(0), help="master seed (default 0)")
    p.add_argument("--tol", type=float, default=d(None),
                   help="override every check tolerance; a check passes iff residual < tol")
    p.add_argument("--p", type=float, default=d(None), help="nuclearity exponent")
    p.add_argument("--out", default=d(None), help="write output here instead of stdout")
    p.add_argument("--format", choices=("json", "tsv"), default=d("json"))
    return p


def build_parser():
    parser = argparse.ArgumentParser(prog="vnalab", parents=[_global_flags()],
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    g = _global_flags(repeated=True)

    c = sub.add_parser("compute", parents=[g], help="evaluate one quantity on a scenario file")
    c.add_argument("quantity", choices=QUANTITIES)
    c.add_argument("scenario")
    c.add_argument("--method", choices=("umegaki", "modular", "cocycle"), default="umegaki")
    c.add_argument("--K", type=int, default=4)
    c.add_argument("--R", type=int, default=8)

    s = sub.add_parser("suite", parents=[g], help="run an invariant suite")
    s.add_argument("name", nargs="?")
    s.add_argument("--trials", type=int, default=None)
    s.add_argument("--replay", default=None, help="re-evaluate a stored worst case")
    s.add_argument("--list", action="store_true", help="list registered suites")
    s.add_argument("--worst-out", default=None, help="store the worst case here")

    ce = sub.add_parser("certify", parents=[g], help="nuclearity chain on a split pair")
    ce.add_argument("scenario")
    ce.add_argument("--strategy", choices=("svd", "greedy"), default="svd")

    sc = sub.add_parser("scan", parents=[g], help="distance scan on the two-qubit family")
    sc.add_argument("--steps", type=int, default=10)

    ge = sub.add_parser("gen", parents=[g], help="generate a scenario file")
    ge.add_argument("kind", choices=KINDS)
    ge.add_argument("dims")
    ge.add_argument("--model", choices=("doubled", "minimal"), default="doubled")
    return parser


# ---------------------------------------------------------------------------
# subcommands; each returns (payload, passed)


def _compute(args):
    d = _read_json(args.scenario)
    q = args.quantity
    out = {"schema_version": SCHEMA_VERSION, "quantity": q}
    if q in ("relative-entropy", "entropy"):
        from ..entropy import (relative_entropy, relative_entropy_cocycle_check,
                               to_json_value, von_neumann_entropy)
        _, phi, psi = load_state_pair(d)
        if q == "entropy":
            out.update(value=von_neumann_entropy(phi.normalized()), method="spectral")
        else:
            if psi is None:
                raise UsageError("scenario has no reference density")
            if args.method == "cocycle":
                val = relative_entropy_cocycle_check(phi, psi)
            else:
                val = relative_entropy(phi, psi, args.method)
            out.update(value=to_json_value(val), method=args.method, tolerance=1e-8,
                       witnesses=[])
    elif q in ("mutual-information", "relative-entanglement"):
        from ..entanglement import mutual_information, relative_entanglement_upper
        if d.get("kind") == "split_pair":
            sp = load_split_pair(d)
            system, omega = sp.system, sp.state
        else:
            system, omega = load_bipartite(d)
        if q == "mutual-information":
            out.update(value=_num(mutual_information(system, omega)))
        else:
            bound = relative_entanglement_upper(system, omega, K=args.K, R=args.R,
                                                seed=args.seed)
            out.update(value=bound.value, runs=bound.runs,
                       witness_ensemble=bound.witness.to_dict())
    elif q in ("partition-function", "canonical-entropy"):
        sp = load_split_pair(d)
        if q == "partition-function":
            from ..nuclearity import partition_function_upper
            p = 1.0 if args.p is None else args.p
            out.update(p=p, value=partition_function_upper(sp, p))
        else:
            from ..splitinc import canonical_entanglement_entropy
            ce = canonical_entanglement_entropy(sp)
            out.update(value=ce.value, value_prime=ce.value_prime,
                       E_I=ce.mutual_information, remark_holds=ce.remark_holds)
    else:
        from ..splitinc import (conditional_expectation, takesaki_report,
                                verify_jones_structure)
        N, M, phi = load_inclusion(d)
        rep = takesaki_report(N, M, phi)
        out.update(holds=rep.holds, residual=rep.residual)
        if q == "jones" and rep.holds:
            jr = verify_jones_structure(conditional_expectation(N, M, phi),
                                        seed=args.seed)
            out.update(items=jr.items, residuals={k: _num(v) for k, v in jr.residuals.items()})
        passed = rep.holds if q == "takesaki" else bool(out.get("items")) and \
            all(out["items"].values())
        return out, passed
    return out, True


def _suite(args):
    if args.list:
        return {"suites": {k: {"trials": s.trials, "description": s.description}
                           for k, s in sorted(SUITES.items())}}, True
    if args.replay:
        rep = replay(_read_json(args.replay), args.tol)
    else:
        if not args.name:
            raise UsageError("suite name required (see --list)")
        rep = run_suite(args.name, args.tol, args.seed, args.trials)
    if args.worst_out:
        with open(args.worst_out, "w") as fh:
            fh.write(dumps(rep["worst_case"]))
    return rep, rep["passed"]


def _certify(args):
    sp = load_split_pair(_read_json(args.scenario))
    ps = pipeline.DEFAULT_PS if args.p is None else (args.p,)
    record, checks = pipeline.certify(sp, ps, args.strategy)
    passed = all(c.passed(args.tol) for c in checks)
    return {"schema_version": SCHEMA_VERSION, "command": "certify", **record,
            "passed": passed, "results": [{"trial": 0,
                                           "checks": [c.to_dict(args.tol) for c in checks]}]}, passed


def _scan(args):
    p = 0.5 if args.p is None else args.p
    rows, checks = scan.scan_distance(args.steps, p, seed=args.seed)
    passed = all(c.passed(args.tol) for c in checks)
    return {"schema_version": SCHEMA_VERSION, "command": "scan", "p": p,
            "steps": args.steps, "rows": rows, "passed": passed,
            "results": [{"trial": 0, "checks": [c.to_dict(args.tol) for c in checks]}]}, passed


def _gen(args):
    return generate_instance(args.kind, args.dims, args.seed, args.model), True


_COMMANDS = {"compute": _compute, "suite": _suite, "certify": _certify,
             "scan": _scan, "gen": _gen}


def _render(payload, fmt):
    if fmt == "json":
        return dumps(payload)
    if "results" in payload:
        return to_tsv(payload)
    if "rows" in payload:
        return "".join("\t".join(_cell(r[k]) for k in r) + "\n" for r in payload["rows"])
    return "".join(f"{k}\t{_cell(v) if not isinstance(v, (dict, list)) else json.dumps(v)}\n"
                   for k, v in sorted(payload.items()))


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        payload, passed = _COMMANDS[args.command](args)
    except (UsageError, ParameterError, LimitError) as exc:
        print(f"vnalab: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VnaError as exc:
        print(f"vnalab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    text = _render(payload, args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
