"""Check records and report serialisation (JSON and TSV)."""

import json
import math
from dataclasses import dataclass

import numpy as np

from ..entropy import INF

SCHEMA_VERSION = 1
TSV_COLUMNS = ("check_id", "ref", "lhs", "rhs", "residual", "pass")


def _num(x):
    if x is None:
        return None
    if x is INF or (isinstance(x, float) and math.isinf(x) and x > 0):
        return "+inf"
    if isinstance(x, float) and math.isinf(x):
        return "-inf"
    if isinstance(x, (bool,)):
        return x
    x = float(x)
    return None if math.isnan(x) else x


@dataclass(frozen=True)
class Check:
    """One numerical assertion. ``passed`` iff ``residual < tol``; a zero
    tolerance therefore fails every check."""

    check_id: str
    ref: str
    lhs: object
    rhs: object
    residual: float
    tol: float

    def passed(self, tol=None):
        t = self.tol if tol is None else tol
        r = self.residual
        return bool(not math.isnan(r) and r < t)

    def to_dict(self, tol=None):
        return {"check_id": self.check_id, "ref": self.ref, "lhs": _num(self.lhs),
                "rhs": _num(self.rhs), "residual": _num(self.residual),
                "tol": self.tol if tol is None else tol, "pass": self.passed(tol)}


def _finite(x):
    return x is not INF and not (isinstance(x, float) and math.isinf(x))


def equal(cid, ref, lhs, rhs, tol):
    if not _finite(lhs) or not _finite(rhs):
        # only the exact token matches the exact token
        res = 0.0 if lhs is INF and rhs is INF else math.inf
    else:
        res = abs(complex(lhs) - complex(rhs))
    return Check(cid, ref, lhs, rhs, float(res), tol)


def at_most(cid, ref, lhs, rhs, tol):
    """``lhs <= rhs``; the residual is the excess."""
    if not _finite(rhs):
        res = 0.0
    elif not _finite(lhs):
        res = math.inf
    else:
        res = max(0.0, float(lhs) - float(rhs))
    return Check(cid, ref, lhs, rhs, res, tol)


def at_least(cid, ref, lhs, rhs, tol):
    c = at_most(cid, ref, rhs, lhs, tol)
    return Check(cid, ref, lhs, rhs, c.residual, tol)


def small(cid, ref, value, tol):
    """A residual that should vanish."""
    return Check(cid, ref, value, 0.0, float(abs(value)), tol)


def flag(cid, ref, ok, tol=0.5):
    return Check(cid, ref, bool(ok), True, 0.0 if ok else 1.0, tol)


def summarize(results, tol=None):
    """Per check id: counts and the trial with the largest residual."""
    out = {}
    for trial, checks in results:
        for c in checks:
            s = out.setdefault(c.check_id, {"ref": c.ref, "passed": 0, "failed": 0,
                                            "worst_residual": -1.0, "worst_trial": None})
            if c.passed(tol):
                s["passed"] += 1
            else:
                s["failed"] += 1
            r = c.residual if not math.isnan(c.residual) else math.inf
            if r > s["worst_residual"]:
                s["worst_residual"], s["worst_trial"] = r, trial
    for s in out.values():
        s["worst_residual"] = _num(s["worst_residual"])
    return dict(sorted(out.items()))


def _plain(o):
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return _num(float(o))
    raise TypeError(f"cannot serialise {type(o).__name__}")


def dumps(report):
    """Canonical JSON text (sorted keys, fixed separators)."""
    return json.dumps(report, sort_keys=True, indent=1, allow_nan=False,
                      default=_plain) + "\n"


def to_tsv(report):
    lines = ["\t".join(TSV_COLUMNS)]
    for entry in report.get("results", []):
        for c in entry["checks"]:
            lines.append("\t".join(_cell(c[k]) for k in TSV_COLUMNS))
    return "\n".join(lines) + "\n"


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)
