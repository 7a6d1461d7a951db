"""Command-line front end.

Every command produces a CommandResult; ``--json`` prints it as a schema-1
document, otherwise a short text summary is printed.  Exit codes: 0 ok,
1 error, 2 undecided (argparse usage errors also exit with 2).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field as dc_field
from importlib import resources

import numpy as np

from . import __version__
from . import exactfield as ef
from . import ezd, families, fpmod, generic
from .algebra import (
    NotArtinianWithinCap,
    AssocCheckFailed,
    is_gorenstein,
    is_short,
    load_algebra,
    socle,
)
from .relparser import ParseError, parse_matrix, render

SCHEMA = 1
EXIT = {"ok": 0, "error": 1, "undecided": 2}


@dataclass
class CommandResult:
    command: str
    status: str = "ok"
    payload: dict = dc_field(default_factory=dict)
    diagnostics: list = dc_field(default_factory=list)

    @property
    def exit_code(self):
        return EXIT[self.status]

    def as_dict(self):
        return {
            "schema": SCHEMA,
            "command": self.command,
            "status": self.status,
            "payload": self.payload,
            "diagnostics": self.diagnostics,
        }

    def to_json(self):
        return json.dumps(_plain(self.as_dict()), indent=2, sort_keys=True)


class Undecided(Exception):
    pass


def _plain(obj):
    """JSON-safe copy: numpy scalars to int, field values to strings."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, type(None), str, float)):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    return str(obj)


# --------------------------------------------------------------------------
# inputs


def _resolve(path, suffix):
    if os.path.exists(path):
        with open(path) as fh:
            return fh.read()
    base = os.path.basename(path)
    names = [base] if base.endswith(suffix) else [base, base + suffix]
    pkg = resources.files("ezdkit") / "fixtures"
    for name in names:
        res = pkg / name
        if res.is_file():
            return res.read_text()
    raise FileNotFoundError(f"no such file or bundled fixture: {path}")


def _algebra(path):
    return load_algebra(_resolve(path, ".alg"))


def _elem(A, text, what="--elem"):
    if text is None:
        raise ValueError(f"{what} is required")
    return A.parse(text)


def _matrix(A, spec):
    # a file, a bundled fixture, or the matrix written inline ("x1, x2; 0, x1")
    try:
        text = _resolve(spec, ".mat")
    except FileNotFoundError:
        text = spec
    return parse_matrix(text, A)


def _fmt(F, v):
    return F.format(v)


def _kmatrix(F, M):
    return [[_fmt(F, v) for v in row] for row in np.asarray(M)]


def _presentation(M):
    return [[render(a) for a in row] for row in M.presentation_elements()]


# --------------------------------------------------------------------------
# commands


def cmd_algebra_info(args, res):
    A = _algebra(args.file)
    res.payload = {
        "field": str(A.spec),
        "variables": A.variables,
        "hilbert": A.hilbert,
        "e": A.e,
        "dim": A.dim,
        "socle_dim": socle(A).dim,
        "gorenstein": is_gorenstein(A),
        "short": is_short(A),
    }


def _certificate(cert):
    return {
        "is_ezd": True,
        "x": render(cert.x),
        "partner": render(cert.w),
        "dim_ann_x": cert.ann_x.dim,
        "dim_ann_w": cert.ann_w.dim,
        "checks": cert.checks,
    }


def cmd_ezd_check(args, res):
    A = _algebra(args.file)
    x = _elem(A, args.elem)
    out = ezd.is_exact_zero_divisor(x)
    if out:
        res.payload = _certificate(out)
    else:
        res.payload = {"is_ezd": False, "x": render(x), "reason": out.reason,
                       "details": {k: render(v) if hasattr(v, "coords") else v for k, v in out.details.items()}}


def cmd_ezd_scan(args, res):
    A = _algebra(args.file)
    mode = {"all": "all_of_m", "proj": "projective_lines"}[args.mode]
    try:
        rep = ezd.scan_ezd(A, mode=mode, budget=args.budget, threads=args.threads)
    except ezd.BudgetExceeded as exc:
        raise Undecided(str(exc)) from None
    res.payload = rep.as_dict()


def cmd_ezd_minors(args, res):
    A = _algebra(args.file)
    x = _elem(A, args.elem)
    F = A.F
    xi = ezd.xi_matrix(x)
    out = ezd.partner_via_minors(x)
    payload = {"x": render(x), "xi": _kmatrix(F, xi.matrix.data)}
    if out:
        w, mx, mw = out
        payload.update(degenerate=False, minors_x=[_fmt(F, v) for v in mx], partner=render(w),
                       minors_partner=[_fmt(F, v) for v in mw])
    else:
        payload.update(degenerate=True, which=out.which, minors_x=[_fmt(F, v) for v in out.minors_x],
                       partner=render(out.w) if out.w is not None else None,
                       minors_partner=[_fmt(F, v) for v in out.minors_w] if out.minors_w else None)
    res.payload = payload


def cmd_ezd_conca(args, res):
    A = _algebra(args.file)
    x = _elem(A, args.elem)
    res.payload = {"x": render(x), "conca_generator": ezd.is_conca_generator(x)}


def _n_range(text):
    if ".." in text:
        a, b = text.split("..", 1)
        return range(int(a), int(b) + 1)
    return range(int(text), int(text) + 1)


def _hyp_fail(res, exc):
    res.status = "error"
    res.diagnostics.append({"error": "HypothesesFail", "message": str(exc), "clauses": exc.clauses})


def cmd_family_build(args, res):
    A = _algebra(args.file)
    w, x, y, z = (_elem(A, getattr(args, k), "--" + k) for k in "wxyz")
    try:
        rep = families.build_family(w, x, y, z, _n_range(args.n), seed=args.seed)
    except families.HypothesesFail as exc:
        return _hyp_fail(res, exc)
    res.payload = rep.as_dict()


def cmd_family_bt2(args, res):
    A = _algebra(args.file)
    w, x, y, yp, z = (_elem(A, getattr(args, k), "--" + k) for k in ("w", "x", "y", "yprime", "z"))
    lambdas = None
    if args.lambdas != "all":
        lambdas = [A.F.coerce(int(t)) for t in args.lambdas.split(",")]
    try:
        rep = families.bt2_family(args.n, w, x, y, yp, z, lambdas, seed=args.seed, threads=args.threads)
    except families.HypothesesFail as exc:
        return _hyp_fail(res, exc)
    res.payload = rep.as_dict()
    if rep.iso_matrix and any(v is None for row in rep.iso_matrix for v in row):
        res.status = "undecided"


def cmd_family_findz(args, res):
    A = _algebra(args.file)
    w, x, y = (_elem(A, getattr(args, k), "--" + k) for k in "wxy")
    z = families.find_z_for_y(w, x, y)
    res.payload = {"z": render(z) if z is not None else None}
    if z is None:
        res.status = "undecided"


def cmd_family_finddata(args, res):
    A = _algebra(args.file)
    w, x = (_elem(A, getattr(args, k), "--" + k) for k in "wx")
    try:
        y, yp, z = families.find_bt2_data(w, x)
    except families.SearchExhausted as exc:
        res.diagnostics.append({"search": exc.stats})
        raise Undecided(str(exc)) from None
    res.payload = {"y": render(y), "yprime": render(yp), "z": render(z)}


def cmd_module_info(args, res):
    A = _algebra(args.file)
    M = fpmod.present_module(A, _matrix(A, args.matrix))
    out = {"length": M.length, "b0": M.b0, "b1": M.b1, "presentation": _presentation(M),
           "free_summand": fpmod.has_free_summand(M)}
    if args.betti is not None:
        out["betti"] = fpmod.betti(M, args.betti)
    if args.indec:
        try:
            r = fpmod.is_indecomposable(M, seed=args.seed)
        except fpmod.UndecidedAtBudget as exc:
            res.payload = out
            raise Undecided(str(exc)) from None
        out["indecomposable"] = r.indecomposable
        out["indecomposable_details"] = r.details
        if r.idempotent is not None:
            out["idempotent"] = _kmatrix(A.F, r.idempotent)
    if args.tr is not None:
        rep = fpmod.verify_totally_reflexive_bounded(M, args.tr)
        out["tr"] = {"verdict": rep.verdict, "degree": rep.degree, "period": rep.period,
                     "ext_module": rep.ext_module, "ext_dual": rep.ext_dual, "side": rep.side,
                     "notes": rep.notes}
    res.payload = out


def cmd_module_iso(args, res):
    A = _algebra(args.file)
    M = fpmod.present_module(A, _matrix(A, args.matrix))
    N = fpmod.present_module(A, _matrix(A, args.matrix2))
    try:
        r = fpmod.is_isomorphic(M, N, seed=args.seed)
    except fpmod.UndecidedAtBudget as exc:
        raise Undecided(str(exc)) from None
    res.payload = {"isomorphic": r.isomorphic, "reason": r.reason,
                   "witness": _kmatrix(A.F, r.witness) if r.witness is not None else None}


def cmd_module_pushout(args, res):
    A = _algebra(args.file)
    N = fpmod.present_module(A, _matrix(A, args.matrix))
    x = _elem(A, args.elem)
    P = fpmod.pushout_extension(N, x, args.power)
    N1, _ = fpmod.syzygy(N)
    res.payload = {
        "length": P.length, "b0": P.b0, "b1": P.b1, "presentation": _presentation(P),
        "length_N": N.length, "length_N1": N1.length,
        "additive": P.length == N.length + N1.length,
    }


def cmd_generic_sample(args, res):
    rep = generic.density_report(args.e, args.field, args.trials, args.seed, threads=args.threads)
    res.payload = rep.as_dict()


# --------------------------------------------------------------------------
# parser


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="print a JSON document")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for randomized paths")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker processes (1 = sequential)")

    p = argparse.ArgumentParser(prog="ezdkit", parents=[common], description="exact zero divisors and totally reflexive modules")
    p.add_argument("--version", action="version", version=f"ezdkit {__version__}")
    groups = p.add_subparsers(dest="group", required=True)

    def sub(group, name, func, help_text):
        sp = group.add_parser(name, parents=[common], help=help_text)
        sp.set_defaults(func=func, cmd=name)
        return sp

    g = groups.add_parser("algebra", help="algebra invariants").add_subparsers(dest="cmd", required=True)
    sp = sub(g, "info", cmd_algebra_info, "Hilbert series, socle, Gorenstein, short")
    sp.add_argument("file")

    g = groups.add_parser("ezd", help="exact zero divisors").add_subparsers(dest="cmd", required=True)
    for name, func, text in (("check", cmd_ezd_check, "certify an exact pair"),
                             ("minors", cmd_ezd_minors, "partner from maximal minors"),
                             ("conca", cmd_ezd_conca, "Conca generator test")):
        sp = sub(g, name, func, text)
        sp.add_argument("file")
        sp.add_argument("--elem", required=True)
    sp = sub(g, "scan", cmd_ezd_scan, "exhaustive scan")
    sp.add_argument("file")
    sp.add_argument("--mode", choices=["all", "proj"], default="all")
    sp.add_argument("--budget", type=int, default=ezd.DEFAULT_BUDGET)

    g = groups.add_parser("family", help="bidiagonal families").add_subparsers(dest="cmd", required=True)
    sp = sub(g, "build", cmd_family_build, "first family, n in a range")
    sp.add_argument("file")
    for k in "wxyz":
        sp.add_argument("--" + k, required=True)
    sp.add_argument("--n", required=True, help="A..B")
    sp = sub(g, "bt2", cmd_family_bt2, "second family over lambda values")
    sp.add_argument("file")
    sp.add_argument("--n", type=int, required=True)
    for k in ("w", "x", "y", "yprime", "z"):
        sp.add_argument("--" + k, required=True)
    sp.add_argument("--lambdas", default="all")
    sp = sub(g, "findz", cmd_family_findz, "z in ann(y)")
    sp.add_argument("file")
    for k in "wxy":
        sp.add_argument("--" + k, required=True)
    sp = sub(g, "finddata", cmd_family_finddata, "y, y', z for the second family")
    sp.add_argument("file")
    for k in "wx":
        sp.add_argument("--" + k, required=True)

    g = groups.add_parser("module", help="finitely presented modules").add_subparsers(dest="cmd", required=True)
    sp = sub(g, "info", cmd_module_info, "length, Betti numbers, indecomposability, reflexivity")
    sp.add_argument("file")
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--betti", type=int)
    sp.add_argument("--indec", action="store_true")
    sp.add_argument("--tr", type=int)
    sp = sub(g, "iso", cmd_module_iso, "isomorphism test")
    sp.add_argument("file")
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--matrix2", required=True)
    sp = sub(g, "pushout", cmd_module_pushout, "pushout extension")
    sp.add_argument("file")
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--elem", required=True)
    sp.add_argument("--power", type=int, required=True)

    g = groups.add_parser("generic", help="random quadratic algebras").add_subparsers(dest="cmd", required=True)
    sp = sub(g, "sample", cmd_generic_sample, "density report")
    sp.add_argument("--e", type=int, required=True)
    sp.add_argument("--field", required=True)
    sp.add_argument("--trials", type=int, required=True)
    return p


DOMAIN_ERRORS = (
    ParseError, FileNotFoundError, ef.FieldError, NotArtinianWithinCap, AssocCheckFailed,
    ezd.NotShort, ezd.NotInMaxIdeal, ezd.ZeroElement, ezd.UnitElement, ezd.WrongHilbertSeries,
    ezd.InfiniteField, ezd.PreconditionFailed, fpmod.EntriesNotInAlgebra, ValueError, TypeError,
)


def run(argv):
    """Parse ``argv`` and execute; returns (CommandResult, json flag)."""
    args = _parser().parse_args(argv)
    args.json = getattr(args, "json", False)
    args.seed = getattr(args, "seed", 0)
    args.threads = getattr(args, "threads", None) or ezd.default_threads()
    res = CommandResult(f"{args.group} {args.cmd}")
    try:
        args.func(args, res)
    except Undecided as exc:
        res.status = "undecided"
        res.diagnostics.append({"undecided": str(exc)})
    except DOMAIN_ERRORS as exc:
        res.status = "error"
        res.payload = {}
        res.diagnostics.append({"error": type(exc).__name__, "message": str(exc)})
    return res, args.json


def _text(res):
    lines = [f"{res.command}: {res.status}"]

    def walk(obj, indent):
        if isinstance(obj, dict):
            for k in sorted(obj):
                v = obj[k]
                if isinstance(v, (dict, list)) and v and not _flat(v):
                    lines.append(" " * indent + f"{k}:")
                    walk(v, indent + 2)
                else:
                    lines.append(" " * indent + f"{k}: {_inline(v)}")
        elif isinstance(obj, list):
            for v in obj:
                if isinstance(v, (dict, list)) and not _flat(v):
                    lines.append(" " * indent + "-")
                    walk(v, indent + 2)
                else:
                    lines.append(" " * indent + f"- {_inline(v)}")

    walk(_plain(res.payload), 2)
    for d in _plain(res.diagnostics):
        lines.append(f"  note: {_inline(d)}")
    return "\n".join(lines)


def _flat(v):
    if isinstance(v, dict):
        return False
    return all(not isinstance(x, (dict, list)) or (isinstance(x, list) and all(not isinstance(y, (dict, list)) for y in x)) for x in v)


def _inline(v):
    if isinstance(v, list):
        return "[" + ", ".join(_inline(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {_inline(x)}" for k, x in v.items()) + "}"
    return str(v)


def main(argv=None):
    res, as_json = run(sys.argv[1:] if argv is None else argv)
    print(res.to_json() if as_json else _text(res))
    return res.exit_code


if __name__ == "__main__":
    sys.exit(main())
