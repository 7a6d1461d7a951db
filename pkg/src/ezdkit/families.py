"""Bidiagonal family modules M_n(w, x, y, z) and their hypothesis checks."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from . import exactfield as ef
from . import fpmod
from .algebra import (
    AlgebraElement,
    AlgebraMismatch,
    annihilator,
    is_short,
    lin_indep_mod_m2,
    span_membership_mod,
)
from .ezd import PreconditionFailed, is_exact_pair, iter_weak_annihilated

BETTI_WINDOW = 6


class HypothesesFail(ValueError):
    """Input violates the hypotheses of the requested construction."""

    def __init__(self, message, clauses=None):
        super().__init__(message)
        self.clauses = clauses or {}


class SearchExhausted(RuntimeError):
    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats or {}


@dataclass
class ThetaSpec:
    n: int
    w: AlgebraElement
    x: AlgebraElement = None
    y: AlgebraElement = None
    z: AlgebraElement = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        need = {"w": self.w}
        if self.n >= 2:
            need.update(x=self.x, y=self.y)
        if self.n >= 3:
            need["z"] = self.z
        missing = [k for k, v in need.items() if v is None]
        if missing:
            raise ValueError(f"n = {self.n} needs {', '.join(missing)}")
        A = self.w.algebra
        for v in need.values():
            if v.algebra is not A:
                raise AlgebraMismatch("theta entries from different algebras")

    @property
    def algebra(self):
        return self.w.algebra


def theta(spec: ThetaSpec):
    """n x n upper bidiagonal matrix: diagonal w, x, w, ...; superdiagonal y, z, y, ..."""
    A = spec.algebra
    n = spec.n
    zero = A.zero()
    rows = [[zero] * n for _ in range(n)]
    for i in range(n):
        rows[i][i] = spec.w if i % 2 == 0 else spec.x
        if i + 1 < n:
            rows[i][i + 1] = spec.y if i % 2 == 0 else spec.z
    return rows


def family_module(n, w, x=None, y=None, z=None):
    return fpmod.present_module(w.algebra, theta(ThetaSpec(n, w, x, y, z)))


def _in_m_minus_m2(a):
    return a.in_maximal_ideal() and not a.F.all_zero(a.linear_part())


def _mod_m2(a, gens):
    """a in (gens) + m^2."""
    return span_membership_mod(a, list(gens), 2)


# --------------------------------------------------------------------------
# first family


@dataclass
class HypothesisVerdict:
    case: str | None  # caseA / caseB (first family) or a..d (second family)
    clauses: dict
    failures: list

    @property
    def ok(self):
        return self.case is not None

    def __bool__(self):
        return self.ok

    def as_dict(self):
        return {"case": self.case, "clauses": dict(self.clauses), "failures": list(self.failures)}


def _common_clauses(named):
    clauses = {}
    A = None
    for name, a in named.items():
        if A is None:
            A = a.algebra
        elif a.algebra is not A:
            raise AlgebraMismatch("elements of different algebras")
        clauses[f"{name} in m minus m^2"] = _in_m_minus_m2(a)
    return clauses


def check_bt1_hypotheses(w, x, y, z) -> HypothesisVerdict:
    """Which of the two indecomposability conditions (w, x, y, z) satisfies."""
    clauses = _common_clauses({"w": w, "x": x, "y": y, "z": z})
    clauses["(w, x) exact pair"] = is_exact_pair(w, x)
    clauses["yz = 0"] = (y * z).is_zero()
    basic = all(clauses.values())
    a_ok = lin_indep_mod_m2([w, x, y])
    clauses["A: w, x, y independent mod m^2"] = a_ok
    b_parts = {
        "B: w in (x) + m^2": _mod_m2(w, [x]),
        "B: y not in (x) + m^2": not _mod_m2(y, [x]),
        "B: z not in (x) + m^2": not _mod_m2(z, [x]),
    }
    clauses.update(b_parts)
    case = None
    if basic and a_ok:
        case = "caseA"
    elif basic and all(b_parts.values()):
        case = "caseB"
    failures = [k for k, v in clauses.items() if not v and not k.startswith(("A:", "B:"))]
    if case is None and basic:
        failures = ["A: w, x, y independent mod m^2"] + [k for k, v in b_parts.items() if not v]
    return HypothesisVerdict(case, clauses, failures)


@dataclass
class FamilyMember:
    label: object  # n, or the lambda value
    n: int
    presentation: list  # rows of rendered entries
    length: int
    betti: list
    indecomposable: bool | None
    totally_acyclic: bool
    ta_failure: str | None = None
    free_summand: bool | None = None
    module: object = dc_field(default=None, repr=False, compare=False)

    def as_dict(self):
        return {
            "label": str(self.label),
            "n": self.n,
            "presentation": self.presentation,
            "length": self.length,
            "betti": self.betti,
            "indecomposable": self.indecomposable,
            "totally_acyclic": self.totally_acyclic,
            "ta_failure": self.ta_failure,
            "free_summand": self.free_summand,
        }


@dataclass
class FamilyReport:
    mode: str  # "bt1" or "bt2"
    hypotheses: HypothesisVerdict
    members: list
    iso_matrix: list | None = None
    e: int = 0

    def as_dict(self):
        return {
            "mode": self.mode,
            "e": self.e,
            "hypotheses": self.hypotheses.as_dict(),
            "members": [m.as_dict() for m in self.members],
            "iso_matrix": self.iso_matrix,
        }


def _render_matrix(rows):
    from .relparser import render

    return [[render(a) for a in row] for row in rows]


def _member(label, spec, partner, betti_window, indec=True, seed=0):
    A = spec.algebra
    rows = theta(spec)
    M = fpmod.present_module(A, rows)
    cert = fpmod.verify_totally_acyclic_periodic(A, rows, theta(partner))
    return FamilyMember(
        label=label,
        n=spec.n,
        presentation=_render_matrix(rows),
        length=M.length,
        betti=fpmod.betti(M, betti_window),
        indecomposable=bool(fpmod.is_indecomposable(M, seed=seed)) if indec else None,
        totally_acyclic=cert.ok,
        ta_failure=cert.failure,
        free_summand=fpmod.has_free_summand(M),
        module=M,
    )


def _check_member_numbers(m, e):
    if m.length != m.n * e or any(b != m.n for b in m.betti):
        raise AssertionError(
            f"member {m.label}: length {m.length} (expected {m.n * e}), Betti {m.betti} (expected constant {m.n})"
        )


def build_family(w, x, y, z, n_range, betti_window=BETTI_WINDOW, seed=0) -> FamilyReport:
    """Build M_n(w, x, y, z) for n in ``n_range`` with all certificates."""
    verdict = check_bt1_hypotheses(w, x, y, z)
    if not verdict:
        raise HypothesesFail("hypotheses fail: " + "; ".join(verdict.failures), verdict.clauses)
    A = w.algebra
    members = []
    for n in n_range:
        spec = ThetaSpec(n, w, x, y, z)
        partner = ThetaSpec(n, x, w, -y, None if z is None else -z)
        m = _member(n, spec, partner, betti_window, seed=seed)
        _check_member_numbers(m, A.e)
        members.append(m)
    return FamilyReport("bt1", verdict, members, e=A.e)


def find_z_for_y(w, x, y):
    """z in ann(y), outside (x) + m^2; one outside (x, y) + m^2 is preferred."""
    A = w.algebra
    if y.is_unit():
        raise PreconditionFailed("y is a unit")
    if not is_short(A):
        raise PreconditionFailed("algebra is not short")
    e = A.e
    if A.hilbert != [1, e, e - 1] or e < 3:
        raise PreconditionFailed(f"need Hilbert series [1, e, e-1] with e >= 3, have {A.hilbert}")
    if not is_exact_pair(w, x):
        raise PreconditionFailed("(w, x) is not an exact pair")
    if _mod_m2(y, [w, x]):
        raise PreconditionFailed("y lies in (w, x) + m^2")
    F = A.F
    ann = annihilator(y)
    cands = [AlgebraElement(A, r) for r in ann.rows]
    cands = [c for c in cands if not F.all_zero(c.linear_part())]
    for avoid in ([x, y], [x]):
        for c in cands:
            if not _mod_m2(c, avoid):
                return c
    return None


# --------------------------------------------------------------------------
# second family


def check_bt2_hypotheses(n, w, x, y, yp, z) -> HypothesisVerdict:
    """Which of the four non-isomorphism conditions applies (a, b for n = 2; c, d for n >= 3)."""
    named = {"w": w, "x": x, "y": y, "y'": yp}
    if n >= 3:
        named["z"] = z
    clauses = _common_clauses(named)
    clauses["(w, x) exact pair"] = is_exact_pair(w, x)
    basic = all(clauses.values())
    parts = {}
    if n == 2:
        parts["a"] = {"w, x, y, y' independent mod m^2": lin_indep_mod_m2([w, x, y, yp])}
        parts["b"] = {
            "x, y, y' independent mod m^2": lin_indep_mod_m2([x, y, yp]),
            "w in (x) + m^2": _mod_m2(w, [x]),
        }
    elif n >= 3:
        common = {
            "z not in (x) + m^2": not _mod_m2(z, [x]),
            "yz = 0": (y * z).is_zero(),
            "y'z = 0": (yp * z).is_zero(),
        }
        parts["c"] = {
            "w, x, y, y' independent mod m^2": lin_indep_mod_m2([w, x, y, yp]),
            "z not in (w) + m^2": not _mod_m2(z, [w]),
            **common,
        }
        parts["d"] = {
            "x, y, y' independent mod m^2": lin_indep_mod_m2([x, y, yp]),
            "w in (x) + m^2": _mod_m2(w, [x]),
            **common,
        }
    else:
        clauses["n >= 2"] = False
        basic = False
    for label, cl in parts.items():
        for k, v in cl.items():
            clauses[f"{label}: {k}"] = v
    case = None
    if basic:
        case = next((label for label, cl in parts.items() if all(cl.values())), None)
    if case is None:
        failures = [k for k, v in clauses.items() if not v]
    else:
        failures = []
    return HypothesisVerdict(case, clauses, failures)


def _as_lift(A, lam):
    if isinstance(lam, AlgebraElement):
        if lam.algebra is not A:
            raise AlgebraMismatch("lambda from a different algebra")
        return lam
    return A.scalar(A.F.coerce(lam) if not isinstance(lam, ef.ExtElement) else lam)


def _iso_pair(args):
    A, P, Q, budget, seed = args
    M = fpmod.PresentedModule(A, P)
    N = fpmod.PresentedModule(A, Q)
    try:
        return bool(fpmod.is_isomorphic(M, N, budget=budget, seed=seed))
    except fpmod.UndecidedAtBudget:
        return None


def bt2_family(n, w, x, y, yp, z, lambdas=None, betti_window=BETTI_WINDOW,
               budget=fpmod.DEFAULT_ISO_BUDGET, seed=0, threads=1) -> FamilyReport:
    """Members M_n(w, x, lam*y + y', z) with certificates and the pairwise isomorphism matrix."""
    A = w.algebra
    F = A.F
    verdict = check_bt2_hypotheses(n, w, x, y, yp, z)
    if not verdict:
        raise HypothesesFail("hypotheses fail: " + "; ".join(verdict.failures), verdict.clauses)
    if lambdas is None:
        lambdas = list(F.elements())
    lifts = [_as_lift(A, lam) for lam in lambdas]
    for i in range(len(lifts)):
        for j in range(i + 1, len(lifts)):
            if (lifts[i] - lifts[j]).in_maximal_ideal():
                raise HypothesesFail(
                    f"lambda values {i} and {j} agree modulo m",
                    {"distinct residues": False},
                )
    members = []
    for lam, lift in zip(lambdas, lifts):
        yl = lift * y + yp
        spec = ThetaSpec(n, w, x, yl, z)
        partner = ThetaSpec(n, x, w, -yl, None if z is None else -z)
        m = _member(lam if not isinstance(lam, AlgebraElement) else repr(lam), spec, partner, betti_window, seed=seed)
        _check_member_numbers(m, A.e)
        members.append(m)
    k = len(members)
    iso = [[i == j for j in range(k)] for i in range(k)]
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    jobs = [(A, members[i].module.pres, members[j].module.pres, budget, seed) for i, j in pairs]
    if threads > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_iso_pair, jobs))
    else:
        results = [_iso_pair(job) for job in jobs]
    for (i, j), r in zip(pairs, results):
        iso[i][j] = iso[j][i] = r
    return FamilyReport("bt2", verdict, members, iso, e=A.e)


def find_bt2_data(w, x, height=3):
    """(y, y', z) meeting condition c or d, with z weakly annihilated."""
    A = w.algebra
    F = A.F
    if not is_short(A):
        raise PreconditionFailed("algebra is not short")
    e = A.e
    if e < 3 or A.hilbert != [1, e, e - 1]:
        raise PreconditionFailed(f"need Hilbert series [1, e, e-1] with e >= 3, have {A.hilbert}")
    if not is_exact_pair(w, x):
        raise PreconditionFailed("(w, x) is not an exact pair")
    w_in_x = _mod_m2(w, [x])
    base = [x] if w_in_x else [w, x]
    tried = 0
    for z in iter_weak_annihilated(A, height):
        tried += 1
        ann = annihilator(z)
        rows = [AlgebraElement(A, r) for r in ann.rows]
        rows = [r for r in rows if not F.all_zero(r.linear_part())]
        chosen = []
        for r in rows:
            if lin_indep_mod_m2(base + chosen + [r]):
                chosen.append(r)
                if len(chosen) == 2:
                    break
        if len(chosen) < 2:
            continue
        y, yp = chosen
        verdict = check_bt2_hypotheses(3, w, x, y, yp, z)
        if verdict:
            return y, yp, z
    raise SearchExhausted(
        "no weakly annihilated z with two suitable elements in ann(z)",
        {"z_candidates": tried, "field": str(A.spec), "exhaustive": F.is_finite},
    )


def n2_pair_distinct(w, x, y, w2, x2, y2, budget=fpmod.DEFAULT_ISO_BUDGET, seed=0) -> bool:
    """True when M_2(w, x, y) and M_2(w', x', y') are not isomorphic."""
    for a, b, c in ((w, x, y), (w2, x2, y2)):
        if not is_exact_pair(a, b):
            raise HypothesesFail("(w, x) is not an exact pair")
        if not all(_in_m_minus_m2(t) for t in (a, b, c)):
            raise HypothesesFail("entries must lie in m minus m^2")
    M = family_module(2, w, x, y)
    N = family_module(2, w2, x2, y2)
    return not fpmod.is_isomorphic(M, N, budget=budget, seed=seed)
