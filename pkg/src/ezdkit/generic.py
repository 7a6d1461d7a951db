"""Random quadratic algebras: sampling, the linear-form test, densities.

A quadratic algebra in e variables is given by an n-dimensional subspace of
the m-dimensional space of quadrics, m = e(e+1)/2, n = (e^2 - e + 2)/2.
Quadric coordinates use the lexicographic basis x1^2, x1x2, ..., xe^2.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import exactfield as ef
from .algebra import (
    AlgebraElement,
    NotArtinianWithinCap,
    build_algebra,
    monomials,
)
from .ezd import (
    BudgetExceeded,
    NotInMaxIdeal,
    WrongHilbertSeries,
    is_exact_pair,
    scan_ezd,
    xi_blocks,
)
from .relparser import PolyExpr, PresentationSource, parse_field

DEFAULT_RANDOM_FORMS = 20
DEFAULT_SCAN_BUDGET = 10 ** 6


def quadric_count(e):
    return e * (e + 1) // 2


def relation_count(e):
    return (e * e - e + 2) // 2


def _field(field):
    if isinstance(field, ef.Field):
        return field
    if isinstance(field, ef.FieldSpec):
        return ef.make_field(field)
    return ef.make_field(parse_field(str(field)))


def sample_grassmannian_point(e, field, rng):
    """An m x n matrix of rank n over the field (rejection sampling)."""
    F = _field(field)
    if not F.is_finite:
        raise ValueError("sampling needs a finite field")
    m, n = quadric_count(e), relation_count(e)
    while True:
        Pi = F.random_array(rng, (m, n))
        if ef.rank(F, Pi) == n:
            return Pi


def source_from_quadrics(e, field, Pi, degree_cap=None):
    """PresentationSource whose relations are the columns of ``Pi``."""
    F = _field(field)
    monos = monomials(e, 2)
    variables = [f"x{i + 1}" for i in range(e)]
    rels, texts = [], []
    for j in range(Pi.shape[1]):
        terms = [(Pi[i, j], monos[i]) for i in range(len(monos)) if not F.is_zero(Pi[i, j])]
        rels.append(PolyExpr(terms, e))
        texts.append(_poly_text(F, terms, variables))
    kw = {} if degree_cap is None else {"degree_cap": degree_cap}
    return PresentationSource(F.spec, variables, rels, relation_text=texts, **kw)


def _poly_text(F, terms, variables):
    from .algebra import monomial_name

    parts = []
    for c, ex in terms:
        name = monomial_name(ex, variables)
        parts.append(name if F.is_one(c) else f"{F.format(c)}*{name}")
    return " + ".join(parts) if parts else "0"


def sample_quadratic_algebra(e, field, rng) -> PresentationSource:
    """Relations of a uniformly sampled point of the Grassmannian."""
    if e < 2:
        raise ValueError("e must be at least 2")
    return source_from_quadrics(e, field, sample_grassmannian_point(e, field, rng))


def grassmannian_points(e, field):
    """Every n-dimensional subspace of the quadric space, as m x n matrices
    (one per reduced echelon form)."""
    F = _field(field)
    m, n = quadric_count(e), relation_count(e)
    elems = list(F.elements())
    for pivots in itertools.combinations(range(m), n):
        # free entries: row r of the echelon form, columns after its pivot that are not pivots
        free = [(r, c) for r, p in enumerate(pivots) for c in range(p + 1, m) if c not in pivots]
        for vals in itertools.product(elems, repeat=len(free)):
            E = F.zeros((n, m))
            for r, p in enumerate(pivots):
                E[r, p] = F.one
            for (r, c), v in zip(free, vals):
                E[r, c] = v
            yield E.T.copy()


# --------------------------------------------------------------------------
# the linear-form test


def quadric_relation_matrix(A):
    """m x n matrix whose columns span the degree-2 relations of A."""
    F = A.F
    e = len(A.variables)
    monos = monomials(e, 2)
    index = {mo: i for i, mo in enumerate(monos)}
    rows = []
    for rel in A.source.relations:
        if rel.degree != 2:
            continue
        r = F.zeros(len(monos))
        for c, ex in rel.terms:
            r[index[ex]] = c
        rows.append(r)
    if not rows:
        return F.zeros((len(monos), 0))
    basis, _ = ef.row_basis(F, np.stack(rows))
    return basis.T.copy()


def _product_columns(A, coeffs):
    """Column j = quadric coordinates of x_j * l for l = sum coeffs[i] x_i."""
    F = A.F
    e = len(A.variables)
    monos = monomials(e, 2)
    index = {mo: i for i, mo in enumerate(monos)}
    out = F.zeros((len(monos), e))
    for j in range(e):
        for i in range(e):
            if F.is_zero(coeffs[i]):
                continue
            ex = [0] * e
            ex[i] += 1
            ex[j] += 1
            k = index[tuple(ex)]
            out[k, j] = F.add(out[k, j], coeffs[i])
    return out


def _nu(A, Pi, coeffs):
    """Maximal minors of (products | Pi) omitting each of the first e columns."""
    F = A.F
    Xi = np.concatenate([_product_columns(A, coeffs), Pi], axis=1)
    return [ef.det(F, np.delete(Xi, i, axis=1)) for i in range(len(A.variables))]


@dataclass
class LinearFormVerdict:
    kind: str  # "ezd_with" or "degenerate"
    form: AlgebraElement
    partner: AlgebraElement | None
    minors_form: list
    minors_partner: list | None
    which: str | None = None

    def __bool__(self):
        return self.kind == "ezd_with"


def linear_form_ezd_test(A, ell) -> LinearFormVerdict:
    """Decide whether ``ell`` is an exact zero divisor via the minors of
    (x_1 l | ... | x_e l | relations); the partner is sum (-1)^(i-1) nu_i x_i."""
    F = A.F
    e = len(A.variables)
    if A.hilbert != [1, e, e - 1]:
        raise WrongHilbertSeries(f"Hilbert series {A.hilbert} is not [1, {e}, {e - 1}]")
    if ell.is_unit():
        raise NotInMaxIdeal("the form is a unit")
    Pi = quadric_relation_matrix(A)
    if Pi.shape[1] != relation_count(e):
        raise WrongHilbertSeries("degree-2 relations do not have the expected dimension")
    coeffs = list(ell.linear_part())
    if all(F.is_zero(c) for c in coeffs):
        return LinearFormVerdict("degenerate", ell, None, [F.zero] * e, None, "form")
    nu = _nu(A, Pi, coeffs)
    if all(F.is_zero(v) for v in nu):
        return LinearFormVerdict("degenerate", ell, None, nu, None, "form")
    signed = [v if i % 2 == 0 else F.neg(v) for i, v in enumerate(nu)]
    partner = A.linear_form(signed)
    nu_p = _nu(A, Pi, signed)
    if all(F.is_zero(v) for v in nu_p):
        return LinearFormVerdict("degenerate", ell, partner, nu, nu_p, "partner")
    if not is_exact_pair(partner, ell):
        raise AssertionError("nonzero minors but the forms are not an exact pair")
    return LinearFormVerdict("ezd_with", ell, partner, nu, nu_p)


# --------------------------------------------------------------------------
# classification and densities


def _projective_array(p, e):
    """All projective points of F_p^e (lead coordinate 1), as an int64 array."""
    blocks = []
    for lead in range(e):
        k = e - 1 - lead
        tail = np.indices((p,) * k).reshape(k, -1).T if k else np.zeros((1, 0), dtype=np.int64)
        blk = np.zeros((tail.shape[0], e), dtype=np.int64)
        blk[:, lead] = 1
        blk[:, lead + 1:] = tail
        blocks.append(blk)
    return np.concatenate(blocks)


def has_conca_generator(A, budget=DEFAULT_SCAN_BUDGET):
    """Some linear form x with x^2 = 0 and x*m = m^2."""
    F = A.F
    e, f = A.e, A.hilbert[2]
    q = F.order
    if q is None:
        raise ValueError("needs a finite field")
    count = (q ** e - 1) // (q - 1)
    if count > budget:
        raise BudgetExceeded(f"{count} linear forms exceed the budget {budget}")
    blocks = xi_blocks(A)  # (e, f, e): block j = multiplication by x_j
    if F.fast:
        pts = _projective_array(F.p, e)
        # Xi_x = sum_j a_j block_j; x^2 = Xi_x @ a
        xis = np.tensordot(pts, blocks, axes=([1], [0])) % F.p  # (P, f, e)
        sq = np.einsum("pfe,pe->pf", xis, pts) % F.p
        for k in np.flatnonzero(~sq.any(axis=1)):
            if ef.rank(F, xis[k]) == f:
                return True
        return False
    from ._search import projective_points

    for pt in projective_points(F, e):
        xi = F.zeros((f, e))
        for a, blk in zip(pt, blocks):
            if not F.is_zero(a):
                xi = F.reduce(xi + blk * a)
        if F.all_zero(F.matmul(xi, np.asarray(pt, dtype=F.dtype))) and ef.rank(F, xi) == f:
            return True
    return False


def classify_source(src, e, rng=None, random_forms=DEFAULT_RANDOM_FORMS, budget=DEFAULT_SCAN_BUDGET):
    """Flags (hilbert_ok, ezd_ok, conca_ok) for one presentation; ezd_ok is
    None when the fallback scan is over budget."""
    try:
        A = build_algebra(src)
    except NotArtinianWithinCap:
        return {"hilbert_ok": False, "ezd_ok": False, "conca_ok": False, "hilbert": None}
    out = {"hilbert": list(A.hilbert)}
    if A.hilbert != [1, e, e - 1]:
        out.update(hilbert_ok=False, ezd_ok=False, conca_ok=False)
        return out
    out["hilbert_ok"] = True
    F = A.F
    ezd = False
    if rng is not None:
        for _ in range(random_forms):
            coeffs = [F.random(rng) for _ in range(e)]
            if all(F.is_zero(c) for c in coeffs):
                continue
            if linear_form_ezd_test(A, A.linear_form(coeffs)):
                ezd = True
                out["ezd_route"] = "random_form"
                break
    if not ezd:
        try:
            rep = scan_ezd(A, mode="projective_lines", budget=budget, witness_cap=1)
            ezd = rep.ezd_count > 0
            out["ezd_route"] = "scan"
        except BudgetExceeded:
            ezd = None
            out["ezd_route"] = "over_budget"
    out["ezd_ok"] = ezd
    try:
        out["conca_ok"] = has_conca_generator(A, budget) if ezd is not False else False
    except BudgetExceeded:
        out["conca_ok"] = None
    return out


@dataclass
class SampleReport:
    e: int
    field: str
    trials: int
    seed: object
    total: int = 0
    hilbert_ok: int = 0
    ezd_ok: int = 0
    conca_ok: int = 0
    undecided: int = 0
    log: list = dc_field(default_factory=list)

    def add(self, flags):
        self.total += 1
        self.hilbert_ok += bool(flags["hilbert_ok"])
        self.ezd_ok += flags["ezd_ok"] is True
        self.conca_ok += flags["conca_ok"] is True
        self.undecided += flags["ezd_ok"] is None or flags["conca_ok"] is None

    def ratios(self):
        h = self.hilbert_ok
        return {
            "hilbert_ok/total": self.hilbert_ok / self.total if self.total else 0.0,
            "ezd_ok/hilbert_ok": self.ezd_ok / h if h else 0.0,
            "conca_ok/hilbert_ok": self.conca_ok / h if h else 0.0,
        }

    def as_dict(self, with_log=False):
        d = {
            "e": self.e,
            "field": self.field,
            "trials": self.trials,
            "seed": self.seed,
            "total": self.total,
            "hilbert_ok": self.hilbert_ok,
            "ezd_ok": self.ezd_ok,
            "conca_ok": self.conca_ok,
            "undecided": self.undecided,
            "ratios": self.ratios(),
        }
        if with_log:
            d["log"] = self.log
        return d


def _trial(args):
    e, spec, seed, t, random_forms, budget = args
    F = ef.make_field(spec)
    rng = np.random.default_rng([seed, t])
    src = sample_quadratic_algebra(e, F, rng)
    flags = classify_source(src, e, rng, random_forms, budget)
    flags["trial"] = t
    flags["relations"] = src.relation_text
    return flags


def density_report(e, field, trials, seed, random_forms=DEFAULT_RANDOM_FORMS,
                   budget=DEFAULT_SCAN_BUDGET, threads=1, keep_log=False) -> SampleReport:
    """Sample ``trials`` algebras; trial t uses the generator seeded by (seed, t)."""
    F = _field(field)
    if not F.is_finite:
        raise ValueError("density sampling needs a finite field")
    if trials < 1:
        raise ValueError("trials must be positive")
    jobs = [(e, F.spec, seed, t, random_forms, budget) for t in range(trials)]
    if threads > 1 and trials > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_trial, jobs, chunksize=max(1, trials // (4 * threads))))
    else:
        results = [_trial(j) for j in jobs]
    rep = SampleReport(e, str(F.spec), trials, seed)
    for flags in results:
        rep.add(flags)
        if keep_log:
            rep.log.append(flags)
    return rep


def exhaustive_report(e, field, budget=DEFAULT_SCAN_BUDGET) -> SampleReport:
    """Classify every point of the Grassmannian (small fields and e only)."""
    F = _field(field)
    rep = SampleReport(e, str(F.spec), 0, None)
    for Pi in grassmannian_points(e, F):
        rep.add(classify_source(source_from_quadrics(e, F, Pi), e, None, 0, budget))
    rep.trials = rep.total
    return rep
