"""Exact zero divisors: certification, minor-based partners, and scans.

A non-unit ``x != 0`` is an exact zero divisor when ann(x) = (w) and
ann(w) = (x) for some w.  The certificate path computes ann(x) as a kernel,
checks that it needs exactly one generator (dim ann(x) - dim m*ann(x) = 1),
takes the first echelon basis vector outside m*ann(x) as the partner, and
then confirms ann(w) = (x) by comparing dimensions (the inclusion
(x) <= ann(w) always holds).

For a short algebra with Hilbert series [1, e, f] the map m/m^2 -> m^2 given
by multiplication with x is the f x e matrix returned by :func:`xi_matrix`.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import exactfield as ef
from ._search import (
    affine_points,
    integer_points_by_weight,
    projective_points,
    projective_points_by_weight,
)
from .algebra import (
    AlgebraElement,
    AlgebraMismatch,
    IdealView,
    annihilator,
    principal_ideal,
)
from .exactfield import ScalarMatrix

DEFAULT_BUDGET = 10 ** 6
DEFAULT_WITNESS_CAP = 20


class NotShort(ValueError):
    pass


class NotInMaxIdeal(ValueError):
    pass


class ZeroElement(ValueError):
    pass


class UnitElement(ValueError):
    pass


class WrongHilbertSeries(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


class InfiniteField(ValueError):
    pass


class PreconditionFailed(ValueError):
    pass


# --------------------------------------------------------------------------
# result records


@dataclass
class ExactPairCertificate:
    w: AlgebraElement
    x: AlgebraElement
    ann_x: IdealView
    ann_w: IdealView
    checks: dict = dc_field(default_factory=dict)

    def __bool__(self):
        return True

    @property
    def partner(self):
        return self.w

    @property
    def length_x(self):
        return self.checks["length_(x)"]

    @property
    def length_w(self):
        return self.checks["length_(w)"]


@dataclass
class NotEZD:
    """Negative answer; falsy.  ``reason`` is AnnNotCyclic or PartnerFailsBack."""

    x: AlgebraElement
    reason: str
    details: dict = dc_field(default_factory=dict)

    def __bool__(self):
        return False


@dataclass
class Degenerate:
    """The minor construction gives nothing: all minors of x, or of w, vanish."""

    x: AlgebraElement
    w: AlgebraElement | None
    minors_x: list
    minors_w: list | None
    which: str

    def __bool__(self):
        return False


@dataclass
class XiMatrix:
    element: AlgebraElement
    matrix: ScalarMatrix

    @property
    def rank(self):
        return self.matrix.rank()

    @property
    def f(self):
        return self.matrix.rows

    @property
    def e(self):
        return self.matrix.cols


@dataclass
class ScanReport:
    mode: str
    field: str
    elements_checked: int
    ezd_count: int
    conca_count: int | None
    witnesses: list
    conca_witnesses: list

    def as_dict(self):
        from .relparser import render

        return {
            "mode": self.mode,
            "field": self.field,
            "elements_checked": self.elements_checked,
            "ezd_count": self.ezd_count,
            "conca_count": self.conca_count,
            "witnesses": [render(w) for w in self.witnesses],
            "conca_witnesses": [render(w) for w in self.conca_witnesses],
        }


# --------------------------------------------------------------------------
# the multiplication map m/m^2 -> m^2


def _require_short(A):
    if A.top_degree > 2:
        raise NotShort(f"m^3 != 0 (top degree {A.top_degree})")


def xi_blocks(A):
    """Array (e, f, e): block j is the matrix of multiplication by x_j."""
    sl1, sl2 = A.degree_slices[1], A.degree_slices[2] if A.top_degree >= 2 else slice(A.dim, A.dim)
    return np.stack([A.ops[1 + j][sl2, sl1] for j in range(A.e)])


def xi_raw(A, linear_coeffs):
    """Raw f x e matrix of multiplication by the linear form with these coefficients."""
    F = A.F
    blocks = _xi_cache(A)
    if F.fast:
        return F.reduce(np.tensordot(np.asarray(linear_coeffs, dtype=np.int64), blocks, axes=1))
    out = F.zeros(blocks.shape[1:])
    for a, blk in zip(linear_coeffs, blocks):
        if not F.is_zero(a):
            out = F.reduce(out + blk * a)
    return out


def _xi_cache(A):
    blocks = A.__dict__.get("_xi_blocks")
    if blocks is None:
        blocks = xi_blocks(A)
        A.__dict__["_xi_blocks"] = blocks
    return blocks


def xi_matrix(x: AlgebraElement) -> XiMatrix:
    """Entry (i, j) is the coefficient of the i-th degree-2 basis monomial in x*x_j."""
    A = x.algebra
    _require_short(A)
    if not x.in_maximal_ideal():
        raise NotInMaxIdeal("x is a unit")
    return XiMatrix(x, ScalarMatrix(A.F, xi_raw(A, x.linear_part())))


def signed_minors(F, M):
    """Maximal minors of an (e-1) x e matrix: entry j omits column j."""
    f, e = M.shape
    if f != e - 1:
        raise WrongHilbertSeries(f"need an (e-1) x e matrix, got {f} x {e}")
    return [ef.det(F, np.delete(M, j, axis=1)) for j in range(e)]


# --------------------------------------------------------------------------
# certification


def _m_times(A, rows):
    """Rows spanning m * span(rows) (the products with each generator)."""
    if len(rows) == 0:
        return rows
    return np.concatenate([A.F.matmul(rows, A.ops[1 + i].T) for i in range(A.e)])


def _ezd_core(A, coords):
    """Shared test.  Returns (ok, reason, w_coords, ann_rows, ann_pivots, rank_x)."""
    F = A.F
    L = A.operator_of(coords)
    ker = ef.nullspace_rows(F, L)
    rank_x = A.dim - len(ker)
    ann_rows, ann_piv = ef.row_basis(F, ker) if len(ker) else (ker, [])
    mann = _m_times(A, ann_rows)
    mrows, mpiv = ef.row_basis(F, mann) if len(mann) else (mann, [])
    if len(ann_piv) - len(mpiv) != 1:
        return False, "AnnNotCyclic", None, ann_rows, ann_piv, rank_x
    w = None
    for r in ann_rows:
        if not ef.in_span(F, mrows, mpiv, r):
            w = r
            break
    Lw = A.operator_of(w)
    rank_w = ef.rank(F, Lw)
    # (x) <= ann(w) always, so equal dimensions give equality
    if A.dim - rank_w != rank_x:
        return False, "PartnerFailsBack", w, ann_rows, ann_piv, rank_x
    return True, None, w, ann_rows, ann_piv, rank_x


def _check_element(x):
    if x.is_zero():
        raise ZeroElement("x = 0")
    if x.is_unit():
        raise UnitElement("x is a unit")


def is_exact_zero_divisor(x: AlgebraElement):
    """ExactPairCertificate with a canonical partner, or a falsy NotEZD."""
    _check_element(x)
    A = x.algebra
    ok, reason, w_coords, ann_rows, ann_piv, rank_x = _ezd_core(A, x.coords)
    if not ok:
        details = {"dim_ann_x": len(ann_piv)}
        if w_coords is not None:
            details["partner_candidate"] = AlgebraElement(A, w_coords)
        return NotEZD(x, reason, details)
    w = AlgebraElement(A, w_coords)
    ann_x = annihilator(x)
    ann_w = annihilator(w)
    px = principal_ideal(x)
    pw = principal_ideal(w)
    checks = {
        "wx=0": (w * x).is_zero(),
        "ann(x)=(w)": ann_x == pw,
        "ann(w)=(x)": ann_w == px,
        "length_(x)": px.dim,
        "length_(w)": pw.dim,
        # R -w-> R -x-> R -w-> R exact: both middle homologies vanish
        "sequence_exact": px.dim + pw.dim == A.dim,
    }
    if not all(checks[k] for k in ("wx=0", "ann(x)=(w)", "ann(w)=(x)", "sequence_exact")):
        raise AssertionError(f"certificate self-check failed: {checks}")
    return ExactPairCertificate(w, x, ann_x, ann_w, checks)


def is_exact_pair(w: AlgebraElement, x: AlgebraElement) -> bool:
    """Direct subspace comparison of ann(x) = (w) and ann(w) = (x)."""
    if w.algebra is not x.algebra:
        raise AlgebraMismatch("elements of different algebras")
    for y in (w, x):
        if y.is_zero() or y.is_unit():
            return False
    return annihilator(x) == principal_ideal(w) and annihilator(w) == principal_ideal(x)


def is_unit_multiple(a: AlgebraElement, b: AlgebraElement) -> bool:
    """Is a = u*b for some unit u?  Equivalent to (a) = (b) for these rings."""
    return principal_ideal(a) == principal_ideal(b)


def partner_via_minors(x: AlgebraElement):
    """w = sum_j (-1)^j mu_j(x) x_j (0-based j) from the maximal minors of Xi_x.

    Returns ``(w, minors_x, minors_w)`` or a falsy :class:`Degenerate`.  The
    minor with index j omits column j of the matrix.
    """
    A = x.algebra
    _require_short(A)
    h = A.hilbert
    if len(h) != 3 or h[2] != A.e - 1:
        raise WrongHilbertSeries(f"Hilbert series {h} is not [1, e, e-1]")
    if not x.in_maximal_ideal() or A.F.all_zero(x.linear_part()):
        raise NotInMaxIdeal("x must lie in m but not in m^2")
    F = A.F
    mx = signed_minors(F, xi_raw(A, x.linear_part()))
    if all(F.is_zero(m) for m in mx):
        return Degenerate(x, None, mx, None, "minors_x")
    coeffs = [m if j % 2 == 0 else F.neg(m) for j, m in enumerate(mx)]
    w = A.linear_form(coeffs)
    mw = signed_minors(F, xi_raw(A, w.linear_part()))
    if all(F.is_zero(m) for m in mw):
        return Degenerate(x, w, mx, mw, "minors_w")
    if not is_exact_pair(w, x):
        raise AssertionError("nondegenerate minors but (w, x) is not an exact pair")
    return w, mx, mw


def is_conca_generator(x: AlgebraElement) -> bool:
    """x^2 = 0 and x*m = m^2 (rank of Xi_x is f)."""
    A = x.algebra
    _require_short(A)
    if not x.in_maximal_ideal():
        return False
    if not (x * x).is_zero():
        return False
    f = A.hilbert[2] if A.top_degree >= 2 else 0
    return ef.rank(A.F, xi_raw(A, x.linear_part())) == f


# --------------------------------------------------------------------------
# scans


def _element_count(A, mode):
    q = A.F.order
    if mode == "all_of_m":
        return q ** (A.dim - 1)  # includes zero
    return (q ** A.e - 1) // (q - 1)


def _scan_chunk(args):
    A, mode, start, stop, witness_cap, want_conca = args
    F = A.F
    elems = list(F.elements())
    q = len(elems)
    n_pos = A.dim - 1 if mode == "all_of_m" else A.e
    f = A.hilbert[2] if (want_conca and A.top_degree >= 2) else 0
    ezd = conca = 0
    wit, cwit = [], []
    points = _points_slice(F, elems, q, n_pos, mode, start, stop)
    for pt in points:
        coords = F.zeros(A.dim)
        if mode == "all_of_m":
            coords[1:] = pt
        else:
            coords[1:1 + A.e] = pt
        if F.all_zero(coords):
            continue
        ok = _ezd_core(A, coords)[0]
        if ok:
            ezd += 1
            if len(wit) < witness_cap:
                wit.append(coords)
        if want_conca:
            lin = coords[A.degree_slices[1]]
            if not F.all_zero(lin):
                sq = F.matmul(A.operator_of(coords), coords)
                if F.all_zero(sq) and ef.rank(F, xi_raw(A, lin)) == f:
                    conca += 1
                    if len(cwit) < witness_cap:
                        cwit.append(coords)
    return ezd, conca, wit, cwit


def _points_slice(F, elems, q, n, mode, start, stop):
    """Points with index in [start, stop) of the scan order."""
    if mode == "all_of_m":
        for k in range(start, stop):
            digits = []
            for _ in range(n):
                k, r = divmod(k, q)
                digits.append(elems[r])
            yield tuple(reversed(digits))
    else:
        for k, pt in enumerate(projective_points(F, n)):
            if k >= stop:
                return
            if k >= start:
                yield pt


def scan_ezd(A, mode="all_of_m", budget=DEFAULT_BUDGET, witness_cap=DEFAULT_WITNESS_CAP, threads=1):
    """Count exact zero divisors by exhaustive enumeration.

    ``all_of_m`` visits every element of m.  ``projective_lines`` visits one
    linear form per line of m/m^2; it is only offered for short algebras,
    where ann(x) depends on the linear part of x alone.  Conca generators
    are counted for short algebras only (None otherwise).
    """
    if not A.F.is_finite:
        raise InfiniteField("scans need a finite field")
    if mode not in ("all_of_m", "projective_lines"):
        raise ValueError(f"unknown scan mode {mode!r}")
    if mode == "projective_lines":
        _require_short(A)
    total = _element_count(A, mode)
    if total > budget:
        raise BudgetExceeded(f"{total} elements exceed the budget of {budget}")
    want_conca = A.top_degree <= 2
    threads = max(1, int(threads or 1))
    if threads == 1 or total < 2000:
        results = [_scan_chunk((A, mode, 0, total, witness_cap, want_conca))]
    else:
        step = -(-total // (threads * 4))
        jobs = [(A, mode, s, min(s + step, total), witness_cap, want_conca) for s in range(0, total, step)]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_scan_chunk, jobs))
    ezd = sum(r[0] for r in results)
    conca = sum(r[1] for r in results)
    wit = [AlgebraElement(A, c) for r in results for c in r[2]][:witness_cap]
    cwit = [AlgebraElement(A, c) for r in results for c in r[3]][:witness_cap]
    # zero is visited too (and is never an ezd), so all_of_m reports |m|
    return ScanReport(
        mode, str(A.spec), total, ezd, conca if want_conca else None, wit, cwit
    )


def default_threads():
    return os.cpu_count() or 1


# --------------------------------------------------------------------------
# weakly annihilated elements


def iter_weak_annihilated(A, height=3):
    """Linear forms z (up to scalars) with rank Xi_z < f, smallest support first."""
    _require_short(A)
    f = A.hilbert[2] if A.top_degree >= 2 else 0
    if not 2 <= f <= A.e - 1:
        raise PreconditionFailed(f"need 2 <= f <= e-1, have f={f}, e={A.e}")
    F = A.F
    pts = projective_points_by_weight(F, A.e) if F.is_finite else integer_points_by_weight(F, A.e, height)
    for pt in pts:
        if ef.rank(F, xi_raw(A, pt)) < f:
            yield A.linear_form(pt)


def find_weak_annihilated(A, height=3):
    """First z in m minus m^2 with z*m properly inside m^2, or None.

    Over QQ the sweep covers integer coefficients up to ``height`` and is not
    exhaustive.
    """
    for z in iter_weak_annihilated(A, height):
        return z
    return None


def all_linear_forms(A):
    """Affine enumeration of R_1 (zero included) in odometer order."""
    for pt in affine_points(A.F, A.e):
        yield A.linear_form(pt)
