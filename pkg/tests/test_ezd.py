import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ezdkit import ezd
from ezdkit.algebra import annihilator, load_algebra, maximal_ideal_power, principal_ideal

from conftest import load


def _ring8_form(A, a, b, c, d):
    return A.linear_form([a, b, c, d])


def _int_matrix(xi):
    return [[int(v) for v in row] for row in xi.matrix.data]


# ---- the multiplication matrix Xi_x


@given(coeffs=st.lists(st.integers(0, 4), min_size=4, max_size=4))
def test_xi_matrix_of_ring8(coeffs):
    A = load("ring8_f5")
    a, b, c, d = coeffs
    xi = ezd.xi_matrix(_ring8_form(A, a, b, c, d))
    assert _int_matrix(xi) == [[b, a, 0, d], [c, 0, a, d], [0, c, b, 0]]


def test_xi_matrix_edge_cases(selfpair_e3):
    assert ezd.xi_matrix(selfpair_e3.zero()).rank == 0
    xi = ezd.xi_matrix(selfpair_e3.generator(0))
    assert xi.rank == 2 == xi.f
    with pytest.raises(ezd.NotInMaxIdeal):
        ezd.xi_matrix(selfpair_e3.one())
    with pytest.raises(ezd.NotShort):
        ezd.xi_matrix(load("m4_f3").generator(0))


# ---- certification


@pytest.mark.parametrize("name", ["ring8_f5", "ring8_f7"])
def test_ring8_exact_pair(name):
    A = load(name)
    x, w = A.parse("s+t+2*u-v"), A.parse("3*s+t-2*u+4*v")
    cert = ezd.is_exact_zero_divisor(x)
    assert cert
    assert ezd.is_unit_multiple(cert.partner, w)
    assert annihilator(x) == principal_ideal(w) and annihilator(w) == principal_ideal(x)
    assert cert.checks["sequence_exact"]
    assert cert.length_x == cert.length_w == 4


def test_self_partner(selfpair_e3):
    x1 = selfpair_e3.generator(0)
    cert = ezd.is_exact_zero_divisor(x1)
    assert ezd.is_unit_multiple(cert.partner, x1)
    assert ezd.is_exact_pair(x1, x1)


def test_no_ezd_over_f2_linear_forms():
    A = load("ring8_f2")
    for x in list(ezd.all_linear_forms(A))[1:]:
        out = ezd.is_exact_zero_divisor(x)
        assert not out and out.reason in ("AnnNotCyclic", "PartnerFailsBack")


def test_exact_pair_negatives(ring8_f5):
    s, t, _, _ = ring8_f5.generators()
    assert not (s * t).is_zero()
    assert not ezd.is_exact_pair(s, t)
    assert not ezd.is_exact_pair(ring8_f5.one(), s)


def test_certification_errors(ring8_f5):
    with pytest.raises(ezd.ZeroElement):
        ezd.is_exact_zero_divisor(ring8_f5.zero())
    with pytest.raises(ezd.UnitElement):
        ezd.is_exact_zero_divisor(ring8_f5.one() + ring8_f5.generator(0))


# ---- minors


def _minor_formulas(F, a, b, c, d):
    """Maximal minors of [[b,a,0,d],[c,0,a,d],[0,c,b,0]], minor j omitting column j, by hand."""
    return [F.reduce(np.array(v, dtype=object)) for v in
            (-a * d * (b + c), b * d * (c - b), c * d * (c - b), -2 * a * b * c)]


@given(coeffs=st.lists(st.integers(0, 4), min_size=4, max_size=4))
def test_minors_match_hand_formulas(coeffs):
    A = load("ring8_f5")
    F = A.F
    a, b, c, d = coeffs
    mx = ezd.signed_minors(F, ezd.xi_raw(A, np.array(coeffs)))
    assert [int(m) % 5 for m in mx] == [int(v) % 5 for v in _minor_formulas(F, a, b, c, d)]


def test_partner_via_minors_ring8(ring8_f5):
    A = ring8_f5
    x = A.parse("s+t+2*u-v")
    w, mx, mw = ezd.partner_via_minors(x)
    # counted from the last column: the third minor is bd(c - b) = -1 at (a,b,c,d) = (1,1,2,-1)
    assert mx[-3] == 5 - 1
    xp = A.parse("3*s+t-2*u+4*v")
    assert ezd.is_unit_multiple(w, xp)
    # and the first one, -2abc, is 12 at (a,b,c) = (3,1,-2)
    _, mxp, _ = ezd.partner_via_minors(xp)
    assert mxp[-1] == 12 % 5
    assert ezd.is_exact_pair(w, x)


def test_minors_degenerate_over_f2():
    A = load("ring8_f2")
    out = ezd.partner_via_minors(A.parse("s+t"))
    # d = 0 kills three minors and 2 = 0 kills -2abc, so x itself is degenerate
    assert not out and out.which == "minors_x"
    assert all(int(m) == 0 for m in out.minors_x)
    for x in ezd.all_linear_forms(A):
        if not x.is_zero():
            assert not ezd.partner_via_minors(x)


def test_minors_preconditions():
    with pytest.raises(ezd.WrongHilbertSeries):
        ezd.partner_via_minors(load_algebra(
            "field = GF(5)\nvars = x y z\nrelations = x^2, y^2, z^2, x*y*z").generator(0))
    with pytest.raises(ezd.NotInMaxIdeal):
        A = load("selfpair_e3_f5")
        ezd.partner_via_minors(A.generator(0) * A.generator(1))


# ---- Conca generators


def test_conca_examples(selfpair_e3, ring8_f5):
    assert ezd.is_conca_generator(selfpair_e3.generator(0))
    s, t, _, _ = ring8_f5.generators()
    assert not ezd.is_conca_generator(s * t)
    assert not ezd.is_conca_generator(ring8_f5.parse("s+t+2*u-v"))
    with pytest.raises(ezd.NotShort):
        ezd.is_conca_generator(load("m4_f3").generator(0))


# ---- scans


def test_scan_ring8_small_fields():
    for name, size in (("ring8_f2", 2 ** 7), ("ring8_f3", 3 ** 7)):
        rep = ezd.scan_ezd(load(name))
        assert rep.elements_checked == size
        assert rep.ezd_count == 0 and rep.conca_count == 0


def test_scan_ci2_against_pair_enumeration():
    A = load("ci2_f2")
    rep = ezd.scan_ezd(A)
    # oracle: x is an ezd iff some w in m passes the direct pair check
    m = [A.element(np.array((0,) + c)) for c in itertools.product(range(2), repeat=A.dim - 1)]
    oracle = [x for x in m if any(ezd.is_exact_pair(w, x) for w in m)]
    assert rep.ezd_count == len(oracle) == 6
    assert all(not A.F.all_zero(x.linear_part()) for x in oracle)


def test_scan_modes_agree_on_ring8_f5():
    A = load("ring8_f5")
    proj = ezd.scan_ezd(A, mode="projective_lines")
    # each projective line of m/m^2 carries q-1 units times q^3 degree-2 tails
    assert proj.elements_checked == (5 ** 4 - 1) // 4
    assert proj.ezd_count * 4 * 5 ** 3 == 16000
    assert proj.conca_count == 0


def test_scan_budget_and_field():
    with pytest.raises(ezd.BudgetExceeded):
        ezd.scan_ezd(load("ring8_f5"), budget=1000)
    Q = load_algebra("field = QQ\nvars = x y\nrelations = x^2, y^2")
    with pytest.raises(ezd.InfiniteField):
        ezd.scan_ezd(Q)


# ---- weakly annihilated elements


def test_find_weak_annihilated():
    A = load("selfpair_e4_f5")
    x2 = A.generator(1)
    assert ezd.xi_matrix(x2).rank < A.hilbert[2]
    x2m = principal_ideal(x2).times(maximal_ideal_power(A, 1))
    assert x2m <= maximal_ideal_power(A, 2) and x2m.dim < A.hilbert[2]
    z = ezd.find_weak_annihilated(A)
    assert z is not None and ezd.xi_matrix(z).rank < A.hilbert[2]
    R8 = load("ring8_f5")
    z8 = ezd.find_weak_annihilated(R8)
    assert not R8.F.all_zero(z8.linear_part())
    assert ezd.xi_matrix(z8).rank <= 2
    with pytest.raises(ezd.PreconditionFailed):
        ezd.find_weak_annihilated(load("ci2_f2"))


# ---- invariants


SHORT = ["ring8_f5", "ring8_f7", "ring8_gf9", "selfpair_e3_f5", "selfpair_e4_f5", "ci2_f3", "xy_cube_f5"]


@pytest.mark.parametrize("name", SHORT)
@given(seed=st.integers(0, 2**32 - 1))
def test_certificate_invariants(name, seed):
    A = load(name)
    rng = np.random.default_rng(seed)
    x = A.random_element(rng)
    if not x.in_maximal_ideal() or x.is_zero():
        return
    cert = ezd.is_exact_zero_divisor(x)
    c = A.F.random(rng)
    if A.F.is_zero(c):
        c = A.F.one
    # unit scaling, including by non-scalar units
    unit = A.scalar(c) + A.random_element(rng).component(1)
    assert bool(ezd.is_exact_zero_divisor(unit * x)) == bool(cert)
    if not cert:
        return
    w = cert.partner
    assert ezd.is_exact_pair(w, x) and ezd.is_exact_pair(x, w)
    back = ezd.is_exact_zero_divisor(w)
    assert back and ezd.is_unit_multiple(back.partner, x)
    if A.hilbert == [1, A.e, A.e - 1]:
        assert cert.length_x == A.e
        assert ezd.xi_matrix(x).rank == A.hilbert[2]


@pytest.mark.parametrize("name", ["ci2_f2", "ci2_f3", "selfpair_e3_f5"])
def test_partner_is_unique_up_to_units_exhaustively(name):
    A = load(name)
    units = [A.element(np.array(c)) for c in itertools.product(range(A.F.order), repeat=A.dim) if c[0]]
    for x in list(ezd.all_linear_forms(A))[1:]:
        cert = ezd.is_exact_zero_divisor(x)
        if not cert:
            continue
        back = ezd.is_exact_zero_divisor(cert.partner).partner
        assert any(u * x == back for u in units)
