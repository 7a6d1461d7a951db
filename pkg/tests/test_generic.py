import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ezdkit import exactfield as ef, ezd, generic
from ezdkit.algebra import (
    NotArtinianWithinCap, build_algebra, load_algebra, maximal_ideal_power, principal_ideal,
)

from conftest import load


def test_counts():
    assert [(generic.quadric_count(e), generic.relation_count(e)) for e in (2, 3, 4)] == [(3, 2), (6, 4), (10, 7)]
    # n + (e - 1) = m: the relations leave e - 1 quadrics
    for e in range(2, 9):
        assert generic.quadric_count(e) - generic.relation_count(e) == e - 1


# ---- the linear-form test


def test_linear_form_examples():
    A = load("selfpair_e3_f5")
    x1 = A.generator(0)
    v = generic.linear_form_ezd_test(A, x1)
    assert v and ezd.is_unit_multiple(v.partner, x1)
    zero = generic.linear_form_ezd_test(A, A.zero())
    assert not zero and zero.which == "form"
    with pytest.raises(ezd.NotInMaxIdeal):
        generic.linear_form_ezd_test(A, A.one())
    G = load_algebra("field = GF(5)\nvars = x y z\nrelations = x*y, x*z, y*z, x^2 - y^2, x^2 - z^2")
    with pytest.raises(ezd.WrongHilbertSeries):
        generic.linear_form_ezd_test(G, G.generator(0))


def test_linear_form_degenerate_over_f2():
    A = load("ring8_f2")
    for x in list(ezd.all_linear_forms(A))[1:]:
        assert generic.linear_form_ezd_test(A, x).kind == "degenerate"


@pytest.mark.parametrize("name", ["ring8_f2", "ring8_f3", "selfpair_e3_f5"])
def test_linear_form_test_matches_certification(name):
    A = load(name)
    for x in list(ezd.all_linear_forms(A))[1:]:
        assert bool(generic.linear_form_ezd_test(A, x)) == bool(ezd.is_exact_zero_divisor(x))


@given(coeffs=st.lists(st.integers(0, 6), min_size=4, max_size=4))
def test_linear_form_success_is_an_exact_pair(coeffs):
    A = load("ring8_f7")
    x = A.linear_form(coeffs)
    if x.is_zero():
        return
    v = generic.linear_form_ezd_test(A, x)
    if v:
        assert ezd.is_exact_pair(v.partner, x) and ezd.is_exact_pair(x, v.partner)
        back = generic.linear_form_ezd_test(A, v.partner)
        assert back and ezd.is_unit_multiple(back.partner, x)


# ---- sampling


def test_grassmannian_point_count():
    F2 = generic._field("GF(2)")
    pts = list(generic.grassmannian_points(2, F2))
    assert len(pts) == 7
    # the spans are pairwise different
    spans = {frozenset(tuple(int(c) for c in (Pi @ np.array(v)) % 2)
                       for v in itertools.product(range(2), repeat=2)) for Pi in pts}
    assert len(spans) == 7
    # Gaussian binomial [6 choose 4]_2
    assert sum(1 for _ in generic.grassmannian_points(3, F2)) == 651


@given(seed=st.integers(0, 2**32 - 1), e=st.integers(2, 5))
def test_samples_have_full_rank(seed, e):
    F = generic._field("GF(7)")
    Pi = generic.sample_grassmannian_point(e, F, np.random.default_rng(seed))
    assert Pi.shape == (generic.quadric_count(e), generic.relation_count(e))
    assert ef.rank(F, Pi) == generic.relation_count(e)


def test_sampling_rejects_bad_input():
    with pytest.raises(ValueError):
        generic.sample_quadratic_algebra(1, "GF(5)", np.random.default_rng(0))
    with pytest.raises(ValueError):
        generic.density_report(3, "QQ", 1, 0)
    with pytest.raises(ValueError):
        generic.density_report(3, "GF(5)", 0, 0)


def _oracle_flags(src, e):
    """Classify by exhaustive scanning, independent of the minors."""
    try:
        A = build_algebra(src)
    except NotArtinianWithinCap:
        return (False, False, False)
    if A.hilbert != [1, e, e - 1]:
        return (False, False, False)
    has_ezd = ezd.scan_ezd(A, mode="all_of_m").ezd_count > 0
    m, m2 = maximal_ideal_power(A, 1), maximal_ideal_power(A, 2)
    conca = any((x * x).is_zero() and principal_ideal(x).times(m) == m2
                for x in list(ezd.all_linear_forms(A))[1:])
    return (True, has_ezd, conca)


@pytest.mark.parametrize("field,expected", [("GF(2)", (7, 4, 4, 4)), ("GF(3)", (13, 9, 9, 6))])
def test_exhaustive_binary_quadrics(field, expected):
    F = generic._field(field)
    rep = generic.exhaustive_report(2, F)
    assert (rep.total, rep.hilbert_ok, rep.ezd_ok, rep.conca_ok) == expected
    assert rep.undecided == 0
    # q + 1 hyperplanes l * (x, y) fail the Hilbert condition
    assert rep.total - rep.hilbert_ok == F.order + 1
    tally = [0, 0, 0]
    for Pi in generic.grassmannian_points(2, F):
        for i, flag in enumerate(_oracle_flags(generic.source_from_quadrics(2, F, Pi), 2)):
            tally[i] += flag
    assert tuple(tally) == expected[1:]


def test_exhaustive_ternary_over_f2():
    rep = generic.exhaustive_report(3, "GF(2)")
    assert rep.total == 651
    assert rep.conca_ok <= rep.ezd_ok <= rep.hilbert_ok <= rep.total
    assert rep.ezd_ok == rep.hilbert_ok


def test_density_small_seed_two():
    rep = generic.density_report(2, "GF(2)", 1, 2, keep_log=True)
    assert (rep.hilbert_ok, rep.ezd_ok, rep.conca_ok) == (1, 1, 1)
    A = build_algebra(generic.sample_quadratic_algebra(2, "GF(2)", np.random.default_rng([2, 0])))
    assert A.hilbert == [1, 2, 1]


@given(seed=st.integers(0, 10**6))
def test_density_containments(seed):
    rep = generic.density_report(3, "GF(5)", 3, seed)
    assert rep.conca_ok <= rep.ezd_ok <= rep.hilbert_ok <= rep.total == 3
    r = rep.ratios()
    assert all(0.0 <= v <= 1.0 for v in r.values())


def test_density_is_deterministic():
    one = generic.density_report(3, "GF(7)", 6, 11, keep_log=True).as_dict(with_log=True)
    again = generic.density_report(3, "GF(7)", 6, 11, keep_log=True).as_dict(with_log=True)
    threaded = generic.density_report(3, "GF(7)", 6, 11, threads=2, keep_log=True).as_dict(with_log=True)
    assert one == again == threaded
