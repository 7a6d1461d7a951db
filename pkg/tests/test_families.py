import pytest

from ezdkit import families, fpmod
from ezdkit.algebra import AlgebraMismatch, load_algebra, span_membership_mod
from ezdkit.ezd import PreconditionFailed, is_exact_pair
from ezdkit.families import (
    HypothesesFail, ThetaSpec, build_family, bt2_family, check_bt1_hypotheses,
    check_bt2_hypotheses, family_module, find_bt2_data, find_z_for_y, n2_pair_distinct, theta,
)
from ezdkit.fpmod import _matrix_product, _as_raw_matrix

from conftest import load

E4_QQ = "field = QQ\nvars = x1 x2 x3 x4\nrelations = x1^2, x2^2, x2*x3, x2*x4, x3^2, x3*x4, x4^2"


@pytest.fixture(scope="module")
def e3():
    A = load("selfpair_e3_f5")
    return (A,) + tuple(A.generators())


@pytest.fixture(scope="module")
def ring8_pair():
    A = load("ring8_f5")
    return A, A.parse("3*s+t-2*u+4*v"), A.parse("s+t+2*u-v")


# ---- theta


def test_theta_shapes(e3):
    A, x1, x2, x3 = e3
    zero = A.zero()
    assert theta(ThetaSpec(1, x1)) == [[x1]]
    assert theta(ThetaSpec(2, x1, x2, x3)) == [[x1, x3], [zero, x2]]
    T = theta(ThetaSpec(5, x1, x2, x3, x1 + x2))
    assert [T[i][i] for i in range(5)] == [x1, x2, x1, x2, x1]
    assert [T[i][i + 1] for i in range(4)] == [x3, x1 + x2, x3, x1 + x2]
    assert all(T[i][j] == zero for i in range(5) for j in range(5) if j not in (i, i + 1))
    with pytest.raises(ValueError):
        ThetaSpec(3, x1, x1, x2)
    with pytest.raises(AlgebraMismatch):
        ThetaSpec(2, x1, load("ring8_f5").generator(0), x2)


def test_theta_minimally_generated(e3):
    A, x1, x2, x3 = e3
    for n in range(1, 6):
        assert family_module(n, x1, x1, x2, x3).b0 == n


# ---- first family


def test_bt1_hypotheses(e3, ring8_pair):
    A, x1, x2, x3 = e3
    v = check_bt1_hypotheses(x1, x1, x2, x3)
    assert v.case == "caseB" and (x2 * x3).is_zero()
    R, w, x = ring8_pair
    s = R.generator(0)
    v8 = check_bt1_hypotheses(w, x, s, s)
    # evaluated clause by clause: s^2 = 0 is a relation and w, x, s are independent mod m^2
    assert (s * s).is_zero()
    assert v8.clauses["A: w, x, y independent mod m^2"]
    assert v8.case == "caseA"
    s_, t, u, _ = R.generators()
    bad = check_bt1_hypotheses(s_, t, u, u)
    assert not bad and "(w, x) exact pair" in bad.failures


def test_build_family_small(e3):
    A, x1, x2, x3 = e3
    rep = build_family(x1, x1, x2, x3, range(1, 4))
    assert [m.length for m in rep.members] == [3, 6, 9]
    for m in rep.members:
        assert m.betti == [m.n] * 7
        assert m.indecomposable and m.totally_acyclic and not m.free_summand
    one = rep.members[0].module
    assert fpmod.is_isomorphic(one, fpmod.present_module(A, [[x1]])).isomorphic
    with pytest.raises(HypothesesFail) as info:
        build_family(x1, x2, x2, x3, range(1, 3))
    assert info.value.clauses["(w, x) exact pair"] is False


def test_family_report_serializes(e3):
    A, x1, x2, x3 = e3
    d = build_family(x1, x1, x2, x3, range(1, 3)).as_dict()
    assert d["mode"] == "bt1" and d["hypotheses"]["case"] == "caseB"
    assert [m["length"] for m in d["members"]] == [3, 6]


def test_find_z_for_y(e3):
    A, x1, x2, x3 = e3
    z = find_z_for_y(x1, x1, x2)
    assert (x2 * z).is_zero()
    assert not span_membership_mod(z, [x1], 2)
    assert fpmod.is_isomorphic(fpmod.present_module(A, [[z]]), fpmod.present_module(A, [[x3]]))
    with pytest.raises(PreconditionFailed):
        find_z_for_y(x1, x1, A.one())
    R2 = load("ring8_f2")
    s, t, u, _ = R2.generators()
    with pytest.raises(PreconditionFailed):
        find_z_for_y(s, t, u)


# ---- second family


@pytest.fixture(scope="module")
def e4_data():
    A = load("selfpair_e4_f5")
    x1 = A.generator(0)
    return (A, x1) + find_bt2_data(x1, x1)


def test_find_bt2_data(e4_data):
    A, x1, y, yp, z = e4_data
    v = check_bt2_hypotheses(3, x1, x1, y, yp, z)
    assert v.case in ("c", "d")
    assert (y * z).is_zero() and (yp * z).is_zero()


def test_find_bt2_data_preconditions_and_rationals():
    G = load_algebra("field = GF(5)\nvars = x y z\nrelations = x*y, x*z, y*z, x^2 - y^2, x^2 - z^2")
    with pytest.raises(PreconditionFailed):
        find_bt2_data(G.generator(0), G.generator(0))
    Q = load_algebra(E4_QQ)
    x1 = Q.generator(0)
    y, yp, z = find_bt2_data(x1, x1)
    assert check_bt2_hypotheses(3, x1, x1, y, yp, z)


def test_bt2_family_variants(e4_data):
    A, x1, y, yp, z = e4_data
    single = bt2_family(3, x1, x1, y, yp, z, lambdas=[2])
    assert single.iso_matrix == [[True]]
    assert single.members[0].indecomposable and single.members[0].totally_acyclic
    with pytest.raises(HypothesesFail):
        bt2_family(3, x1, x1, y, yp, z, lambdas=[A.one(), A.one() + x1])
    with pytest.raises(HypothesesFail):
        bt2_family(3, x1, x1, y, y, z, lambdas=[0, 1])


def test_bt2_n2_on_e3(e3):
    A, x1, x2, x3 = e3
    rep = bt2_family(2, x1, x1, x2, x3, None, lambdas=[0, 1, 4])
    assert rep.hypotheses.case == "b"
    assert all(rep.iso_matrix[i][j] == (i == j) for i in range(3) for j in range(3))


# ---- two-generated modules


def test_example_isomorphism_in_rank_two(ring8_pair):
    R, w, x = ring8_pair
    y = R.generator(0)
    yp = y + 2 * x  # y - x/2 over F_5
    assert (yp - y + 3 * x).is_zero()
    one, zero = R.one(), R.zero()
    # the displayed change of basis, checked as a matrix identity over R
    lhs = _matrix_product(R, _as_raw_matrix(R, [[one, one], [zero, -one]]), _as_raw_matrix(R, [[w, yp], [zero, x]]))
    rhs = _matrix_product(R, _as_raw_matrix(R, [[w, yp - 2 * y], [zero, x]]), _as_raw_matrix(R, [[one, zero], [zero, -one]]))
    assert R.F.arrays_equal(lhs, rhs)
    M = family_module(2, w, x, 0 * y + yp)
    N = family_module(2, w, x, -2 * y + yp)
    assert fpmod.is_isomorphic(M, N).isomorphic
    assert not n2_pair_distinct(w, x, yp, w, x, -2 * y + yp)


def test_n2_pair_distinct(e3):
    A, x1, x2, x3 = e3
    assert not n2_pair_distinct(x1, x1, x2, x1, x1, x2)
    # x, y, y' independent mod m^2 and w in (x) + m^2: theta = 0 and lambda = 1 differ
    assert n2_pair_distinct(x1, x1, x3, x1, x1, x2 + x3)
    with pytest.raises(HypothesesFail):
        n2_pair_distinct(x2, x2, x3, x1, x1, x2)


def test_member_partner_is_the_swapped_theta(e3):
    A, x1, x2, x3 = e3
    for n in range(1, 5):
        P = theta(ThetaSpec(n, x1, x1, x2, x3))
        Q = theta(ThetaSpec(n, x1, x1, -x2, -x3))
        assert fpmod.verify_totally_acyclic_periodic(A, P, Q)
    assert is_exact_pair(x1, x1)
