import numpy as np
import pytest
from hypothesis import given, strategies as st

from ezdkit.algebra import build_algebra, load_algebra
from ezdkit.exactfield import FieldSpec
from ezdkit.relparser import (
    DuplicateVariable, NonHomogeneousRelation, ParseError, RaggedRows, UnknownVariable,
    parse_element, parse_field, parse_matrix, parse_presentation, render,
)

from conftest import ALGEBRA_FIXTURES, load

RING8 = """field = GF(5)
vars = s t u v
relations = s^2, s*v, t^2, t*v, u^2, u*v, v^2 - s*t - s*u"""


def test_ring8_presentation():
    src = parse_presentation(RING8)
    assert src.field == FieldSpec.prime(5)
    assert src.variables == ["s", "t", "u", "v"]
    assert len(src.relations) == 7
    assert [r.degree for r in src.relations] == [2] * 7
    assert src.degree_cap == 6


def test_rational_cubic():
    src = parse_presentation("field = QQ\nvars = x\nrelations = x^3")
    assert src.field.kind == "rationals"
    assert src.variables == ["x"] and len(src.relations) == 1
    assert src.relations[0].degree == 3


def test_errors_are_positioned():
    with pytest.raises(NonHomogeneousRelation):
        parse_presentation("field = GF(5)\nvars = x y z\nrelations = x*y + z")
    with pytest.raises(UnknownVariable):
        parse_presentation("field = GF(5)\nvars = x y\nrelations = x*q")
    with pytest.raises(DuplicateVariable):
        parse_presentation("field = GF(5)\nvars = x x\nrelations = x^2")
    with pytest.raises(ParseError) as info:
        parse_presentation("field = GF(5)\nvars = x y\nrelations = x^2 +* y^2")
    assert info.value.lineno == 3 and info.value.offset >= 1


def test_comments_whitespace_and_cap():
    src = parse_presentation("# header\n  field=GF(7)   # trailing\nvars = a b\n"
                             "relations = a^2,\n   b^2\ndegree_cap = 4\n")
    assert src.degree_cap == 4 and len(src.relations) == 2


def test_parse_field_forms():
    assert parse_field("GF(101)") == FieldSpec.prime(101)
    assert parse_field("QQ").kind == "rationals"
    spec = parse_field("GF(3^2; th^2 + 1)")
    assert spec.kind == "extension" and spec.modulus == (1, 0, 1)
    with pytest.raises(ParseError):
        parse_field("GF(4)")


def test_parse_element_ring8(ring8_f5):
    A = ring8_f5
    x = parse_element("s+t+2*u-v", A)
    assert A.basis_names == ["1", "s", "t", "u", "v", "s*t", "s*u", "t*u"]
    assert [int(c) for c in x.coords] == [0, 1, 1, 2, 4, 0, 0, 0]
    assert parse_element("0", A).is_zero()
    assert parse_element("s*s", A).is_zero()
    # v^2 reduces to st + su
    assert parse_element("v^2", A) == parse_element("s*t + s*u", A)


def test_unary_minus_normalizes(ring8_f5):
    A = ring8_f5
    assert parse_element("-s", A) == parse_element("-1*s", A) == parse_element("4*s", A)
    assert parse_element("-(s - t)", A) == parse_element("t - s", A)


def test_parse_matrix(ring8_f5):
    A = ring8_f5
    Phi = parse_matrix("t, -t+u-v ; t+u-v, s+u", A)
    assert len(Phi) == 2 and all(len(r) == 2 for r in Phi)
    assert Phi[0][1] == A.parse("-t+u-v")
    assert parse_matrix("t, -t+u-v\nt+u-v, s+u", A) == Phi
    (row,) = parse_matrix("s", A)
    assert row == [A.parse("s")]
    with pytest.raises(RaggedRows):
        parse_matrix("s, ; t", A)
    with pytest.raises(RaggedRows):
        parse_matrix("s, t ; u", A)
    with pytest.raises(UnknownVariable):
        parse_matrix("q", A)


@pytest.mark.parametrize("name", ALGEBRA_FIXTURES)
@given(seed=st.integers(0, 2**32 - 1))
def test_render_round_trip(name, seed):
    A = load(name)
    x = A.random_element(np.random.default_rng(seed))
    assert parse_element(render(x), A) == x


_atoms = st.sampled_from(["x", "y", "z", "1", "2", "3"])


@st.composite
def _expressions(draw, depth=3):
    if depth == 0 or draw(st.booleans()):
        return draw(_atoms)
    op = draw(st.sampled_from(["+", "-", "*", "^", "()", "neg"]))
    a = draw(_expressions(depth=depth - 1))
    if op == "()":
        return f"({a})"
    if op == "neg":
        return f"-{a}"
    if op == "^":
        return f"({a})^{draw(st.integers(0, 3))}"
    b = draw(_expressions(depth=depth - 1))
    return f"{a} {op} {b}"


@given(expr=_expressions())
def test_fuzz_well_formed_never_crashes(expr):
    A = load("m4_f3")
    y = parse_element(expr, A)
    assert parse_element(render(y), A) == y


@given(junk=st.text(alphabet="xyz+-*^(),;=12 \n", min_size=1, max_size=12))
def test_fuzz_malformed_is_positioned(junk):
    A = load("m4_f3")
    try:
        parse_element(junk, A)
    except ParseError as exc:
        assert exc.lineno >= 1 and exc.offset >= 1


def test_fixture_relations_all_parse():
    for name in ALGEBRA_FIXTURES:
        A = load(name)
        assert A.source.relation_text
        # rebuilding from the stored source gives the same algebra
        assert build_algebra(A.source).hilbert == A.hilbert
    assert load_algebra(RING8).hilbert == [1, 4, 3]
