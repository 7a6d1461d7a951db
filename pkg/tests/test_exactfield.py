import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ezdkit import exactfield as ef
from ezdkit.exactfield import (
    GF, QQ, FieldSpec, ScalarMatrix, make_field, nullspace, row_echelon, solve,
)

F5 = GF(5)
F9 = GF(3, (1, 0, 1), "th")
FIELDS = [GF(2), GF(3), F5, GF(101), F9, GF(2, (1, 1, 0, 0, 1)), QQ]


def E(field, v):
    return ef.FieldElement(field, field.coerce(v))


# ---- construction and arithmetic


def test_prime_product():
    assert E(F5, 3) * E(F5, 2) == 1


def test_extension_square_of_generator():
    th = ef.FieldElement(F9, F9.from_code(3))  # coefficient vector (0, 1)
    assert th * th == E(F9, -1)
    assert th * th == E(F9, 2)


def test_rational_inverse():
    assert E(QQ, Fraction(2, 3)).inverse() == Fraction(3, 2)


def test_bad_specs():
    with pytest.raises(ef.NonPrimeModulus):
        make_field(FieldSpec.prime(4))
    with pytest.raises(ef.ReducibleModulus):
        GF(3, (2, 0, 1))  # a^2 + 2 = (a - 1)(a + 1) over F_3
    with pytest.raises(ef.ReducibleModulus):
        GF(2, (1, 0, 1, 0, 1))  # (a^2 + a + 1)^2 over F_2, no roots


def test_mixed_fields_rejected():
    with pytest.raises(ef.MixedFields):
        E(F5, 1) + E(GF(7), 1)
    with pytest.raises(ef.MixedFields):
        ScalarMatrix.from_rows([[E(F5, 1), E(GF(7), 1)]])


@pytest.mark.parametrize("field", [GF(2), GF(7), F9, GF(2, (1, 1, 0, 0, 1))], ids=str)
def test_enumeration_is_complete(field):
    elems = list(field.elements())
    assert len(elems) == field.order
    assert len({field.format(v) for v in elems}) == field.order


@pytest.mark.parametrize("field", FIELDS, ids=str)
@given(seed=st.integers(0, 2**32 - 1))
def test_field_axioms(field, seed):
    rng = np.random.default_rng(seed)
    a, b, c = (E(field, field.random(rng)) for _ in range(3))
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + b == b + a and a * b == b * a
    if a:
        assert a * a.inverse() == 1


# ---- echelon, nullspace, solve


def test_echelon_examples():
    assert row_echelon(ScalarMatrix.identity(F5, 3))[1] == 3
    assert row_echelon(ScalarMatrix.zeros(F5, 2, 4))[1] == 0
    R, r, piv = row_echelon(ScalarMatrix.from_rows([[1, 2], [2, 4]], F5))
    assert r == 1 and piv == [0]
    assert R == ScalarMatrix.from_rows([[1, 2], [0, 0]], F5)


def test_nullspace_examples():
    assert nullspace(ScalarMatrix.identity(F5, 4)) == []
    assert len(nullspace(ScalarMatrix.zeros(F5, 2, 3))) == 3
    F2 = GF(2)
    (v,) = nullspace(ScalarMatrix.from_rows([[1, 1]], F2))
    # exhaustive: the only nonzero solution among the four vectors of F_2^2
    sols = [w for w in itertools.product(range(2), repeat=2) if (w[0] + w[1]) % 2 == 0 and any(w)]
    assert sols == [tuple(int(x.value) for x in v)]


def test_solve_examples():
    I = ScalarMatrix.identity(F5, 3)
    assert [x.value for x in solve(I, [1, 2, 3])] == [1, 2, 3]
    with pytest.raises(ef.NoSolution):
        solve(ScalarMatrix.zeros(F5, 2, 2), [1, 0])
    (x,) = solve(ScalarMatrix.from_rows([[2]], F5), [3])
    assert x == 4


def _random_matrix(field, rng):
    r, c = rng.integers(0, 6, size=2)
    M = field.random_array(rng, (r, c))
    # force some rank deficiency now and then
    if r > 1 and rng.random() < 0.5:
        M[-1] = field.reduce(M[0] * field.random(rng))
    return M


@pytest.mark.parametrize("field", FIELDS, ids=str)
@given(seed=st.integers(0, 2**32 - 1))
def test_rank_nullity_and_kernel(field, seed):
    rng = np.random.default_rng(seed)
    M = _random_matrix(field, rng)
    N = ef.nullspace_rows(field, M)
    assert ef.rank(field, M) + len(N) == M.shape[1]
    if len(N) and M.shape[0]:
        assert field.all_zero(field.matmul(M, N.T))
    assert ef.rank(field, N) == len(N)


@pytest.mark.parametrize("field", FIELDS, ids=str)
@given(seed=st.integers(0, 2**32 - 1))
def test_rref_idempotent(field, seed):
    rng = np.random.default_rng(seed)
    M = ScalarMatrix(field, _random_matrix(field, rng))
    R, r, piv = row_echelon(M)
    R2, r2, piv2 = row_echelon(R)
    assert R2 == R and r2 == r and piv2 == piv


@pytest.mark.parametrize("field", FIELDS, ids=str)
@given(seed=st.integers(0, 2**32 - 1))
def test_solve_satisfies_system(field, seed):
    rng = np.random.default_rng(seed)
    M = _random_matrix(field, rng)
    if M.shape[1] == 0:
        return
    x0 = field.random_array(rng, (M.shape[1],))
    b = field.matmul(M, x0) if M.shape[0] else field.zeros(0)
    x = ef.solve_array(field, M, b)
    assert x is not None
    if M.shape[0]:
        assert field.arrays_equal(field.matmul(M, x), b)


def test_rank_against_bruteforce_span():
    # oracle: the number of distinct row combinations over F_3 is 3^rank
    F3 = GF(3)
    rng = np.random.default_rng(11)
    for _ in range(20):
        M = F3.random_array(rng, (3, 4))
        M[2] = (M[0] + 2 * M[1]) % 3 if rng.random() < 0.5 else M[2]
        span = {tuple(np.dot(c, M) % 3) for c in itertools.product(range(3), repeat=3)}
        assert len(span) == 3 ** ef.rank(F3, M)


def test_det_and_inverse():
    M = F5.array([[1, 2], [3, 4]])
    assert ef.det(F5, M) == (4 - 6) % 5
    Minv = ef.inverse_array(F5, M)
    assert F5.arrays_equal(F5.matmul(M, Minv), F5.eye(2))
    with pytest.raises(ZeroDivisionError):
        ef.inverse_array(F5, F5.array([[1, 2], [2, 4]]))
