"""Invariants run on every bundled algebra."""

import numpy as np
import pytest

from ezdkit import ezd, fpmod
from ezdkit.algebra import annihilator, principal_ideal
from ezdkit.families import ThetaSpec, theta

from conftest import ALGEBRA_FIXTURES, load

# one exact pair per algebra that has any; the rest have none (checked below)
PAIRS = {
    "ci2_f2": "y",
    "ci2_f3": "y",
    "selfpair_e3_f5": "x1",
    "selfpair_e4_f5": "x1",
    "m4_f3": "x",
    "ring8_f5": "s+t+2*u-v",
    "ring8_f7": "s+t+2*u-v",
    "ring8_gf9": "(1-th)*s+th*t+u+v",
}
NO_PAIRS = {"ring8_f2", "ring8_f3", "xy_cube_f5"}
NAMES = [n.removesuffix(".alg") for n in ALGEBRA_FIXTURES]
ORACLE_LIMIT = 10 ** 6


def test_fixture_tables_cover_everything():
    assert set(PAIRS) | NO_PAIRS == set(NAMES)
    assert not set(PAIRS) & NO_PAIRS


def _rng(name, salt):
    return np.random.default_rng([sum(map(ord, name)), salt])


def _nonunit(A, rng):
    while True:
        x = A.random_element(rng)
        if x.in_maximal_ideal() and not x.is_zero():
            return x


def _pair(A, name):
    x = A.parse(PAIRS[name])
    return ezd.is_exact_zero_divisor(x).partner, x


@pytest.mark.parametrize("name", NAMES)
def test_length_additivity(name):
    A = load(name)
    rng = _rng(name, 1)
    for _ in range(500):
        x = A.random_element(rng)
        assert principal_ideal(x).dim + annihilator(x).dim == A.dim


@pytest.mark.parametrize("name", NAMES)
def test_pair_symmetry(name):
    A = load(name)
    rng = _rng(name, 2)
    samples = [(_nonunit(A, rng), _nonunit(A, rng)) for _ in range(40)]
    if name in PAIRS:
        w, x = _pair(A, name)
        samples.append((w, x))
        assert ezd.is_exact_pair(w, x)
    for a, b in samples:
        assert ezd.is_exact_pair(a, b) == ezd.is_exact_pair(b, a)


@pytest.mark.parametrize("name", NAMES)
def test_unit_scaling(name):
    A = load(name)
    rng = _rng(name, 3)
    xs = [_nonunit(A, rng) for _ in range(25)]
    if name in PAIRS:
        xs.append(A.parse(PAIRS[name]))
    for x in xs:
        verdict = bool(ezd.is_exact_zero_divisor(x))
        for _ in range(3):
            u = A.random_element(rng)
            if not u.is_unit():
                u = u + A.one()
            if u.is_unit():
                assert bool(ezd.is_exact_zero_divisor(u * x)) == verdict


@pytest.mark.parametrize("name", sorted(NO_PAIRS))
def test_algebras_without_pairs(name):
    rep = ezd.scan_ezd(load(name), mode="all_of_m")
    assert rep.ezd_count == 0


def _family_data(A, name, rng):
    """An exact pair and y, z in m with yz = 0."""
    w, x = _pair(A, name)
    y = _nonunit(A, rng)
    basis = [b for b in annihilator(y).basis if b.in_maximal_ideal()]
    coeffs = A.F.random_array(rng, (len(basis),))
    z = sum((A.scalar(c) * b for c, b in zip(coeffs, basis)), A.zero())
    return w, x, y, z


@pytest.mark.parametrize("name", sorted(PAIRS))
def test_syzygy_identity(name):
    A = load(name)
    rng = _rng(name, 4)
    w, x, y, z = _family_data(A, name, rng)
    assert (y * z).is_zero()
    for n in range(1, 5):
        M = fpmod.present_module(A, theta(ThetaSpec(n, w, x, y, z)))
        N = fpmod.present_module(A, theta(ThetaSpec(n, x, w, -y, -z)))
        assert fpmod.is_isomorphic(fpmod.syzygy(M)[0], N).isomorphic, n


def _transpose(P):
    return [list(r) for r in zip(*P)]


@pytest.mark.parametrize("name", NAMES)
def test_duality_involution(name):
    A = load(name)
    rng = _rng(name, 5)
    cases = []
    if name in PAIRS:
        w, x, y, z = _family_data(A, name, rng)
        for n in (1, 2, 3):
            cases.append((theta(ThetaSpec(n, w, x, y, z)), theta(ThetaSpec(n, x, w, -y, -z))))
    for _ in range(6):
        a, b = _nonunit(A, rng), _nonunit(A, rng)
        cases.append(([[a]], [[b]]))
    passed = 0
    for Phi, Psi in cases:
        there = bool(fpmod.verify_totally_acyclic_periodic(A, Phi, Psi))
        back = bool(fpmod.verify_totally_acyclic_periodic(A, _transpose(Psi), _transpose(Phi)))
        assert there == back
        passed += there
    if name in PAIRS:
        assert passed >= 3


def _oracle_modules(A, name, rng):
    mods = [fpmod.residue_field(A), fpmod.syzygy(fpmod.residue_field(A))[0]]
    mods += [fpmod.present_module(A, [[_nonunit(A, rng)]]) for _ in range(3)]
    k = fpmod.residue_field(A)
    mods.append(fpmod.direct_sum(k, k))
    if name in PAIRS:
        w, x, y, z = _family_data(A, name, rng)
        mods.append(fpmod.present_module(A, theta(ThetaSpec(2, w, x, y, z))))
        mods.append(fpmod.direct_sum(fpmod.present_module(A, [[w]]), fpmod.present_module(A, [[x]])))
    return mods


@pytest.mark.parametrize("name", NAMES)
def test_indecomposability_matches_idempotents(name):
    A = load(name)
    q = A.F.order
    checked = 0
    for M in _oracle_modules(A, name, _rng(name, 6)):
        dim_end = fpmod.hom_space(M, M).dim
        if q ** dim_end > ORACLE_LIMIT:
            continue
        idem = fpmod.idempotents_bruteforce(M, ORACLE_LIMIT)
        # local endomorphism ring: the only idempotents are 0 and 1
        assert bool(fpmod.is_indecomposable(M)) == (len(idem) == 2)
        checked += 1
    assert checked >= 2
