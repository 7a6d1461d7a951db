"""Finite-dimensional standard graded algebras k[x_1..x_e]/I.

The degree-d piece of a homogeneous ideal is spanned by the degree-d
relations together with S_1 * I_{d-1}, so each graded component is found by
one echelon reduction inside the monomial basis of S_d.  Monomials are listed
in descending lex order; the echelon runs on reversed columns so pivots land
on the latest-listed monomials and the surviving (standard) monomials are the
earliest ones.  For the ring with relations s^2, sv, t^2, tv, u^2, uv,
v^2 - st - su this yields the degree-2 basis st, su, tu.

Elements are coordinate vectors over the concatenated graded basis.
Multiplication uses a structure tensor ``T[i, j]`` = coordinates of
``b_i * b_j``; ``ops[i]`` is the matrix of multiplication by ``b_i``.
"""

from __future__ import annotations

import itertools

import numpy as np

from . import exactfield as ef
from .exactfield import make_field, ScalarMatrix


class AlgebraMismatch(TypeError):
    pass


class NotArtinianWithinCap(ValueError):
    pass


class AssocCheckFailed(AssertionError):
    pass


def monomials(n_vars, degree):
    """Exponent tuples of the given degree in descending lex order."""
    if n_vars == 0:
        return [()] if degree == 0 else []
    out = []
    for first in range(degree, -1, -1):
        for rest in monomials(n_vars - 1, degree - first):
            out.append((first,) + rest)
    return out


def monomial_name(exps, names):
    parts = []
    for v, k in zip(names, exps):
        if k == 1:
            parts.append(v)
        elif k > 1:
            parts.append(f"{v}^{k}")
    return "*".join(parts) if parts else "1"


class GradedAlgebra:
    """A built algebra; immutable once constructed."""

    def __init__(self, src, F, variables, degree_bases, T, check=True):
        self.source = src
        self.F = F
        self.spec = F.spec
        self.variables = list(variables)
        self.e = len(variables)
        self.degree_bases = degree_bases
        self.hilbert = [len(b) for b in degree_bases]
        self.top_degree = len(degree_bases) - 1
        self.dim = sum(self.hilbert)
        offs = np.cumsum([0] + self.hilbert)
        self.degree_slices = [slice(int(offs[d]), int(offs[d + 1])) for d in range(len(degree_bases))]
        self.basis = [m for b in degree_bases for m in b]
        self.basis_degree = [sum(m) for m in self.basis]
        self.basis_names = [monomial_name(m, variables) for m in self.basis]
        self.T = T
        T.setflags(write=False)
        # ops[i][k, j] = coefficient of b_k in b_i * b_j
        self.ops = np.ascontiguousarray(np.transpose(T, (0, 2, 1)))
        self.ops.setflags(write=False)
        if check:
            self._check_laws()

    def __repr__(self):
        return f"GradedAlgebra({self.spec}, vars={' '.join(self.variables)}, hilbert={self.hilbert})"

    # construction-time consistency
    def _check_laws(self):
        F = self.F
        T = self.T
        if not F.arrays_equal(T, np.transpose(T, (1, 0, 2))):
            raise AssocCheckFailed("multiplication table is not commutative")
        N = self.dim
        Tf = T.reshape(N * N, N)
        for k in range(N):
            # (b_i b_j) b_k versus b_i (b_j b_k)
            left = F.matmul(Tf, T[:, k, :])  # rows (i, j)
            bk = T[:, k, :]  # row j: b_j b_k
            right = np.stack([F.matmul(bk, T[i]) for i in range(N)])
            if not F.arrays_equal(left, right.reshape(N * N, N)):
                raise AssocCheckFailed(f"associativity fails against basis element {k}")

    # element constructors
    def element(self, coords):
        return AlgebraElement(self, self.F.array(coords) if not isinstance(coords, np.ndarray) else coords)

    def zero(self):
        return AlgebraElement(self, self.F.zeros(self.dim))

    def one(self):
        return self.scalar(self.F.one)

    def scalar(self, c):
        v = self.F.zeros(self.dim)
        v[0] = c
        return AlgebraElement(self, v)

    def basis_element(self, i):
        v = self.F.zeros(self.dim)
        v[i] = self.F.one
        return AlgebraElement(self, v)

    def generator(self, i):
        return self.basis_element(1 + i)

    def generators(self):
        return [self.generator(i) for i in range(self.e)]

    def linear_form(self, coeffs):
        v = self.F.zeros(self.dim)
        for i, c in enumerate(coeffs):
            v[1 + i] = self.F.coerce(c)
        return AlgebraElement(self, v)

    def parse(self, text):
        from .relparser import parse_element

        return parse_element(text, self)

    def operator_of(self, coords):
        """Raw matrix of multiplication by the element with ``coords``."""
        F = self.F
        return F.reduce(np.tensordot(np.asarray(coords), self.ops, axes=1)) if F.fast else _obj_tensordot(F, coords, self.ops)

    def random_element(self, rng, degree=None):
        v = self.F.random_array(rng, (self.dim,))
        if degree is not None:
            mask = self.F.zeros(self.dim)
            out = self.F.zeros(self.dim)
            sl = self.degree_slices[degree]
            out[sl] = v[sl]
            v = out
            del mask
        return AlgebraElement(self, v)

    def linear_forms(self):
        """All of R_1 over a finite field (generator, lexicographic)."""
        elems = list(self.F.elements())
        for cs in itertools.product(elems, repeat=self.e):
            yield self.linear_form(cs)

    # ideals
    def ideal(self, rows):
        return IdealView(self, rows)

    def maximal_ideal(self):
        return maximal_ideal_power(self, 1)


def _obj_tensordot(F, coords, ops):
    N = ops.shape[1]
    out = F.zeros((N, N))
    for i, c in enumerate(coords):
        if not F.is_zero(c):
            out = F.reduce(out + ops[i] * c)
    return out


class AlgebraElement:
    __slots__ = ("algebra", "coords", "_op")

    def __init__(self, algebra, coords):
        self.algebra = algebra
        coords = np.asarray(coords, dtype=algebra.F.dtype)
        if coords.shape != (algebra.dim,):
            raise ValueError(f"expected {algebra.dim} coordinates")
        coords.setflags(write=False)
        self.coords = coords
        self._op = None

    def _same(self, other):
        if isinstance(other, AlgebraElement):
            if other.algebra is not self.algebra:
                raise AlgebraMismatch("elements of different algebras")
            return other
        if isinstance(other, (int, np.integer)) or isinstance(other, ef.FieldElement):
            return self.algebra.scalar(self.algebra.F.coerce(other))
        return None

    @property
    def F(self):
        return self.algebra.F

    def operator(self):
        """Raw matrix L with L @ y.coords = (self * y).coords."""
        if self._op is None:
            op = self.algebra.operator_of(self.coords)
            op.setflags(write=False)
            self._op = op
        return self._op

    def __add__(self, o):
        o = self._same(o)
        if o is None:
            return NotImplemented
        return AlgebraElement(self.algebra, self.F.reduce(self.coords + o.coords))

    __radd__ = __add__

    def __neg__(self):
        return AlgebraElement(self.algebra, self.F.reduce(-self.coords))

    def __sub__(self, o):
        o = self._same(o)
        if o is None:
            return NotImplemented
        return AlgebraElement(self.algebra, self.F.reduce(self.coords - o.coords))

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        o = self._same(o)
        if o is None:
            return NotImplemented
        return multiply(self, o)

    __rmul__ = __mul__

    def __pow__(self, k):
        out = self.algebra.one()
        for _ in range(int(k)):
            out = out * self
        return out

    def scale(self, c):
        return AlgebraElement(self.algebra, self.F.scale(self.F.coerce(c) if not isinstance(c, (ef.ExtElement,)) else c, self.coords))

    def __eq__(self, o):
        if not isinstance(o, AlgebraElement):
            o = self._same(o) if isinstance(o, (int, np.integer)) else None
            if o is None:
                return NotImplemented
        return o.algebra is self.algebra and self.F.arrays_equal(self.coords, o.coords)

    def __hash__(self):
        return hash(tuple(hash(c) for c in self.coords))

    def is_zero(self):
        return self.F.all_zero(self.coords)

    def __bool__(self):
        return not self.is_zero()

    def scalar_part(self):
        """The constant if self is a scalar multiple of 1, else None."""
        rest = self.coords[1:]
        return self.coords[0] if self.F.all_zero(rest) else None

    def in_maximal_ideal(self):
        return self.F.is_zero(self.coords[0])

    def is_unit(self):
        return not self.in_maximal_ideal()

    def component(self, d):
        A = self.algebra
        out = A.F.zeros(A.dim)
        sl = A.degree_slices[d]
        out[sl] = self.coords[sl]
        return AlgebraElement(A, out)

    def linear_part(self):
        return self.coords[self.algebra.degree_slices[1]]

    def is_homogeneous(self):
        A = self.algebra
        nz = [d for d in range(A.top_degree + 1) if not A.F.all_zero(self.coords[A.degree_slices[d]])]
        return len(nz) <= 1

    def order(self):
        """Lowest degree carrying a nonzero coordinate (None for 0)."""
        A = self.algebra
        for d in range(A.top_degree + 1):
            if not A.F.all_zero(self.coords[A.degree_slices[d]]):
                return d
        return None

    def inverse(self):
        if not self.is_unit():
            raise ZeroDivisionError("element lies in the maximal ideal")
        A = self.algebra
        x = ef.solve_array(A.F, self.operator(), A.one().coords)
        return AlgebraElement(A, x)

    def __repr__(self):
        from .relparser import render

        return render(self)

    __str__ = __repr__


def multiply(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    if a.algebra is not b.algebra:
        raise AlgebraMismatch("elements of different algebras")
    return AlgebraElement(a.algebra, a.F.matmul(a.operator(), b.coords))


def multiplication_operator(x: AlgebraElement) -> ScalarMatrix:
    return ScalarMatrix(x.F, x.operator())


class IdealView:
    """A k-subspace of R closed under multiplication by the generators."""

    def __init__(self, algebra, rows, verify=True):
        self.algebra = algebra
        F = algebra.F
        rows = np.asarray(rows, dtype=F.dtype).reshape(-1, algebra.dim)
        R, piv = ef.rref(F, rows) if len(rows) else (F.zeros((0, algebra.dim)), [])
        self.rows = R[: len(piv)]
        self.rows.setflags(write=False)
        self.pivots = list(piv)
        if verify:
            self._verify()

    def _verify(self):
        A = self.algebra
        for i in range(1, A.e + 1):
            image = A.F.matmul(self.rows, A.ops[i].T)  # rows of b_i * basis
            for v in image:
                if not self.contains_coords(v):
                    raise AssocCheckFailed("ideal basis not closed under multiplication")

    @property
    def dim(self):
        return len(self.pivots)

    length = dim

    def __len__(self):
        return self.dim

    @property
    def basis(self):
        return [AlgebraElement(self.algebra, r) for r in self.rows]

    def contains_coords(self, v) -> bool:
        return ef.in_span(self.algebra.F, self.rows, self.pivots, v)

    def __contains__(self, x: AlgebraElement):
        return self.contains_coords(x.coords)

    def __le__(self, other: "IdealView"):
        return all(other.contains_coords(r) for r in self.rows)

    def __eq__(self, other):
        return isinstance(other, IdealView) and self.dim == other.dim and self <= other

    def __add__(self, other):
        return IdealView(self.algebra, np.concatenate([self.rows, other.rows]), verify=False)

    def intersect(self, other):
        F = self.algebra.F
        if self.dim == 0 or other.dim == 0:
            return IdealView(self.algebra, F.zeros((0, self.algebra.dim)), verify=False)
        # a @ rows1 = b @ rows2
        stacked = np.concatenate([self.rows, F.reduce(-other.rows)]).T
        ker = ef.nullspace_rows(F, stacked)
        coeff = ker[:, : self.dim]
        return IdealView(self.algebra, F.matmul(coeff, self.rows), verify=False)

    def times(self, other):
        """Product ideal."""
        A = self.algebra
        out = []
        for r in self.rows:
            op = A.operator_of(r)
            out.append(A.F.matmul(other.rows, op.T))
        rows = np.concatenate(out) if out else A.F.zeros((0, A.dim))
        return IdealView(A, rows, verify=False)

    def __repr__(self):
        return f"IdealView(dim={self.dim})"


def annihilator(x: AlgebraElement) -> IdealView:
    return IdealView(x.algebra, ef.nullspace_rows(x.F, x.operator()))


def principal_ideal(x: AlgebraElement) -> IdealView:
    return IdealView(x.algebra, x.operator().T)


def ideal_generated(algebra, gens) -> IdealView:
    rows = [g.operator().T for g in gens]
    if not rows:
        return IdealView(algebra, algebra.F.zeros((0, algebra.dim)), verify=False)
    return IdealView(algebra, np.concatenate(rows))


def maximal_ideal_power(A: GradedAlgebra, d: int) -> IdealView:
    start = A.degree_slices[d].start if d <= A.top_degree else A.dim
    rows = A.F.eye(A.dim)[start:]
    return IdealView(A, rows, verify=False)


def socle(A: GradedAlgebra) -> IdealView:
    stack = np.concatenate([A.ops[1 + i] for i in range(A.e)])
    return IdealView(A, ef.nullspace_rows(A.F, stack))


def is_gorenstein(A: GradedAlgebra) -> bool:
    return socle(A).dim == 1


def is_short(A: GradedAlgebra) -> bool:
    return A.top_degree <= 2


def span_membership_mod(x: AlgebraElement, generators, modulo_power: int) -> bool:
    """Is x in (generators) + m^modulo_power?"""
    A = x.algebra
    I = ideal_generated(A, generators) + maximal_ideal_power(A, modulo_power)
    return x in I


def lin_indep_mod_m2(elements) -> bool:
    if not elements:
        return True
    A = elements[0].algebra
    rows = np.stack([x.linear_part() for x in elements])
    return ef.rank(A.F, rows) == len(elements)


def rank_mod_m2(elements) -> int:
    if not elements:
        return 0
    A = elements[0].algebra
    return ef.rank(A.F, np.stack([x.linear_part() for x in elements]))


def build_algebra(src, check=True) -> GradedAlgebra:
    """Compute graded components, normal forms and the multiplication table."""
    F = make_field(src.field)
    n = len(src.variables)
    cap = src.degree_cap
    rels_by_deg: dict = {}
    for rel in src.relations:
        rels_by_deg.setdefault(rel.degree, []).append(rel)

    degree_bases = [[(0,) * n]]
    normal_forms = [{(0,) * n: None}]  # per degree: monomial -> raw coordinate row or None
    prev_ideal = F.zeros((0, 1))
    prev_monos = [(0,) * n]
    d = 1
    while True:
        monos = monomials(n, d)
        index = {m: i for i, m in enumerate(monos)}
        rows = []
        for rel in rels_by_deg.get(d, []):
            r = F.zeros(len(monos))
            for c, e in rel.terms:
                r[index[e]] = c
            rows.append(r)
        if prev_ideal.shape[0] and d > 1:
            for row in prev_ideal:
                nz = [(prev_monos[j], row[j]) for j in range(len(prev_monos)) if not F.is_zero(row[j])]
                for v in range(n):
                    r = F.zeros(len(monos))
                    for m, c in nz:
                        m2 = list(m)
                        m2[v] += 1
                        r[index[tuple(m2)]] = c
                    rows.append(r)
        if rows:
            M = np.stack(rows)
            R, piv = ef.rref(F, M[:, ::-1])
            R = R[: len(piv)][:, ::-1]
            piv = [len(monos) - 1 - c for c in piv]
        else:
            R, piv = F.zeros((0, len(monos))), []
        pivset = set(piv)
        standard = [m for i, m in enumerate(monos) if i not in pivset]
        if not standard:
            break
        if d > cap:
            raise NotArtinianWithinCap(f"component of degree {d} is nonzero; degree_cap is {cap}")
        std_pos = {m: k for k, m in enumerate(standard)}
        nf = {}
        for m in standard:
            nf[m] = None
        for row, pc in zip(R, piv):
            # monos[pc] = -(sum of other, all standard, entries)
            vec = F.zeros(len(standard))
            for j in range(len(monos)):
                if j != pc and not F.is_zero(row[j]):
                    vec[std_pos[monos[j]]] = F.neg(row[j])
            nf[monos[pc]] = vec
        degree_bases.append(standard)
        normal_forms.append(nf)
        prev_ideal = R
        prev_monos = monos
        d += 1

    top = len(degree_bases) - 1
    hilbert = [len(b) for b in degree_bases]
    offsets = np.cumsum([0] + hilbert)
    N = int(offsets[-1])
    basis = [m for b in degree_bases for m in b]
    pos = {m: i for i, m in enumerate(basis)}
    T = F.zeros((N, N, N))
    for i, mi in enumerate(basis):
        for j in range(i, N):
            mj = basis[j]
            prod = tuple(a + b for a, b in zip(mi, mj))
            dd = sum(prod)
            if dd > top:
                continue
            if prod in pos:
                T[i, j, pos[prod]] = F.one
            else:
                vec = normal_forms[dd][prod]
                T[i, j, int(offsets[dd]):int(offsets[dd + 1])] = vec
            if i != j:
                T[j, i] = T[i, j]
    return GradedAlgebra(src, F, src.variables, degree_bases, T, check=check)


def load_algebra(text: str) -> GradedAlgebra:
    from .relparser import parse_presentation

    return build_algebra(parse_presentation(text))
