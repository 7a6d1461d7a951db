"""Finitely presented modules over a graded algebra.

A module is stored as a minimal presentation ``pres`` (raw array of shape
(b0, b1, N): entry [g, j] is the coordinate vector of the algebra element in
row g, column j) together with a realization of the cokernel as a k-space:

* the free module R^b0 has coordinates indexed g*N + k (generator g, algebra
  basis element k);
* ``Q`` projects those coordinates onto the quotient basis and ``E`` embeds
  the quotient basis back (Q @ E = I);
* ``actions[i]`` is the matrix of multiplication by the i-th variable.

Homomorphisms M -> N are found from the presentation: the images n_g of the
generators must satisfy sum_g P[g, j] * n_g = 0 for every column j.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import exactfield as ef
from . import _kernels
from .algebra import AlgebraElement, AlgebraMismatch

DEFAULT_ISO_BUDGET = 10 ** 6
DEFAULT_RANDOM_TRIALS = 256


class EntriesNotInAlgebra(TypeError):
    pass


class UndecidedAtBudget(RuntimeError):
    """A search ran out of budget without reaching a verdict."""


# --------------------------------------------------------------------------
# small helpers on raw arrays


def _mul(A, a, b):
    return A.F.matmul(A.operator_of(a), b)


def _is_unit(A, a):
    return not A.F.is_zero(a[0])


def _inverse(A, a):
    x = ef.solve_array(A.F, A.operator_of(a), A.one().coords)
    return x


def _block_operator(A, cols):
    """k-matrix (b0*N x b1*N) of the R-linear map R^b1 -> R^b0 given by ``cols``."""
    b0, b1, N = cols.shape
    F = A.F
    out = F.zeros((b0 * N, b1 * N))
    for g in range(b0):
        for j in range(b1):
            a = cols[g, j]
            if not F.all_zero(a):
                out[g * N:(g + 1) * N, j * N:(j + 1) * N] = A.operator_of(a)
    return out


def _vec_to_column(A, v, b):
    """Ambient vector (b*N) -> column of b algebra coordinate vectors."""
    return np.asarray(v).reshape(b, A.dim)


def _m_times(A, rows, b):
    """Rows spanning m * (span of rows) inside R^b (rows are ambient vectors)."""
    F = A.F
    if len(rows) == 0:
        return rows
    out = []
    N = A.dim
    for i in range(1, A.e + 1):
        op = A.ops[i]
        blocks = rows.reshape(len(rows), b, N)
        out.append(F.reduce(np.einsum("rgk,lk->rgl", blocks, op) if F.fast else _obj_einsum(F, blocks, op)).reshape(len(rows), b * N))
    return np.concatenate(out)


def _obj_einsum(F, blocks, op):
    r, b, N = blocks.shape
    flat = blocks.reshape(r * b, N)
    return F.matmul(flat, op.T).reshape(r, b, N)


def kernel_generators(A, D, b_src):
    """Minimal generators of ker(D) inside R^b_src, as an array (b_src, c, N).

    ``D`` is the k-matrix of an R-linear map out of R^b_src.  A k-basis of the
    kernel is reduced modulo m * kernel; the echelon rows surviving that
    reduction, in order, are the generators.
    """
    F = A.F
    N = A.dim
    ker = ef.nullspace_rows(F, D) if D.shape[0] else F.eye(b_src * N)
    if len(ker) == 0:
        return F.zeros((b_src, 0, N))
    ker, _ = ef.row_basis(F, ker)
    return _minimal_generators(A, ker, b_src)


def _minimal_generators(A, rows, b):
    """Select rows whose classes form a basis of S / mS, S = R-span of rows."""
    F = A.F
    N = A.dim
    # S as a k-space: rows closed under multiplication
    S_rows, _ = ef.row_basis(F, np.concatenate([rows, _closure(A, rows, b)]))
    mS = _m_times(A, S_rows, b)
    if len(mS):
        basis, piv = ef.row_basis(F, mS)
        red = F.reduce(rows - F.matmul(rows[:, list(piv)], basis)) if piv else rows
    else:
        red = rows
    # first-come rows independent modulo mS
    keep = ef.rref(F, red.T)[1] if red.shape[0] else []
    if not keep:
        return F.zeros((b, 0, N))
    return np.stack([_vec_to_column(A, rows[i], b) for i in keep], axis=1)


def _closure(A, rows, b):
    """Rows spanning the R-submodule generated by ``rows``."""
    F = A.F
    cur, piv = ef.row_basis(F, rows)
    while True:
        more = _m_times(A, cur, b)
        nxt, npiv = ef.row_basis(F, np.concatenate([cur, more])) if len(more) else (cur, piv)
        if len(npiv) == len(piv):
            return cur
        cur, piv = nxt, npiv


# --------------------------------------------------------------------------
# presentations


def _as_raw_matrix(A, matrix, b0=None):
    """Accept nested lists (AlgebraElement, str, int) or a raw (b0, b1, N) array."""
    F = A.F
    N = A.dim
    if isinstance(matrix, np.ndarray) and matrix.ndim == 3:
        if matrix.shape[2] != N:
            raise EntriesNotInAlgebra("coordinate length does not match the algebra")
        return np.asarray(matrix, dtype=F.dtype)
    rows = list(matrix)
    if not rows or (len(rows) and all(len(r) == 0 for r in rows)):
        rows_n = b0 if b0 is not None else len(rows)
        return F.zeros((rows_n, 0, N))
    b1 = len(rows[0])
    out = F.zeros((len(rows), b1, N))
    for g, row in enumerate(rows):
        if len(row) != b1:
            raise ValueError("ragged presentation matrix")
        for j, ent in enumerate(row):
            if isinstance(ent, AlgebraElement):
                if ent.algebra is not A:
                    raise EntriesNotInAlgebra("entry belongs to a different algebra")
                out[g, j] = ent.coords
            elif isinstance(ent, str):
                out[g, j] = A.parse(ent).coords
            elif isinstance(ent, (int, np.integer, ef.FieldElement)):
                out[g, j] = A.scalar(F.coerce(ent)).coords
            else:
                raise EntriesNotInAlgebra(f"cannot interpret entry {ent!r}")
    return out


def minimize_presentation(A, matrix, b0=None):
    """Split off unit entries and drop redundant columns; raw (b0', b1', N)."""
    F = A.F
    P = np.array(_as_raw_matrix(A, matrix, b0), copy=True)
    while True:
        b0_, b1_ = P.shape[0], P.shape[1]
        spot = None
        for g in range(b0_):
            for j in range(b1_):
                if _is_unit(A, P[g, j]):
                    spot = (g, j)
                    break
            if spot:
                break
        if spot is None:
            break
        g, j = spot
        uinv = _inverse(A, P[g, j])
        for g2 in range(b0_):
            if g2 != g and not F.all_zero(P[g2, j]):
                c = _mul(A, P[g2, j], uinv)
                cop = A.operator_of(c)
                P[g2] = F.reduce(P[g2] - F.matmul(P[g], cop.T))
        for j2 in range(b1_):
            if j2 != j and not F.all_zero(P[g, j2]):
                c = _mul(A, uinv, P[g, j2])
                cop = A.operator_of(c)
                P[:, j2] = F.reduce(P[:, j2] - F.matmul(P[:, j], cop.T))
        P = np.delete(np.delete(P, g, axis=0), j, axis=1)
    b0_, b1_ = P.shape[0], P.shape[1]
    if b1_ == 0 or b0_ == 0:
        return F.zeros((b0_, 0, A.dim))
    cols = np.stack([P[:, j].reshape(-1) for j in range(b1_)])
    nonzero = [r for r in cols if not F.all_zero(r)]
    if not nonzero:
        return F.zeros((b0_, 0, A.dim))
    return _minimal_generators(A, np.stack(nonzero), b0_)


class PresentedModule:
    """Cokernel of a minimal presentation, realized over the ground field."""

    def __init__(self, A, pres, name=None):
        self.algebra = A
        self.F = A.F
        self.pres = pres
        self.pres.setflags(write=False)
        self.b0, self.b1 = pres.shape[0], pres.shape[1]
        self.name = name
        self._realize()

    def _realize(self):
        A, F = self.algebra, self.F
        N = A.dim
        amb = self.b0 * N
        self.ambient_dim = amb
        if self.b1:
            D = _block_operator(A, self.pres)
            U = D.T  # rows span the relation submodule
            R, piv = ef.rref(F, U[:, ::-1])
            R = R[: len(piv)][:, ::-1]
            piv = [amb - 1 - c for c in piv]
        else:
            R, piv = F.zeros((0, amb)), []
        pivset = set(piv)
        nonpiv = [c for c in range(amb) if c not in pivset]
        n = len(nonpiv)
        Q = F.zeros((n, amb))
        E = F.zeros((amb, n))
        for i, c in enumerate(nonpiv):
            Q[i, c] = F.one
            E[c, i] = F.one
        for r, c in zip(R, piv):
            Q[:, c] = F.reduce(-r[nonpiv]) if F.fast else np.array([F.neg(v) for v in r[nonpiv]], dtype=object)
        self.relations_rows = R
        self.relation_pivots = piv
        self.Q, self.E = Q, E
        self.length = n
        self.nonpiv = nonpiv
        # action of every algebra basis element
        acts = []
        Qg = Q.reshape(n * self.b0, N)
        for k in range(N):
            # Q (I kron L_k) E, using that E selects the columns nonpiv
            QL = F.matmul(Qg, A.ops[k]).reshape(n, amb) if n else F.zeros((0, amb))
            acts.append(np.ascontiguousarray(QL[:, nonpiv]))
        self.basis_actions = np.stack(acts) if acts else F.zeros((0, n, n))
        self.actions = self.basis_actions[1:1 + A.e]
        self.gens = (
            np.stack([Q[:, g * N] for g in range(self.b0)], axis=1) if self.b0 else F.zeros((n, 0))
        )

    # basic numbers
    def __len__(self):
        return self.length

    def min_generators(self):
        return self.b0

    def is_zero(self):
        return self.length == 0

    def presentation_elements(self):
        A = self.algebra
        return [[AlgebraElement(A, self.pres[g, j]) for j in range(self.b1)] for g in range(self.b0)]

    def act(self, coords):
        """Matrix of multiplication by the algebra element with ``coords``."""
        F = self.F
        if F.fast:
            return F.reduce(np.tensordot(np.asarray(coords), self.basis_actions, axes=1))
        out = F.zeros((self.length, self.length))
        for c, M in zip(coords, self.basis_actions):
            if not F.is_zero(c):
                out = F.reduce(out + M * c)
        return out

    def m_image(self):
        """Row-echelon basis (rows) of mM inside the quotient coordinates."""
        F = self.F
        if self.length == 0:
            return F.zeros((0, 0)), []
        cols = np.concatenate([a for a in self.actions], axis=1) if self.algebra.e else F.zeros((self.length, 0))
        if cols.shape[1] == 0:
            return F.zeros((0, self.length)), []
        return ef.row_basis(F, cols.T)

    def top_projection(self):
        """Matrix (b0 x length) killing mM and sending generator g to e_g."""
        cached = self.__dict__.get("_top")
        if cached is not None:
            return cached
        F = self.F
        mrows, _ = self.m_image()
        C = np.concatenate([self.gens, mrows.T], axis=1) if len(mrows) else self.gens
        if C.shape[0] != C.shape[1]:
            raise AssertionError("presentation is not minimal: generators do not span M/mM")
        inv = ef.inverse_array(F, C)
        top = inv[: self.b0]
        self.__dict__["_top"] = top
        return top

    def check_actions(self):
        """Actions commute and satisfy the algebra's relations (on the basis)."""
        F = self.F
        for a, b in itertools.combinations(self.actions, 2):
            if not F.arrays_equal(F.matmul(a, b), F.matmul(b, a)):
                return False
        A = self.algebra
        for i in range(1, A.e + 1):
            for j in range(1, A.e + 1):
                prod = A.T[i, j]
                lhs = F.matmul(self.basis_actions[i], self.basis_actions[j])
                if not F.arrays_equal(lhs, self.act(prod)):
                    return False
        return True

    def __repr__(self):
        return f"PresentedModule(b0={self.b0}, b1={self.b1}, length={self.length})"


def present_module(A, matrix, b0=None, name=None) -> PresentedModule:
    """Module presented by ``matrix`` (minimized first).  An empty matrix with
    ``b0`` rows gives the free module R^b0."""
    return PresentedModule(A, minimize_presentation(A, matrix, b0), name)


def free_module(A, rank=1):
    return PresentedModule(A, A.F.zeros((rank, 0, A.dim)))


def zero_module(A):
    return PresentedModule(A, A.F.zeros((0, 0, A.dim)))


def residue_field(A):
    """k = R/m, presented by the row of variables."""
    return present_module(A, [[A.generator(i) for i in range(A.e)]])


def direct_sum(M, N):
    A = M.algebra
    F = A.F
    P = F.zeros((M.b0 + N.b0, M.b1 + N.b1, A.dim))
    P[: M.b0, : M.b1] = M.pres
    P[M.b0:, M.b1:] = N.pres
    return PresentedModule(A, P)


def length(M):
    return M.length


def min_generators(M):
    return M.b0


# --------------------------------------------------------------------------
# syzygies, Betti numbers, duals


def syzygy(M):
    """(M1, Psi): the first syzygy and a minimal presentation Psi of it."""
    A = M.algebra
    if M.b1 == 0:
        return zero_module(A), M.F.zeros((0, 0, A.dim))
    D = _block_operator(A, M.pres)
    psi = kernel_generators(A, D, M.b1)
    return PresentedModule(A, psi), psi


def betti(M, n):
    """[beta_0, ..., beta_n] by iterated syzygies."""
    out = [M.b0]
    cur = M
    for _ in range(n):
        if cur.b0 == 0:
            out.append(0)
            continue
        out.append(cur.b1)
        cur, _ = syzygy(cur)
    return out


def submodule_from_generators(A, gens):
    """Module generated by the columns of ``gens`` (b, c, N) inside R^b."""
    b, c, N = gens.shape
    if c == 0:
        return zero_module(A)
    D = _block_operator(A, gens)
    rel = kernel_generators(A, D, c)
    return present_module(A, rel if rel.shape[1] else A.F.zeros((c, 0, N)), b0=c)


def transpose_presentation(P):
    return np.ascontiguousarray(np.transpose(P, (1, 0, 2)))


def dual(M):
    """Hom(M, R) = ker(P^T : R^b0 -> R^b1), presented minimally."""
    A = M.algebra
    if M.b0 == 0:
        return zero_module(A)
    if M.b1 == 0:
        return free_module(A, M.b0)
    D = _block_operator(A, transpose_presentation(M.pres))
    gens = kernel_generators(A, D, M.b0)
    return submodule_from_generators(A, gens)


# --------------------------------------------------------------------------
# homomorphisms


@dataclass
class HomSpace:
    source: PresentedModule
    target: PresentedModule
    basis: list  # k-matrices (target.length x source.length)
    images: list  # generator images, arrays (source.b0, target.length)

    @property
    def dim(self):
        return len(self.basis)

    def __len__(self):
        return self.dim

    def tops(self):
        """Induced maps M/mM -> N/mN, one (b0_N x b0_M) matrix per basis map."""
        F = self.source.F
        pi = self.target.top_projection() if self.target.length else F.zeros((self.target.b0, 0))
        return [F.matmul(pi, im.T) for im in self.images]

    def combine(self, coeffs):
        F = self.source.F
        out = F.zeros((self.target.length, self.source.length))
        for c, B in zip(coeffs, self.basis):
            if not F.is_zero(c):
                out = F.reduce(out + B * c)
        return out

    def is_r_linear(self, phi):
        F = self.source.F
        return all(
            F.arrays_equal(F.matmul(phi, a), F.matmul(b, phi))
            for a, b in zip(self.source.actions, self.target.actions)
        )


def hom_space(M, N) -> HomSpace:
    """Basis of Hom_R(M, N) from the presentation of M."""
    if M.algebra is not N.algebra:
        raise AlgebraMismatch("modules over different algebras")
    A, F = M.algebra, M.F
    n, b0 = N.length, M.b0
    if n == 0 or b0 == 0:
        return HomSpace(M, N, [], [])
    if M.b1:
        eq = F.zeros((M.b1 * n, b0 * n))
        for j in range(M.b1):
            for g in range(b0):
                eq[j * n:(j + 1) * n, g * n:(g + 1) * n] = N.act(M.pres[g, j])
        sols = ef.nullspace_rows(F, eq)
    else:
        sols = F.eye(b0 * n)
    basis, images = [], []
    Nd = A.dim
    for s in sols:
        imgs = s.reshape(b0, n)
        # W[g, k] = b_k * n_g
        W = np.stack([np.stack([F.matmul(N.basis_actions[k], imgs[g]) for k in range(Nd)]) for g in range(b0)])
        phi = F.matmul(W.reshape(b0 * Nd, n).T, M.E)
        basis.append(phi)
        images.append(imgs)
    return HomSpace(M, N, basis, images)


def hom_space_commuting(M, N):
    """Hom_R(M, N) as k-linear maps X with X a_M = a_N X for every variable.

    Independent route used as an oracle against :func:`hom_space`.
    """
    F = M.F
    m, n = M.length, N.length
    if m == 0 or n == 0:
        return []
    blocks = []
    for aM, aN in zip(M.actions, N.actions):
        # vec(X aM - aN X) with X row-major: (I_n kron aM^T) - (aN kron I_m)
        blocks.append(F.reduce(_kron(F, F.eye(n), aM.T) - _kron(F, aN, F.eye(m))))
    eq = np.concatenate(blocks) if blocks else F.zeros((0, n * m))
    sols = ef.nullspace_rows(F, eq) if len(eq) else F.eye(n * m)
    return [s.reshape(n, m) for s in sols]


def _kron(F, a, b):
    if F.fast:
        return F.reduce(np.kron(a, b))
    ra, ca = a.shape
    rb, cb = b.shape
    out = F.zeros((ra * rb, ca * cb))
    for i in range(ra):
        for j in range(ca):
            if not F.is_zero(a[i, j]):
                out[i * rb:(i + 1) * rb, j * cb:(j + 1) * cb] = F.reduce(b * a[i, j])
    return out


def ext1_length(M, N):
    """dim Ext^1(M, N) from 0 -> Hom(M,N) -> Hom(F0,N) -> Hom(M1,N) -> Ext^1 -> 0."""
    M1, _ = syzygy(M)
    return hom_space(M1, N).dim - M.b0 * N.length + hom_space(M, N).dim


def ext_lengths(M, N, upto):
    """[dim Ext^i(M, N) for i = 1..upto] via Ext^i(M, N) = Ext^1(M_{i-1}, N)."""
    out = []
    cur = M
    for _ in range(upto):
        out.append(ext1_length(cur, N))
        cur, _ = syzygy(cur)
    return out


# --------------------------------------------------------------------------
# searching a matrix subspace


def _independent(F, mats):
    """Indices of a maximal linearly independent subset (first-come)."""
    if not mats:
        return []
    flat = np.stack([np.asarray(m).reshape(-1) for m in mats])
    if flat.shape[1] == 0:
        return []
    _, piv = ef.rref(F, flat.T)
    return list(piv)


def _search_span(F, mats, singular=False, budget=DEFAULT_ISO_BUDGET, seed=0,
                 random_trials=DEFAULT_RANDOM_TRIALS):
    """Find coefficients giving an invertible (or nonzero singular) element.

    Returns (coeffs, exhaustive_flag) or (None, True) when exhaustion proves
    that none exists.  Raises UndecidedAtBudget when neither path decides.
    Over a field with q > n elements the exhaustive path may use the grid
    {0..n}^h: a nonzero polynomial of degree n cannot vanish on all of it.
    """
    h = len(mats)
    if h == 0:
        return None, True
    n = mats[0].shape[0]
    q = F.order
    proj = (q ** h - 1) // (q - 1) if q else None
    grid_side = n + 1 if not singular else None  # det has degree n
    grid = None
    # the grid uses the integers 0..n, distinct only when char > n
    char = F.characteristic
    if grid_side is not None and (not char or char >= grid_side):
        grid = grid_side ** h - 1
    options = []
    if proj is not None:
        options.append(("projective", proj))
    if grid is not None:
        options.append(("grid", grid))
    options.sort(key=lambda t: t[1])
    if options and options[0][1] <= budget:
        how, _ = options[0]
        return _exhaust(F, mats, how, grid_side, singular), True
    rng = np.random.default_rng(seed)
    for _ in range(random_trials):
        if q:
            coeffs = [F.random(rng) for _ in range(h)]
        else:
            coeffs = [F.coerce(int(rng.integers(-50, 51))) for _ in range(h)]
        if all(F.is_zero(c) for c in coeffs):
            continue
        m = _lincomb(F, coeffs, mats)
        full = ef.rank(F, m) == n
        if full != singular:
            return coeffs, False
    raise UndecidedAtBudget(
        f"no {'singular' if singular else 'invertible'} element found in {random_trials} random trials; "
        f"exhaustive search over {options[0][1] if options else 'infinitely many'} points exceeds budget {budget}"
    )


def _lincomb(F, coeffs, mats):
    out = F.zeros(mats[0].shape)
    for c, m in zip(coeffs, mats):
        if not F.is_zero(c):
            out = F.reduce(out + m * c)
    return out


def _exhaust(F, mats, how, grid_side, singular):
    n = mats[0].shape[0]
    h = len(mats)
    if F.fast:
        basis = np.ascontiguousarray(np.stack(mats).astype(np.int64))
        coeffs, _ = _kernels.first_invertible(
            basis, F.p, 1 << 62, grid_side if how == "grid" else 0, singular
        )
        return coeffs
    if how == "grid":
        vals = [F.coerce(k) for k in range(grid_side)]
        it = (pt for pt in itertools.product(vals, repeat=h) if not all(F.is_zero(c) for c in pt))
    else:
        from ._search import projective_points

        it = projective_points(F, h)
    for pt in it:
        full = ef.rank(F, _lincomb(F, pt, mats)) == n
        if full != singular:
            return list(pt)
    return None


# --------------------------------------------------------------------------
# isomorphism


@dataclass
class IsoResult:
    isomorphic: bool
    witness: object = None  # k-matrix source -> target
    reason: str = ""
    exhaustive: bool = True

    def __bool__(self):
        return self.isomorphic


def is_isomorphic(M, N, budget=DEFAULT_ISO_BUDGET, seed=0) -> IsoResult:
    """Decide M = N; positive answers carry a verified R-linear bijection."""
    if M.algebra is not N.algebra:
        raise AlgebraMismatch("modules over different algebras")
    F = M.F
    if M.length != N.length:
        return IsoResult(False, reason="lengths differ")
    if M.b0 != N.b0:
        return IsoResult(False, reason="minimal numbers of generators differ")
    if M.b1 != N.b1:
        return IsoResult(False, reason="first Betti numbers differ")
    if M.length == 0:
        return IsoResult(True, F.zeros((0, 0)), reason="both zero")
    H = hom_space(M, N)
    tops = H.tops()
    idx = _independent(F, tops)
    if not idx:
        return IsoResult(False, reason="every homomorphism maps into mN")
    sub = [tops[i] for i in idx]
    # cheap certificates of non-isomorphism
    b = M.b0
    common_ker = ef.nullspace_rows(F, np.concatenate(sub))
    if len(common_ker):
        return IsoResult(False, reason="all induced maps share a kernel vector")
    if ef.rank(F, np.concatenate(sub, axis=1)) < b:
        return IsoResult(False, reason="all induced maps land in a proper subspace")
    coeffs, exhaustive = _search_span(F, sub, budget=budget, seed=seed)
    if coeffs is None:
        return IsoResult(False, reason="no invertible induced map (exhaustive)")
    full = [F.zero] * H.dim
    for c, i in zip(coeffs, idx):
        full[i] = F.coerce(c) if F.fast else c
    phi = H.combine(full)
    if ef.rank(F, phi) != M.length or not H.is_r_linear(phi):
        raise AssertionError("isomorphism witness failed verification")
    return IsoResult(True, phi, reason="invertible induced map", exhaustive=exhaustive)


# --------------------------------------------------------------------------
# indecomposability


def _spin(F, mats, v):
    """Echelon rows spanning the submodule generated by ``v``."""
    basis, piv = ef.row_basis(F, np.asarray(v)[None, :])
    queue = [basis[0]]
    while queue:
        u = queue.pop()
        for a in mats:
            w = F.matmul(a, u)
            r = ef.reduce_by(F, basis, piv, w)
            if not F.all_zero(r):
                basis, piv = ef.row_basis(F, np.concatenate([basis, r[None, :]]))
                queue.append(r)
    return basis, piv


def _restrict(F, mats, W):
    """Actions on the invariant subspace with column basis W."""
    out = []
    for a in mats:
        X = ef.solve_array(F, W, F.matmul(a, W))
        if X is None:
            raise AssertionError("subspace is not invariant")
        out.append(X)
    return out


def _complete_basis(F, W, d):
    """Columns C with [W | C] invertible."""
    cols = []
    cur = W
    for i in range(d):
        e = F.zeros((d, 1))
        e[i, 0] = F.one
        trial = np.concatenate([cur, e], axis=1)
        if ef.rank(F, trial) == trial.shape[1]:
            cur = trial
            cols.append(e)
    return np.concatenate(cols, axis=1) if cols else F.zeros((d, 0))


def _quotient_actions(F, mats, W, d):
    C = _complete_basis(F, W, d)
    full = np.concatenate([W, C], axis=1)
    inv = ef.inverse_array(F, full)
    P = inv[W.shape[1]:]
    return [F.matmul(F.matmul(P, a), C) for a in mats]


def _singular_candidates(F, mats, d, rng, rounds=8):
    """Nonzero singular elements of span(mats): basis elements, eigen-shifts,
    random combinations and their shifts."""
    ident = F.eye(d)
    scalars = list(F.elements()) if F.is_finite and F.order <= 64 else [F.coerce(k) for k in range(-4, 5)]
    seen = 0
    pool = list(mats)
    for _ in range(rounds):
        pool.append(_lincomb(F, [F.random(rng) if F.is_finite else F.coerce(int(rng.integers(-9, 10))) for _ in mats], mats))
    for a in pool:
        if F.all_zero(a):
            continue
        for lam in scalars:
            b = F.reduce(a - ident * lam) if not F.is_zero(lam) else a
            if F.all_zero(b):
                continue
            if ef.rank(F, b) < d:
                seen += 1
                yield b


def _find_submodule(F, mats, d, budget, rng):
    """Proper nonzero invariant subspace (column basis) or None if irreducible."""
    if d <= 1:
        return None
    idx = _independent(F, mats)
    basis = [mats[i] for i in idx]
    # a singular element with small nullity
    best = None
    for b in _singular_candidates(F, basis, d, rng):
        k = d - ef.rank(F, b)
        if best is None or k < best[0]:
            best = (k, b)
            if k == 1:
                break
    if best is None:
        coeffs, exhaustive = None, True
        try:
            coeffs, exhaustive = _search_span(F, basis, singular=True, budget=budget)
        except UndecidedAtBudget:
            raise
        if coeffs is not None:
            b = _lincomb(F, coeffs, basis) if not F.fast else F.reduce(np.tensordot(np.asarray(coeffs, dtype=np.int64), np.stack(basis), axes=1))
            best = (d - ef.rank(F, b), b)
    if best is None:
        # division algebra: V is free over it; spinning one vector decides
        e0 = F.zeros(d)
        e0[0] = F.one
        sp, _ = _spin(F, basis, e0)
        return sp.T if len(sp) < d else None
    k, a = best
    ker = ef.nullspace_rows(F, a)
    q = F.order
    if q is None:
        if k > 1:
            raise UndecidedAtBudget("no nullity-one singular element found over an infinite field")
        points = [ker[0]]
    else:
        if (q ** k - 1) // (q - 1) > budget:
            raise UndecidedAtBudget("kernel too large to enumerate")
        from ._search import projective_points

        points = (_lincomb(F, c, list(ker)) for c in projective_points(F, k))
    for v in points:
        sp, _ = _spin(F, basis, v)
        if len(sp) < d:
            return sp.T
    # every kernel vector is cyclic; test the dual side once
    aT = [m.T for m in basis]
    u = ef.nullspace_rows(F, a.T)[0]
    sp, _ = _spin(F, aT, u)
    if len(sp) < d:
        W = ef.nullspace_rows(F, sp)  # annihilator of the dual submodule
        return W.T
    return None


def composition_factors(F, mats, d, budget=DEFAULT_ISO_BUDGET, seed=0):
    """Representations (lists of matrices, one per element of ``mats``) of the
    composition factors of k^d under the algebra spanned by ``mats``."""
    rng = np.random.default_rng(seed)
    stack = [(mats, d)]
    out = []
    while stack:
        ms, dim = stack.pop()
        if dim == 0:
            continue
        W = _find_submodule(F, ms, dim, budget, rng)
        if W is None:
            out.append(ms)
            continue
        stack.append((_quotient_actions(F, ms, W, dim), dim - W.shape[1]))
        stack.append((_restrict(F, ms, W), W.shape[1]))
    return out


@dataclass
class IndecResult:
    indecomposable: bool
    idempotent: object = None  # k-matrix on M when decomposable
    details: dict = dc_field(default_factory=dict)

    def __bool__(self):
        return self.indecomposable


def _reduced_endomorphisms(M):
    H = hom_space(M, M)
    tops = H.tops()
    idx = _independent(M.F, tops)
    return H, [tops[i] for i in idx], idx


def is_indecomposable(M, budget=DEFAULT_ISO_BUDGET, seed=0) -> IndecResult:
    """Decide whether End(M) is local, via its image on M/mM."""
    F = M.F
    if M.length == 0:
        return IndecResult(False, details={"reason": "zero module"})
    H, ebar, idx = _reduced_endomorphisms(M)
    d = M.b0
    if d == 1:
        return IndecResult(True, details={"reason": "cyclic module", "dim_End": H.dim})
    factors = composition_factors(F, ebar, d, budget, seed)
    # radical: elements acting as zero on every composition factor
    h = len(ebar)
    cols = []
    for rep in factors:
        cols.append(np.stack([np.asarray(m).reshape(-1) for m in rep], axis=1))
    big = np.concatenate(cols, axis=0)
    rad = ef.nullspace_rows(F, big)
    dim_B = h - len(rad)
    dim_S = factors[0][0].shape[0]
    details = {
        "dim_End": H.dim,
        "dim_End_top": h,
        "dim_radical": len(rad),
        "factor_dims": [rep[0].shape[0] for rep in factors],
    }
    if dim_B == dim_S:
        details["reason"] = "End(M)/rad is a division algebra"
        return IndecResult(True, details=details)
    # decomposable: non-nilpotent element killing a vector of a factor
    rep = factors[0]
    s = F.zeros(dim_S)
    s[0] = F.one
    imgs = np.stack([F.matmul(m, s) for m in rep], axis=1)
    ann = ef.nullspace_rows(F, imgs)
    rng = np.random.default_rng(seed)
    cands = list(ann) + [
        _lincomb(F, [F.random(rng) if F.is_finite else F.coerce(int(rng.integers(-9, 10))) for _ in ann], list(ann))
        for _ in range(64)
    ]
    for c in cands:
        abar = _lincomb(F, c, ebar)
        if F.all_zero(_matpow(F, abar, d)):
            continue
        full = [F.zero] * H.dim
        for ci, i in zip(c, idx):
            full[i] = ci
        phi = H.combine(full)
        e = fitting_idempotent(F, phi)
        details["reason"] = "Fitting decomposition of a non-nilpotent non-unit"
        return IndecResult(False, e, details)
    raise UndecidedAtBudget("could not exhibit a witness idempotent")


def _matpow(F, a, k):
    out = F.eye(a.shape[0])
    for _ in range(k):
        out = F.matmul(out, a)
    return out


def fitting_idempotent(F, phi):
    """Projection onto im(phi^n) along ker(phi^n), n = size."""
    n = phi.shape[0]
    pw = _matpow(F, phi, n)
    img, _ = ef.row_basis(F, pw.T)
    ker = ef.nullspace_rows(F, pw)
    basis = np.concatenate([img, ker]).T
    inv = ef.inverse_array(F, basis)
    D = F.zeros((n, n))
    for i in range(len(img)):
        D[i, i] = F.one
    return F.matmul(F.matmul(basis, D), inv)


def idempotents_bruteforce(M, limit=DEFAULT_ISO_BUDGET):
    """All idempotents of End(M) by enumeration (small finite cases only)."""
    F = M.F
    H = hom_space(M, M)
    q = F.order
    if q is None or q ** H.dim > limit:
        raise UndecidedAtBudget("End(M) too large to enumerate")
    out = []
    for coeffs in itertools.product(list(F.elements()), repeat=H.dim):
        e = H.combine(coeffs)
        if F.arrays_equal(F.matmul(e, e), e):
            out.append(e)
    return out


# --------------------------------------------------------------------------
# free summands, pushouts


def has_free_summand(M) -> bool:
    """Some homomorphism M -> R is surjective."""
    if M.length == 0:
        return False
    R = free_module(M.algebra, 1)
    H = hom_space(M, R)
    return any(not M.F.all_zero(t) for t in H.tops())


def pushout_extension(N, x, j):
    """(F + N1) / {(iota(n), -x^j n)} for N1 = first syzygy of N, F = R^b0."""
    A = N.algebra
    F = A.F
    xs = x.coords if isinstance(x, AlgebraElement) else np.asarray(x)
    xj = A.one().coords
    for _ in range(j):
        xj = _mul(A, xs, xj)
    M1, psi = syzygy(N)
    b0, b1, b2 = N.b0, N.b1, psi.shape[1]
    P = F.zeros((b0 + b1, b1 + b2, A.dim))
    P[:b0, :b1] = N.pres
    neg = F.reduce(-xj) if F.fast else np.array([F.neg(c) for c in xj], dtype=object)
    for i in range(b1):
        P[b0 + i, i] = neg
    if b2:
        P[b0:, b1:] = psi
    return present_module(A, P, b0=b0 + b1)


# --------------------------------------------------------------------------
# total acyclicity and reflexivity


@dataclass
class AcyclicityCertificate:
    ok: bool
    checks: list  # (name, lhs, rhs, passed)
    failure: str | None = None

    def __bool__(self):
        return self.ok


def _matrix_product(A, P1, P2):
    """Product of presentation matrices (b, c, N) x (c, d, N)."""
    F = A.F
    b, c, N = P1.shape
    d = P2.shape[1]
    out = F.zeros((b, d, N))
    for i in range(b):
        for k in range(d):
            acc = F.zeros(N)
            for j in range(c):
                acc = F.reduce(acc + _mul(A, P1[i, j], P2[j, k]))
            out[i, k] = acc
    return out


def verify_totally_acyclic_periodic(A, Phi, Psi):
    """Check the period-two complex ... -Phi-> R^n -Psi-> R^n -Phi-> ... and its dual."""
    F = A.F
    Phi = _as_raw_matrix(A, Phi)
    Psi = _as_raw_matrix(A, Psi)
    n = Phi.shape[0]
    if Phi.shape[:2] != (n, n) or Psi.shape[:2] != (n, n):
        raise ValueError("Phi and Psi must be square of equal size")
    total = n * A.dim
    checks = []

    def side(P1, P2, tag):
        for a, b, nm in ((P1, P2, "Phi*Psi"), (P2, P1, "Psi*Phi")):
            z = F.all_zero(_matrix_product(A, a, b))
            checks.append((f"{tag}{nm}=0", "composition", 0 if z else 1, z))
        r1 = ef.rank(F, _block_operator(A, P1))
        r2 = ef.rank(F, _block_operator(A, P2))
        checks.append((f"{tag}ker Phi = im Psi", total - r1, r2, total - r1 == r2))
        checks.append((f"{tag}ker Psi = im Phi", total - r2, r1, total - r2 == r1))

    side(Phi, Psi, "")
    side(transpose_presentation(Phi), transpose_presentation(Psi), "dual: ")
    failure = next((c[0] for c in checks if not c[3]), None)
    return AcyclicityCertificate(failure is None, checks, failure)


@dataclass
class ReflexivityReport:
    verdict: str  # certified, verified_to_degree, refuted
    degree: int
    ext_module: list
    ext_dual: list
    period: int | None = None
    side: str | None = None
    notes: list = dc_field(default_factory=list)

    def __bool__(self):
        return self.verdict != "refuted"


def _find_period(mods, budget):
    """(i, j) with mods[i] = mods[j], j < i, smallest i; None if none."""
    for i in range(1, len(mods)):
        for j in range(i):
            a, b = mods[i], mods[j]
            if a.length != b.length or a.b0 != b.b0 or a.b1 != b.b1:
                continue
            try:
                if is_isomorphic(a, b, budget=budget):
                    return i, j
            except UndecidedAtBudget:
                continue
    return None


def verify_totally_reflexive_bounded(M, n, budget=DEFAULT_ISO_BUDGET):
    """Ext^i(M, R) = 0 = Ext^i(M*, R) for 1 <= i <= n, with periodicity upgrade."""
    A = M.algebra
    R = free_module(A, 1)
    if M.b1 == 0:
        return ReflexivityReport("certified", n, [0] * n, [0] * n, period=None, notes=["free module"])

    def resolve(X):
        mods = [X]
        exts = []
        for _ in range(n):
            exts.append(ext1_length(mods[-1], R))
            mods.append(syzygy(mods[-1])[0])
        return mods, exts

    mods, ext_m = resolve(M)
    for i, v in enumerate(ext_m, start=1):
        if v:
            return ReflexivityReport("refuted", i, ext_m[:i], [], side="module")
    Md = dual(M)
    mods_d, ext_d = resolve(Md)
    for i, v in enumerate(ext_d, start=1):
        if v:
            return ReflexivityReport("refuted", i, ext_m, ext_d[:i], side="dual")
    notes = []
    try:
        refl = bool(is_isomorphic(dual(Md), M, budget=budget))
    except UndecidedAtBudget:
        refl = None
    notes.append(f"M isomorphic to its double dual: {refl}")
    per_m = _find_period(mods, budget)
    per_d = _find_period(mods_d, budget)
    if refl and per_m and per_d:
        return ReflexivityReport("certified", n, ext_m, ext_d, period=per_m[0] - per_m[1], notes=notes)
    return ReflexivityReport("verified_to_degree", n, ext_m, ext_d, notes=notes)


def sequence_is_exact(A, maps):
    """Exactness data for R^a -f-> R^b -g-> R^c ... given presentation matrices.

    ``maps`` are raw (b, a, N) arrays composed left to right; for each inner
    position returns (composition_zero, ker_dim, im_dim), all as k-dimensions.
    """
    F = A.F
    out = []
    for P1, P2 in zip(maps, maps[1:]):
        comp = F.all_zero(_matrix_product(A, P2, P1))
        total = P2.shape[1] * A.dim
        r1 = ef.rank(F, _block_operator(A, P1))
        r2 = ef.rank(F, _block_operator(A, P2))
        out.append((comp, total - r2, r1))
    return out
