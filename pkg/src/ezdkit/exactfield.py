"""Exact scalar fields and the dense linear algebra built on them.

Three kinds of field are supported: prime fields F_p, small extensions
F_p[a]/(modulus) of degree 2..4, and the rationals.  Matrices are numpy arrays
of *raw* field values: ``int64`` residues for primes below 2**24, Python
objects otherwise (big ints, :class:`fractions.Fraction`, or interned
extension-field elements).  All algorithms pivot deterministically, so every
downstream result is reproducible bit for bit.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels

FAST_PRIME_LIMIT = 1 << 24  # residues below this are stored as int64
MAX_EXTENSION_DEGREE = 4


class FieldError(ValueError):
    """Invalid field specification."""


class NonPrimeModulus(FieldError):
    pass


class ReducibleModulus(FieldError):
    pass


class MixedFields(TypeError):
    """Operands live over different fields."""


class NoSolution(ArithmeticError):
    """A linear system is inconsistent (a signal, not a fault)."""


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 3.3e24, trial division below 1000."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for q in small:
        if n % q == 0:
            return n == q
    if n < 1681:
        return True
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    """Value description of a field.

    ``modulus`` holds the monic defining polynomial of an extension, lowest
    degree first; ``generator`` is the name used when printing its elements.
    """

    kind: str
    p: int = 0
    modulus: tuple = ()
    generator: str = "a"

    @classmethod
    def prime(cls, p):
        return cls("prime", int(p))

    @classmethod
    def extension(cls, p, modulus, generator="a"):
        return cls("extension", int(p), tuple(int(c) for c in modulus), generator)

    @classmethod
    def rationals(cls):
        return cls("rationals")

    @property
    def degree(self) -> int:
        return len(self.modulus) - 1 if self.kind == "extension" else 1

    @property
    def order(self):
        """Number of elements, or None for an infinite field."""
        if self.kind == "rationals":
            return None
        return self.p ** self.degree

    @property
    def characteristic(self) -> int:
        return self.p

    def __str__(self):
        if self.kind == "prime":
            return f"GF({self.p})"
        if self.kind == "rationals":
            return "QQ"
        g = self.generator
        terms = []
        for k in range(len(self.modulus) - 1, -1, -1):
            c = self.modulus[k]
            if c == 0:
                continue
            mono = "" if k == 0 else (g if k == 1 else f"{g}^{k}")
            if not mono:
                terms.append(str(c))
            elif c == 1:
                terms.append(mono)
            else:
                terms.append(f"{c}*{mono}")
        return f"GF({self.p}^{self.degree}; {' + '.join(terms)})"


# --------------------------------------------------------------------------
# field handles


class Field:
    """Common interface over raw values; see the concrete subclasses."""

    spec: FieldSpec
    dtype = object
    fast = False  # True when arrays are int64 residues handled by the kernels

    def __eq__(self, other):
        return isinstance(other, Field) and other.spec == self.spec

    def __hash__(self):
        return hash(self.spec)

    def __repr__(self):
        return str(self.spec)

    def __reduce__(self):
        return (make_field, (self.spec,))

    def __call__(self, value) -> "FieldElement":
        return FieldElement(self, self.coerce(value))

    @property
    def order(self):
        return self.spec.order

    @property
    def characteristic(self):
        return self.spec.p

    @property
    def is_finite(self):
        return self.spec.kind != "rationals"

    # scalar ops on raw values
    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def is_zero(self, a) -> bool:
        return a == 0

    def is_one(self, a) -> bool:
        return a == 1

    def eq(self, a, b) -> bool:
        return self.is_zero(self.sub(a, b))

    def pow(self, a, k: int):
        if k < 0:
            a, k = self.inv(a), -k
        out = self.one
        while k:
            if k & 1:
                out = self.mul(out, a)
            a = self.mul(a, a)
            k >>= 1
        return out

    def elements(self):
        raise FieldError(f"{self.spec} is infinite and cannot be enumerated")

    def nonzero_elements(self):
        return [a for a in self.elements() if not self.is_zero(a)]

    # arrays
    def array(self, data) -> np.ndarray:
        arr = np.asarray(data, dtype=object)
        out = np.empty(arr.shape, dtype=self.dtype)
        flat_in = arr.reshape(-1)
        flat_out = out.reshape(-1)
        for i, v in enumerate(flat_in):
            flat_out[i] = self.coerce(v)
        return out

    def zeros(self, shape) -> np.ndarray:
        if self.dtype is object:
            out = np.empty(shape, dtype=object)
            out.fill(self.zero)
            return out
        return np.zeros(shape, dtype=self.dtype)

    def eye(self, n: int) -> np.ndarray:
        out = self.zeros((n, n))
        for i in range(n):
            out[i, i] = self.one
        return out

    def reduce(self, arr):
        return arr

    def matmul(self, a, b):
        a = np.asarray(a)
        b = np.asarray(b)
        if a.shape[-1] == 0:
            shape = a.shape[:-1] + (b.shape[-1] if b.ndim > 1 else ())
            return self.zeros(shape)
        return self.reduce(a @ b)

    def scale(self, c, arr):
        return self.reduce(np.asarray(arr) * c)

    def random(self, rng):
        raise NotImplementedError

    def random_array(self, rng, shape) -> np.ndarray:
        out = self.zeros(shape)
        flat = out.reshape(-1)
        for i in range(flat.size):
            flat[i] = self.random(rng)
        return out

    def all_zero(self, arr) -> bool:
        arr = np.asarray(arr)
        if self.dtype is not object:
            return not arr.any()
        return all(self.is_zero(v) for v in arr.reshape(-1))

    def arrays_equal(self, a, b) -> bool:
        a = np.asarray(a)
        b = np.asarray(b)
        return a.shape == b.shape and self.all_zero(self.reduce(a - b))


class PrimeField(Field):
    def __init__(self, spec: FieldSpec):
        if not is_prime(spec.p):
            raise NonPrimeModulus(f"{spec.p} is not prime")
        self.spec = spec
        self.p = spec.p
        self.fast = self.p < FAST_PRIME_LIMIT
        self.dtype = np.int64 if self.fast else object
        self.zero = 0
        self.one = 1

    def coerce(self, v):
        if isinstance(v, FieldElement):
            if v.field != self:
                raise MixedFields(f"element of {v.field} used over {self}")
            return v._raw
        if isinstance(v, (int, np.integer)):
            return int(v) % self.p
        if isinstance(v, Fraction):
            if v.denominator % self.p == 0:
                raise ZeroDivisionError(f"{v} has no image in {self}")
            return v.numerator * pow(v.denominator, -1, self.p) % self.p
        raise TypeError(f"cannot coerce {v!r} into {self}")

    def add(self, a, b):
        return (a + b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(int(a), -1, self.p)

    def elements(self):
        return range(self.p)

    def format(self, a) -> str:
        return str(int(a))

    def array(self, data):
        arr = np.asarray(data)
        if arr.dtype.kind in "iu":
            if self.fast:
                return np.mod(arr.astype(np.int64), self.p)
            return np.mod(arr.astype(object), self.p)
        return super().array(data)

    def reduce(self, arr):
        return np.mod(arr, self.p)

    def matmul(self, a, b):
        a = np.asarray(a)
        b = np.asarray(b)
        if self.fast and a.shape[-1] > 32768:
            # keep int64 partial sums below 2**63
            out = self.zeros(a.shape[:-1] + b.shape[1:])
            for k0 in range(0, a.shape[-1], 32768):
                out = (out + a[..., k0:k0 + 32768] @ b[k0:k0 + 32768]) % self.p
            return out
        return super().matmul(a, b)

    def random(self, rng):
        return int(rng.integers(0, self.p))

    def random_array(self, rng, shape):
        if self.fast:
            return rng.integers(0, self.p, size=shape, dtype=np.int64)
        return super().random_array(rng, shape)


class ExtElement:
    """Interned element of an extension field; usable inside object arrays."""

    __slots__ = ("field", "coeffs", "code")

    def __init__(self, field, coeffs, code):
        self.field = field
        self.coeffs = coeffs
        self.code = code

    def _other(self, o):
        if isinstance(o, ExtElement):
            if o.field is not self.field and o.field != self.field:
                raise MixedFields("extension elements from different fields")
            return o
        if isinstance(o, (int, np.integer, Fraction)):
            return self.field.coerce(o)
        return None

    def __add__(self, o):
        o = self._other(o)
        return NotImplemented if o is None else self.field.add(self, o)

    __radd__ = __add__

    def __sub__(self, o):
        o = self._other(o)
        return NotImplemented if o is None else self.field.sub(self, o)

    def __rsub__(self, o):
        o = self._other(o)
        return NotImplemented if o is None else self.field.sub(o, self)

    def __mul__(self, o):
        o = self._other(o)
        return NotImplemented if o is None else self.field.mul(self, o)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = self._other(o)
        return NotImplemented if o is None else self.field.div(self, o)

    def __rtruediv__(self, o):
        o = self._other(o)
        return NotImplemented if o is None else self.field.div(o, self)

    def __neg__(self):
        return self.field.neg(self)

    def __pow__(self, k):
        return self.field.pow(self, int(k))

    def __eq__(self, o):
        o = self._other(o)
        if o is None:
            return NotImplemented
        return self.code == o.code

    def __hash__(self):
        return hash(self.code)

    def __bool__(self):
        return self.code != 0

    def __reduce__(self):
        return (_ext_from_code, (self.field.spec, self.code))

    def __repr__(self):
        return self.field.format(self)


def _ext_from_code(spec, code):
    return make_field(spec).from_code(code)


class ExtensionField(Field):
    def __init__(self, spec: FieldSpec):
        p = spec.p
        if not is_prime(p):
            raise NonPrimeModulus(f"{p} is not prime")
        mod = [c % p for c in spec.modulus]
        while mod and mod[-1] == 0:
            mod.pop()
        n = len(mod) - 1
        if n < 2:
            raise FieldError("extension degree must be at least 2")
        if n > MAX_EXTENSION_DEGREE:
            raise FieldError(f"extension degree {n} exceeds the cap of {MAX_EXTENSION_DEGREE}")
        lead_inv = pow(mod[-1], -1, p)
        mod = tuple(c * lead_inv % p for c in mod)
        if not _irreducible(mod, p):
            raise ReducibleModulus(f"modulus {mod} is reducible over GF({p})")
        self.spec = FieldSpec("extension", p, mod, spec.generator)
        self.p = p
        self.n = n
        self.modulus = mod
        self._cache: dict = {}
        self._inv_cache: dict = {}
        self.zero = self._make((0,) * n)
        self.one = self._make((1,) + (0,) * (n - 1))
        self.gen = self._make((0, 1) + (0,) * (n - 2))

    def _make(self, coeffs):
        code = 0
        for c in reversed(coeffs):
            code = code * self.p + c
        hit = self._cache.get(code)
        if hit is None:
            hit = ExtElement(self, coeffs, code)
            if len(self._cache) < 1 << 18:
                self._cache[code] = hit
        return hit

    def from_code(self, code: int):
        cs = []
        for _ in range(self.n):
            code, r = divmod(code, self.p)
            cs.append(r)
        return self._make(tuple(cs))

    def coerce(self, v):
        if isinstance(v, FieldElement):
            if v.field != self:
                raise MixedFields(f"element of {v.field} used over {self}")
            return v._raw
        if isinstance(v, ExtElement):
            if v.field != self:
                raise MixedFields("extension elements from different fields")
            return v if v.field is self else self._make(v.coeffs)
        if isinstance(v, (int, np.integer)):
            return self._make((int(v) % self.p,) + (0,) * (self.n - 1))
        if isinstance(v, Fraction):
            if v.denominator % self.p == 0:
                raise ZeroDivisionError(f"{v} has no image in {self}")
            c = v.numerator * pow(v.denominator, -1, self.p) % self.p
            return self._make((c,) + (0,) * (self.n - 1))
        if isinstance(v, (tuple, list)):
            cs = [int(c) % self.p for c in v]
            if len(cs) > self.n:
                return self._reduce_poly(cs)
            return self._make(tuple(cs) + (0,) * (self.n - len(cs)))
        raise TypeError(f"cannot coerce {v!r} into {self}")

    def _reduce_poly(self, cs):
        p, n, mod = self.p, self.n, self.modulus
        cs = list(cs)
        for k in range(len(cs) - 1, n - 1, -1):
            c = cs[k]
            if c:
                for i in range(n):
                    cs[k - n + i] = (cs[k - n + i] - c * mod[i]) % p
                cs[k] = 0
        return self._make(tuple(cs[:n]) + (0,) * max(0, n - len(cs)))

    def add(self, a, b):
        p = self.p
        return self._make(tuple((x + y) % p for x, y in zip(a.coeffs, b.coeffs)))

    def sub(self, a, b):
        p = self.p
        return self._make(tuple((x - y) % p for x, y in zip(a.coeffs, b.coeffs)))

    def neg(self, a):
        p = self.p
        return self._make(tuple((-x) % p for x in a.coeffs))

    def mul(self, a, b):
        if a.code == 0 or b.code == 0:
            return self.zero
        prod = [0] * (2 * self.n - 1)
        for i, x in enumerate(a.coeffs):
            if x:
                for j, y in enumerate(b.coeffs):
                    prod[i + j] += x * y
        return self._reduce_poly([c % self.p for c in prod])

    def inv(self, a):
        if a.code == 0:
            raise ZeroDivisionError("inverse of zero")
        hit = self._inv_cache.get(a.code)
        if hit is None:
            hit = Field.pow(self, a, self.p ** self.n - 2)
            self._inv_cache[a.code] = hit
        return hit

    def is_zero(self, a):
        return a.code == 0 if isinstance(a, ExtElement) else a == 0

    def is_one(self, a):
        return a.code == 1 if isinstance(a, ExtElement) else a == 1

    def elements(self):
        return [self.from_code(c) for c in range(self.p ** self.n)]

    def format(self, a) -> str:
        g = self.spec.generator
        terms = []
        for k in range(self.n - 1, -1, -1):
            c = a.coeffs[k]
            if c == 0:
                continue
            mono = "" if k == 0 else (g if k == 1 else f"{g}^{k}")
            if not mono:
                terms.append(str(c))
            elif c == 1:
                terms.append(mono)
            else:
                terms.append(f"{c}*{mono}")
        return " + ".join(terms) if terms else "0"

    def random(self, rng):
        return self.from_code(int(rng.integers(0, self.p ** self.n)))


class Rationals(Field):
    def __init__(self, spec: FieldSpec):
        self.spec = spec
        self.p = 0
        self.zero = Fraction(0)
        self.one = Fraction(1)

    def coerce(self, v):
        if isinstance(v, FieldElement):
            if v.field != self:
                raise MixedFields(f"element of {v.field} used over {self}")
            return v._raw
        if isinstance(v, (int, np.integer)):
            return Fraction(int(v))
        if isinstance(v, Fraction):
            return v
        if isinstance(v, str):
            return Fraction(v)
        raise TypeError(f"cannot coerce {v!r} into QQ")

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return 1 / Fraction(a)

    def format(self, a) -> str:
        return str(a)

    def random(self, rng):
        return Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 4)))


def _poly_eval(coeffs, x, p):
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % p
    return acc


def _poly_mod(num, den, p):
    num = list(num)
    inv_lead = pow(den[-1], -1, p)
    for k in range(len(num) - 1, len(den) - 2, -1):
        c = num[k] * inv_lead % p
        if c:
            for i in range(len(den)):
                num[k - len(den) + 1 + i] = (num[k - len(den) + 1 + i] - c * den[i]) % p
    return num[: len(den) - 1]


def _irreducible(mod, p) -> bool:
    n = len(mod) - 1
    if any(_poly_eval(mod, x, p) == 0 for x in range(p)):
        return False
    if n == 4:
        for b, c in itertools.product(range(p), repeat=2):
            if not any(_poly_mod(mod, (c, b, 1), p)):
                return False
    return True


@functools.lru_cache(maxsize=None)
def make_field(spec: FieldSpec) -> Field:
    """Return the (cached) field handle for ``spec``."""
    if spec.kind == "prime":
        return PrimeField(spec)
    if spec.kind == "extension":
        return ExtensionField(spec)
    if spec.kind == "rationals":
        return Rationals(spec)
    raise FieldError(f"unknown field kind {spec.kind!r}")


def GF(p: int, modulus=None, generator: str = "a") -> Field:
    """Shorthand: ``GF(5)`` or ``GF(3, (1, 0, 1))`` for F_3[a]/(a^2 + 1)."""
    if modulus is None:
        return make_field(FieldSpec.prime(p))
    field = make_field(FieldSpec.extension(p, modulus, generator))
    return field


QQ = make_field(FieldSpec.rationals())


# --------------------------------------------------------------------------
# public element and matrix wrappers


class FieldElement:
    """A field value tagged with its field; supports the usual operators."""

    __slots__ = ("field", "_raw")

    def __init__(self, field: Field, raw):
        self.field = field
        self._raw = raw

    @property
    def spec(self) -> FieldSpec:
        return self.field.spec

    @property
    def value(self):
        """Canonical representative: int, coefficient tuple, or Fraction."""
        if isinstance(self._raw, ExtElement):
            return self._raw.coeffs
        return self._raw

    def _o(self, other):
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise MixedFields(f"{self.field} vs {other.field}")
            return other._raw
        try:
            return self.field.coerce(other)
        except TypeError:
            return None

    def _wrap(self, raw):
        return FieldElement(self.field, raw)

    def __add__(self, o):
        r = self._o(o)
        return NotImplemented if r is None else self._wrap(self.field.add(self._raw, r))

    __radd__ = __add__

    def __sub__(self, o):
        r = self._o(o)
        return NotImplemented if r is None else self._wrap(self.field.sub(self._raw, r))

    def __rsub__(self, o):
        r = self._o(o)
        return NotImplemented if r is None else self._wrap(self.field.sub(r, self._raw))

    def __mul__(self, o):
        r = self._o(o)
        return NotImplemented if r is None else self._wrap(self.field.mul(self._raw, r))

    __rmul__ = __mul__

    def __truediv__(self, o):
        r = self._o(o)
        return NotImplemented if r is None else self._wrap(self.field.div(self._raw, r))

    def __rtruediv__(self, o):
        r = self._o(o)
        return NotImplemented if r is None else self._wrap(self.field.div(r, self._raw))

    def __neg__(self):
        return self._wrap(self.field.neg(self._raw))

    def __pow__(self, k):
        return self._wrap(self.field.pow(self._raw, int(k)))

    def inverse(self):
        return self._wrap(self.field.inv(self._raw))

    def __eq__(self, o):
        if isinstance(o, FieldElement) and o.field != self.field:
            return False
        r = self._o(o)
        if r is None:
            return NotImplemented
        return self.field.eq(self._raw, r)

    def __hash__(self):
        return hash((self.field.spec, self._raw))

    def __bool__(self):
        return not self.field.is_zero(self._raw)

    def __repr__(self):
        return f"{self.field.format(self._raw)} in {self.field.spec}"

    def __str__(self):
        return self.field.format(self._raw)


class ScalarMatrix:
    """Immutable matrix over one field, backed by a raw numpy array."""

    __slots__ = ("field", "data")

    def __init__(self, field: Field, data):
        self.field = field
        arr = np.array(data, dtype=field.dtype, copy=True)
        if arr.ndim != 2:
            raise ValueError("ScalarMatrix needs a 2-d array")
        arr.setflags(write=False)
        self.data = arr

    @classmethod
    def from_rows(cls, rows, field: Field | None = None):
        fields = {v.field for row in rows for v in row if isinstance(v, FieldElement)}
        if len(fields) > 1:
            raise MixedFields("matrix entries disagree on the field")
        if fields:
            (f,) = fields
            if field is not None and field != f:
                raise MixedFields(f"entries are over {f}, not {field}")
            field = f
        if field is None:
            raise ValueError("a field is required for plain integer entries")
        n_cols = len(rows[0]) if rows else 0
        arr = field.zeros((len(rows), n_cols))
        for i, row in enumerate(rows):
            if len(row) != n_cols:
                raise ValueError("ragged rows")
            for j, v in enumerate(row):
                arr[i, j] = field.coerce(v)
        return cls(field, arr)

    @classmethod
    def identity(cls, field, n):
        return cls(field, field.eye(n))

    @classmethod
    def zeros(cls, field, r, c):
        return cls(field, field.zeros((r, c)))

    @property
    def rows(self):
        return self.data.shape[0]

    @property
    def cols(self):
        return self.data.shape[1]

    @property
    def shape(self):
        return self.data.shape

    @property
    def T(self):
        return ScalarMatrix(self.field, self.data.T)

    def __getitem__(self, ij):
        return FieldElement(self.field, self.data[ij])

    def tolist(self):
        return [[FieldElement(self.field, v) for v in row] for row in self.data]

    def __matmul__(self, other):
        if isinstance(other, ScalarMatrix):
            if other.field != self.field:
                raise MixedFields("matrix product across fields")
            return ScalarMatrix(self.field, self.field.matmul(self.data, other.data))
        return NotImplemented

    def __eq__(self, other):
        return (
            isinstance(other, ScalarMatrix)
            and other.field == self.field
            and self.field.arrays_equal(self.data, other.data)
        )

    def __hash__(self):
        return hash((self.field.spec, self.data.shape, tuple(map(hash, self.data.reshape(-1)))))

    def rank(self):
        return rank(self.field, self.data)

    def __repr__(self):
        body = "; ".join(", ".join(self.field.format(v) for v in row) for row in self.data)
        return f"ScalarMatrix[{self.field.spec}]({body})"


# --------------------------------------------------------------------------
# raw-array linear algebra


def rref(field: Field, a):
    """Reduced row echelon form of ``a`` (copied) and its pivot columns."""
    a = np.asarray(a)
    if a.ndim != 2:
        raise ValueError("rref needs a 2-d array")
    if field.fast:
        R = np.array(a, dtype=np.int64, order="C", copy=True)
        if R.size == 0:
            return R, []
        return R, _kernels.rref_inplace(R, field.p)
    return _rref_generic(field, np.array(a, dtype=object, copy=True))


def _rref_generic(field, R):
    nr, nc = R.shape
    is_zero = field.is_zero
    r = 0
    pivots = []
    for c in range(nc):
        if r == nr:
            break
        pr = next((i for i in range(r, nr) if not is_zero(R[i, c])), None)
        if pr is None:
            continue
        if pr != r:
            R[[r, pr]] = R[[pr, r]]
        inv = field.inv(R[r, c])
        if not field.is_one(inv):
            R[r, c:] = field.reduce(R[r, c:] * inv)
        for i in range(nr):
            if i != r and not is_zero(R[i, c]):
                R[i, c:] = field.reduce(R[i, c:] - R[i, c] * R[r, c:])
        pivots.append(c)
        r += 1
    return R, pivots


def rank(field: Field, a) -> int:
    a = np.asarray(a)
    if a.size == 0:
        return 0
    return len(rref(field, a)[1])


def row_basis(field: Field, a):
    """Rows of the RREF spanning the row space of ``a``, and their pivots."""
    R, piv = rref(field, a)
    return R[: len(piv)], piv


def nullspace_rows(field: Field, a):
    """Basis of {v : a @ v = 0}, one vector per row, one per free column."""
    a = np.asarray(a)
    nc = a.shape[1]
    if a.shape[0] == 0:
        return field.eye(nc)
    R, piv = rref(field, a)
    free = [c for c in range(nc) if c not in set(piv)]
    out = field.zeros((len(free), nc))
    if not free:
        return out
    out[np.arange(len(free)), free] = field.one
    if piv:
        out[:, piv] = field.reduce(-R[: len(piv)][:, free].T)
    return out


def solve_array(field: Field, a, b):
    """One solution x of a @ x = b (free variables zero), or None.

    ``b`` may be a vector or a matrix of right-hand sides.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    vec = b.ndim == 1
    B = b.reshape(-1, 1) if vec else b
    nr, nc = a.shape
    if nr == 0:
        x = field.zeros((nc, B.shape[1]))
        return x[:, 0] if vec else x
    aug = np.concatenate([np.asarray(a, dtype=field.dtype), np.asarray(B, dtype=field.dtype)], axis=1)
    R, piv = rref(field, aug)
    if piv and piv[-1] >= nc:
        return None
    x = field.zeros((nc, B.shape[1]))
    for i, c in enumerate(piv):
        x[c] = R[i, nc:]
    return x[:, 0] if vec else x


def inverse_array(field: Field, a):
    n = a.shape[0]
    x = solve_array(field, a, field.eye(n))
    if x is None or rank(field, a) < n:
        raise ZeroDivisionError("matrix is singular")
    return x


def det(field: Field, a):
    """Determinant by elimination."""
    M = np.array(a, dtype=field.dtype if field.fast else object, copy=True)
    n = M.shape[0]
    if n == 0:
        return field.one
    out = field.one
    for c in range(n):
        pr = next((i for i in range(c, n) if not field.is_zero(M[i, c])), None)
        if pr is None:
            return field.zero
        if pr != c:
            M[[c, pr]] = M[[pr, c]]
            out = field.neg(out)
        piv = M[c, c]
        out = field.mul(out, piv)
        inv = field.inv(piv)
        for i in range(c + 1, n):
            if not field.is_zero(M[i, c]):
                f = field.mul(M[i, c], inv)
                M[i, c:] = field.reduce(M[i, c:] - f * M[c, c:])
    return out


def reduce_by(field: Field, basis, pivots, v):
    """Residue of ``v`` modulo the RREF row basis ``basis`` (pivots given)."""
    v = np.array(v, dtype=field.dtype, copy=True)
    if not len(pivots):
        return v
    # basis is reduced, so the pivot coordinates of v give the combination
    return field.reduce(v - field.matmul(v[list(pivots)], basis[: len(pivots)]))


def in_span(field: Field, basis, pivots, v) -> bool:
    return field.all_zero(reduce_by(field, basis, pivots, v))


# --------------------------------------------------------------------------
# ScalarMatrix-level operations


def row_echelon(M: ScalarMatrix):
    """Return (R, rank, pivot_cols) with R the reduced row echelon form."""
    R, piv = rref(M.field, M.data)
    return ScalarMatrix(M.field, R), len(piv), list(piv)


def nullspace(M: ScalarMatrix):
    """List of column vectors (tuples of FieldElement) spanning ker M."""
    N = nullspace_rows(M.field, M.data)
    return [tuple(FieldElement(M.field, v) for v in row) for row in N]


def solve(M: ScalarMatrix, b):
    """One solution of M x = b with free variables zero; raise NoSolution."""
    field = M.field
    bb = field.zeros(len(b))
    for i, v in enumerate(b):
        bb[i] = field.coerce(v)
    if len(bb) != M.rows:
        raise ValueError("dimension mismatch")
    x = solve_array(field, M.data, bb)
    if x is None:
        raise NoSolution("system is inconsistent")
    return tuple(FieldElement(field, v) for v in x)
