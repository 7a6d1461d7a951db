"""Deterministic enumeration orders for coefficient vectors over a field."""

from __future__ import annotations

import itertools


def affine_points(F, n):
    """Every vector of F^n, last coordinate varying fastest."""
    elems = list(F.elements())
    return itertools.product(elems, repeat=n)


def projective_points(F, n):
    """One representative per line of F^n: first nonzero coordinate is 1.

    Ordered by the position of that leading 1, then the tail as an odometer.
    """
    elems = list(F.elements())
    for lead in range(n):
        head = (F.zero,) * lead + (F.one,)
        for tail in itertools.product(elems, repeat=n - lead - 1):
            yield head + tail


def projective_points_by_weight(F, n):
    """Line representatives ordered by support size, then support, then values.

    Coordinate vectors with small support come first, so for instance single
    variables are tried before any combination of two.
    """
    nonzero = [a for a in F.elements() if not F.is_zero(a)]
    for k in range(1, n + 1):
        for support in itertools.combinations(range(n), k):
            for vals in itertools.product(nonzero, repeat=k - 1):
                v = [F.zero] * n
                v[support[0]] = F.one
                for pos, a in zip(support[1:], vals):
                    v[pos] = a
                yield tuple(v)


def integer_points_by_weight(F, n, height):
    """Integer vectors with entries in [-height, height], support-then-height
    order, leading nonzero entry positive (a sweep over an affine chart)."""
    vals = [k for h in range(1, height + 1) for k in (h, -h)]
    for k in range(1, n + 1):
        for support in itertools.combinations(range(n), k):
            for lead in range(1, height + 1):
                for rest in itertools.product(vals, repeat=k - 1):
                    v = [0] * n
                    v[support[0]] = lead
                    for pos, a in zip(support[1:], rest):
                        v[pos] = a
                    yield tuple(F.coerce(a) for a in v)


def count_projective(q, n):
    return (q ** n - 1) // (q - 1)
