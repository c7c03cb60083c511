"""Exact linear algebra over Q and over Z/pZ on small integer/rational matrices."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

Matrix = list[list[Fraction]]


def _to_fractions(rows: Sequence[Sequence]) -> Matrix:
    return [[Fraction(x) for x in row] for row in rows]


def rref(rows: Sequence[Sequence]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns."""
    m = _to_fractions(rows)
    if not m:
        return [], []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1]) if rows else 0


def independent(rows: Sequence[Sequence]) -> bool:
    return rank(rows) == len(rows)


def primitive(v: Sequence) -> tuple[int, ...]:
    """Scale a rational vector to the primitive integer vector on its ray."""
    fs = [Fraction(x) for x in v]
    den = 1
    for x in fs:
        den = math.lcm(den, x.denominator)
    ints = [int(x * den) for x in fs]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    if g == 0:
        return tuple(ints)
    return tuple(x // g for x in ints)


def nullspace(rows: Sequence[Sequence], ncols: int | None = None) -> list[tuple[int, ...]]:
    """Integer basis (primitive vectors) of {x : rows . x = 0} over Q."""
    if not rows:
        if ncols is None:
            raise ValueError("ncols needed for an empty matrix")
        return [tuple(1 if j == i else 0 for j in range(ncols)) for i in range(ncols)]
    ncols = len(rows[0])
    m, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, p in enumerate(pivots):
            v[p] = -m[r][f]
        basis.append(primitive(v))
    return basis


def same_span(a: Sequence[Sequence], b: Sequence[Sequence], dim: int) -> bool:
    """Whether two families span the same Q-subspace of Q^dim."""
    ra, rb = rank(a) if a else 0, rank(b) if b else 0
    if ra != rb:
        return False
    if ra == 0:
        return True
    return rank(list(a) + list(b)) == ra


def solve(a: Sequence[Sequence], b: Sequence) -> list[Fraction]:
    """Solve the square system a x = b exactly by Cramer's rule."""
    n = len(a)
    base = det(a)
    if base == 0:
        raise ValueError("singular system")
    out = []
    for j in range(n):
        aj = [list(row) for row in a]
        for i in range(n):
            aj[i][j] = b[i]
        out.append(det(aj) / base)
    return out


def det(a: Sequence[Sequence]) -> Fraction:
    m = _to_fractions(a)
    n = len(m)
    out = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            out = -out
        out *= m[c][c]
        for i in range(c + 1, n):
            f = m[i][c] / m[c][c]
            if f:
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return out


def nullspace_mod(rows: Sequence[Sequence[int]], p: int, ncols: int) -> list[list[int]]:
    """Basis of {x in (Z/p)^ncols : rows . x = 0 mod p}, p prime."""
    m = [[x % p for x in row] for row in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = pow(m[r][c], -1, p)
        m[r] = [x * inv % p for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [(x - f * y) % p for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    basis = []
    for f in (c for c in range(ncols) if c not in pivots):
        v = [0] * ncols
        v[f] = 1
        for i, pc in enumerate(pivots):
            v[pc] = -m[i][f] % p
        basis.append(v)
    return basis


def dot(u: Sequence, v: Sequence):
    if len(u) != len(v):
        raise ValueError("length mismatch")
    return sum((a * b for a, b in zip(u, v)), Fraction(0))
