"""Exact rationals modulo one.

The signed window (-1/2, 1/2] is used everywhere in the package. ``frac``
maps into it, ``int_part`` is the matching integer part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

Rational = Union[Fraction, int]

HALF = Fraction(1, 2)


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions and "p/q" strings. Floats are refused."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


def frac(x: Rational) -> Fraction:
    """Signed fractional part, the representative of x mod 1 in (-1/2, 1/2]."""
    x = as_fraction(x)
    r = x - math.floor(x)
    if r > HALF:
        r -= 1
    return r


def int_part(x: Rational) -> int:
    """x - frac(x); always an integer."""
    x = as_fraction(x)
    k = x - frac(x)
    assert k.denominator == 1
    return k.numerator


def frac_unsigned(x: Rational) -> Fraction:
    # provided for callers that want [0, 1); nothing in the package uses it
    x = as_fraction(x)
    return x - math.floor(x)


def dist_circle(x: Rational) -> Fraction:
    return abs(frac(x))


def mod1_equal(x: Rational, y: Rational) -> bool:
    return frac(as_fraction(x) - as_fraction(y)) == 0


def lcm_denominator(values: Iterable[Rational]) -> int:
    q = 1
    for v in values:
        q = math.lcm(q, as_fraction(v).denominator)
    return q


def has_denominator(x: Rational, q: int) -> bool:
    """True when x lies in (1/q)Z."""
    return q % as_fraction(x).denominator == 0


@dataclass(frozen=True)
class Poly:
    """Polynomial in the monomial basis; ``coeffs[i]`` multiplies n**i."""

    coeffs: tuple[Fraction, ...] = ()

    def __post_init__(self):
        cs = [as_fraction(c) for c in self.coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def of(cls, *coeffs: Rational) -> "Poly":
        return cls(tuple(as_fraction(c) for c in coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, i: int) -> Fraction:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    def __call__(self, n: Rational) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * n + c
        return acc

    def __add__(self, other: "Poly") -> "Poly":
        m = max(len(self.coeffs), len(other.coeffs))
        return Poly(tuple(self.coeff(i) + other.coeff(i) for i in range(m)))

    def __neg__(self) -> "Poly":
        return Poly(tuple(-c for c in self.coeffs))

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def scale(self, k: Rational) -> "Poly":
        return Poly(tuple(c * k for c in self.coeffs))

    def compose_linear(self, a: Rational, b: Rational = 0) -> "Poly":
        """The polynomial n -> p(a*n + b)."""
        a, b = as_fraction(a), as_fraction(b)
        out = Poly()
        power = Poly.of(1)
        lin = Poly.of(b, a)
        for c in self.coeffs:
            out = out + power.scale(c)
            power = power * lin
        return out

    def __mul__(self, other: "Poly") -> "Poly":
        if not self.coeffs or not other.coeffs:
            return Poly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(tuple(out))


def c_infty_norm(p: Poly, N: int) -> Fraction:
    """sup over i >= 1 of N**i * ||coeff_i||, in the monomial basis."""
    if N < 1:
        raise ValueError("N must be positive")
    best = Fraction(0)
    for i in range(1, len(p.coeffs)):
        best = max(best, N**i * dist_circle(p.coeffs[i]))
    return best


def binomial_to_monomial(b: Sequence[Rational]) -> Poly:
    """Convert sum b_i * C(n, i) into monomial coefficients."""
    out = Poly()
    for i, c in enumerate(b):
        # C(n, i) = n(n-1)...(n-i+1) / i!
        term = Poly.of(1)
        for j in range(i):
            term = term * Poly.of(-j, 1)
        out = out + term.scale(Fraction(as_fraction(c), math.factorial(i)))
    return out


def monomial_to_binomial(p: Poly) -> tuple[Fraction, ...]:
    """Inverse of binomial_to_monomial, by forward differences at 0."""
    k = len(p.coeffs)
    vals = [p(n) for n in range(k)]
    out = []
    for _ in range(k):
        out.append(vals[0])
        vals = [vals[i + 1] - vals[i] for i in range(len(vals) - 1)]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def fmt(x: Rational) -> str:
    """Canonical text for an exact rational: "p/q", or "p" when q == 1."""
    x = as_fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True
