"""The elementary two-step nilmanifold: coordinates (x, y, z) with x, y in Q^d.

The group law is that of (d+2)x(d+2) upper unitriangular matrices with first
row (1, x, z) and last column (z, y, 1)^T; the lattice is the set of points
with all coordinates integral.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Sequence

from . import linalg
from .brackets import BracketExpr, BracketTerm, FracProd, PolyTerm, elementary
from .ratmod import Poly, as_fraction, c_infty_norm, fmt, frac, int_part


def _vec(v: Sequence) -> tuple[Fraction, ...]:
    return tuple(as_fraction(x) for x in v)


@dataclass(frozen=True)
class ElemNilmanifold:
    d: int
    k: int = 1
    Q: int = 1

    def __post_init__(self):
        if self.d < 0:
            raise ValueError("dimension must be nonnegative")

    @property
    def structure_constants(self) -> list[list[int]]:
        """Antisymmetric integer matrix C with omega(u, v) = u^T C v."""
        d = self.d
        c = [[0] * (2 * d) for _ in range(2 * d)]
        for i in range(d):
            c[i][d + i] = 1
            c[d + i][i] = -1
        return c


@dataclass(frozen=True)
class GroupElement:
    x: tuple[Fraction, ...]
    y: tuple[Fraction, ...]
    z: Fraction

    def __post_init__(self):
        object.__setattr__(self, "x", _vec(self.x))
        object.__setattr__(self, "y", _vec(self.y))
        object.__setattr__(self, "z", as_fraction(self.z))
        if len(self.x) != len(self.y):
            raise ValueError("x and y must have equal length")

    @property
    def d(self) -> int:
        return len(self.x)

    @property
    def horizontal(self) -> tuple[Fraction, ...]:
        return self.x + self.y

    @classmethod
    def identity(cls, d: int) -> "GroupElement":
        zero = (Fraction(0),) * d
        return cls(zero, zero, Fraction(0))

    def in_lattice(self) -> bool:
        return all(c.denominator == 1 for c in self.x + self.y + (self.z,))


def mul(g: GroupElement, h: GroupElement) -> GroupElement:
    if g.d != h.d:
        raise ValueError(f"dimension mismatch: {g.d} vs {h.d}")
    return GroupElement(
        tuple(a + b for a, b in zip(g.x, h.x)),
        tuple(a + b for a, b in zip(g.y, h.y)),
        g.z + h.z + linalg.dot(g.x, h.y),
    )


def inv(g: GroupElement) -> GroupElement:
    return GroupElement(
        tuple(-a for a in g.x), tuple(-b for b in g.y), -g.z + linalg.dot(g.x, g.y)
    )


def commutator(g: GroupElement, h: GroupElement) -> GroupElement:
    return mul(mul(g, h), mul(inv(g), inv(h)))


def project_with_lattice(g: GroupElement) -> tuple[GroupElement, GroupElement]:
    """Representative of g.Gamma in the window and the lattice point taking g there."""
    by = tuple(int_part(b) for b in g.y)
    shifted_z = g.z - linalg.dot(g.x, by)
    rep = GroupElement(tuple(frac(a) for a in g.x), tuple(frac(b) for b in g.y), frac(shifted_z))
    gamma = GroupElement(
        tuple(-int_part(a) for a in g.x), tuple(-b for b in by), -int_part(shifted_z)
    )
    return rep, gamma


def project_fundamental(g: GroupElement) -> GroupElement:
    return project_with_lattice(g)[0]


@dataclass(frozen=True)
class PolySeq:
    """n -> (alpha n, beta n, P(n))."""

    alpha: tuple[Fraction, ...]
    beta: tuple[Fraction, ...]
    P: Poly

    def __post_init__(self):
        object.__setattr__(self, "alpha", _vec(self.alpha))
        object.__setattr__(self, "beta", _vec(self.beta))
        if len(self.alpha) != len(self.beta):
            raise ValueError("alpha and beta must have equal length")

    @property
    def d(self) -> int:
        return len(self.alpha)

    @property
    def horizontal(self) -> tuple[Fraction, ...]:
        """Coefficient vector of the horizontal part, n -> (alpha, beta) n."""
        return self.alpha + self.beta

    def at(self, n: int) -> GroupElement:
        return GroupElement(
            tuple(a * n for a in self.alpha), tuple(b * n for b in self.beta), self.P(n)
        )

    def phase_expr(self, M: ElemNilmanifold | None = None) -> BracketExpr:
        k = 1 if M is None else M.k
        e = elementary(self.alpha, self.beta, self.P)
        if k == 1:
            return e
        return BracketExpr(tuple(_scale_term(t, k) for t in e.terms))


def _scale_term(t: BracketTerm, k: int) -> BracketTerm:
    if isinstance(t, PolyTerm):
        return PolyTerm(t.poly.scale(k))
    return replace(t, a=t.a * k)


def check_degree(g: PolySeq, max_degree: int = 2) -> None:
    if g.P.degree > max_degree:
        raise ValueError(f"vertical polynomial has degree {g.P.degree} > {max_degree}")


def nil_phase(M: ElemNilmanifold, g: PolySeq, n: int) -> Fraction:
    """Exact phase of F(g(n) Gamma) in (-1/2, 1/2], F(x, y, z) = e(k(-x.[y] + z))."""
    rep = project_fundamental(g.at(n))
    inner = -sum((a * int_part(b) for a, b in zip(rep.x, rep.y)), Fraction(0)) + rep.z
    return frac(M.k * inner)


def eval_nilsequence(M: ElemNilmanifold, g: PolySeq, n: int) -> complex:
    theta = nil_phase(M, g, n)
    return cmath.exp(2j * math.pi * float(theta))


def omega(M: ElemNilmanifold | None, u1: Sequence, u2: Sequence) -> Fraction:
    """x.w - y.z for u1 = (x, y), u2 = (z, w)."""
    if len(u1) != len(u2) or len(u1) % 2:
        raise ValueError("omega needs two tuples of the same even length")
    d = len(u1) // 2
    if M is not None and M.d != d:
        raise ValueError(f"tuples of length {len(u1)} do not match d = {M.d}")
    u1, u2 = _vec(u1), _vec(u2)
    return linalg.dot(u1[:d], u2[d:]) - linalg.dot(u1[d:], u2[:d])


class FactorizationError(ValueError):
    def __init__(self, eta, value):
        super().__init__(f"character {list(eta)} has smoothness norm {fmt(value)} != 0")
        self.eta = eta
        self.value = value


def factorize_I(g: PolySeq, etas: Sequence[Sequence[int]], N: int):
    """Split g = eps * g1 * gamma with g1 horizontally inside the common kernel of etas.

    Returns (eps, g1, gamma, q): eps is the constant g(0), gamma has no
    vertical part and denominators dividing q.
    """
    v = g.horizontal
    etas = [tuple(int(c) for c in e) for e in etas]
    for e in etas:
        norm = c_infty_norm(Poly.of(0, linalg.dot(e, v)), N)
        if norm != 0:
            raise FactorizationError(e, norm)
    if etas and not linalg.independent(etas):
        raise ValueError("characters must be linearly independent")
    if etas:
        gram = [[linalg.dot(a, b) for b in etas] for a in etas]
        rhs = [linalg.dot(e, v) for e in etas]
        t = linalg.solve(gram, rhs)
        c = tuple(sum((t[j] * etas[j][i] for j in range(len(etas))), Fraction(0)) for i in range(len(v)))
    else:
        c = (Fraction(0),) * len(v)
    d = g.d
    cx, cy = c[:d], c[d:]
    a1 = tuple(a - b for a, b in zip(g.alpha, cx))
    b1 = tuple(a - b for a, b in zip(g.beta, cy))
    p0 = g.P(0)
    P1 = g.P - Poly.of(p0) - Poly.of(0, 0, linalg.dot(a1, cy))
    eps = GroupElement((Fraction(0),) * d, (Fraction(0),) * d, p0)
    g1 = PolySeq(a1, b1, P1)
    gamma = PolySeq(cx, cy, Poly())
    q = 1
    for x in c:
        q = math.lcm(q, x.denominator)
    return eps, g1, gamma, q


def change_basis(M: ElemNilmanifold, g: PolySeq, A: Sequence[Sequence[int]]):
    """Rewrite the phase of g(2n) in the basis given by the invertible integer matrix A.

    With alpha = A^T alpha~ and beta~ = A beta the returned sequence g' is
    (2 alpha~, 2 beta~, P(2n)) and
        phase(g(2n)) = phase(g'(n)) + sum(lower)(n)   (mod 1),
    every lower term being a catalogued {.n}{.n} product.
    """
    d = g.d
    A = [[int(x) for x in row] for row in A]
    if len(A) != d or any(len(r) != d for r in A):
        raise ValueError("A must be d x d")
    if linalg.det(A) == 0:
        raise ValueError("A is singular")
    at = [[A[j][i] for j in range(d)] for i in range(d)]
    alpha_t = linalg.solve(at, list(g.alpha)) if d else []
    beta_t = [sum((A[i][j] * g.beta[j] for j in range(d)), Fraction(0)) for i in range(d)]
    g2 = PolySeq(tuple(2 * a for a in alpha_t), tuple(2 * b for b in beta_t), g.P.compose_linear(2))
    acc: dict[tuple[Fraction, Fraction], Fraction] = {}
    for i in range(d):
        key = (2 * alpha_t[i], 2 * beta_t[i])
        acc[key] = acc.get(key, Fraction(0)) - M.k
        for j in range(d):
            key = (2 * alpha_t[i], 2 * g.beta[j])
            acc[key] = acc.get(key, Fraction(0)) + M.k * A[i][j]
    lower = [FracProd(c, a, b) for (a, b), c in acc.items() if c != 0 and a != 0 and b != 0]
    return ElemNilmanifold(d, M.k, M.Q), g2, lower


# canonical text form ------------------------------------------------------

def seq_to_dict(g: PolySeq) -> dict:
    return {
        "alpha": [fmt(a) for a in g.alpha],
        "beta": [fmt(b) for b in g.beta],
        "P": [fmt(c) for c in g.P.coeffs],
    }


def seq_from_dict(d: dict) -> PolySeq:
    return PolySeq(
        tuple(Fraction(a) for a in d["alpha"]),
        tuple(Fraction(b) for b in d["beta"]),
        Poly(tuple(Fraction(c) for c in d["P"])),
    )


def manifold_to_dict(M: ElemNilmanifold) -> dict:
    return {"d": M.d, "k": M.k, "Q": M.Q}


def manifold_from_dict(d: dict) -> ElemNilmanifold:
    return ElemNilmanifold(int(d["d"]), int(d.get("k", 1)), int(d.get("Q", 1)))
