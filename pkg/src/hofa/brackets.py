"""Bracket polynomials: exact evaluation mod 1, van der Corput differencing,
and the symmetric trilinear form used in the integration step."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .ratmod import Poly, as_fraction, fmt, frac, has_denominator, int_part


class StructuralError(ValueError):
    """A term outside the fixed lower-order catalogue."""


@dataclass(frozen=True)
class PolyTerm:
    poly: Poly

    def value(self, n: int) -> Fraction:
        return self.poly(n)


@dataclass(frozen=True)
class NBracket:
    """a * (alpha n) * [beta n]."""

    a: Fraction
    alpha: Fraction
    beta: Fraction

    def value(self, n: int) -> Fraction:
        return self.a * self.alpha * n * int_part(self.beta * n)


@dataclass(frozen=True)
class FracProd:
    """a * {alpha x + c1} * {beta y + c2}, where x and y are n or the fixed shift h.

    ``left``/``right`` record which variable each factor depends on; the
    offsets are zero except for the shifted arguments produced by differencing.
    """

    a: Fraction
    alpha: Fraction
    beta: Fraction
    left: str = "n"
    right: str = "n"
    h: int = 0
    c1: Fraction = Fraction(0)
    c2: Fraction = Fraction(0)

    def _arg(self, freq: Fraction, var: str, off: Fraction, n: int) -> Fraction:
        x = n if var == "n" else self.h
        return frac(freq * x + off)

    def value(self, n: int) -> Fraction:
        return (
            self.a
            * self._arg(self.alpha, self.left, self.c1, n)
            * self._arg(self.beta, self.right, self.c2, n)
        )

    @property
    def kind(self) -> str:
        return self.left + self.right


@dataclass(frozen=True)
class FracLin:
    """a * {alpha n}."""

    a: Fraction
    alpha: Fraction

    def value(self, n: int) -> Fraction:
        return self.a * frac(self.alpha * n)


@dataclass(frozen=True)
class Deg3:
    """Degree-three bracket monomials.

    variant "nff": a * (alpha n) * {beta n} * {gamma n}
    variant "nnf": a * (alpha n) * n * {beta n}
    """

    a: Fraction
    alpha: Fraction
    beta: Fraction
    gamma: Fraction = Fraction(0)
    variant: str = "nff"

    def value(self, n: int) -> Fraction:
        if self.variant == "nff":
            return self.a * self.alpha * n * frac(self.beta * n) * frac(self.gamma * n)
        if self.variant == "nnf":
            return self.a * self.alpha * n * n * frac(self.beta * n)
        raise StructuralError(f"unknown degree-3 variant {self.variant!r}")


BracketTerm = Union[PolyTerm, NBracket, FracProd, FracLin, Deg3]


def _phases(t: BracketTerm) -> list[Fraction]:
    if isinstance(t, PolyTerm):
        return []
    if isinstance(t, NBracket):
        return [t.alpha, t.beta]
    if isinstance(t, FracProd):
        return [t.alpha, t.beta]
    if isinstance(t, FracLin):
        return [t.alpha]
    return [t.alpha, t.beta, t.gamma]


@dataclass(frozen=True)
class BracketExpr:
    terms: tuple[BracketTerm, ...] = ()
    modulus: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.modulus is not None:
            for t in self.terms:
                for ph in _phases(t):
                    if not has_denominator(ph, self.modulus):
                        raise ValueError(f"phase {fmt(ph)} does not have denominator {self.modulus}")

    def __add__(self, other: "BracketExpr") -> "BracketExpr":
        mod = self.modulus if self.modulus == other.modulus else None
        return BracketExpr(self.terms + other.terms, mod)

    def value(self, n: int) -> Fraction:
        return sum((t.value(n) for t in self.terms), Fraction(0))


def eval_mod1(e: BracketExpr, n: int) -> Fraction:
    """Exact value of the phase at n, reduced into (-1/2, 1/2]."""
    return frac(e.value(n))


def elementary(alpha: Sequence, beta: Sequence, P: Poly, modulus: int | None = None) -> BracketExpr:
    """Phase P(n) - sum_i alpha_i n [beta_i n] of the elementary quadratic."""
    if len(alpha) != len(beta):
        raise ValueError("alpha and beta must have equal length")
    terms: list[BracketTerm] = [PolyTerm(P)]
    terms += [NBracket(Fraction(-1), as_fraction(a), as_fraction(b)) for a, b in zip(alpha, beta)]
    return BracketExpr(tuple(terms), modulus)


def is_periodic_phase(e: BracketExpr, N: int) -> bool:
    return all(eval_mod1(e, n + N) == eval_mod1(e, n) for n in range(N))


def periodic_quadratic_base(alpha: Sequence, beta: Sequence, N: int) -> Fraction:
    """Base value of the quadratic coefficient making the elementary phase N-periodic.

    For alpha_i = A_i/N and beta_i = B_i/N the phase is periodic exactly when
    the quadratic coefficient lies in  sum(A_i B_i)/(2 N^2) + (1/(2N)) Z  and the
    linear coefficient then satisfies a matching condition (see ``periodic_linear_base``).
    """
    s = sum(as_fraction(a) * N * as_fraction(b) * N for a, b in zip(alpha, beta))
    return Fraction(s, 2 * N * N)


def periodic_linear_base(quad: Fraction, N: int) -> Fraction:
    """Linear coefficient b with quad*N^2 + b*N integral, the smallest nonnegative one."""
    return frac(-quad * N * N) % 1 / N


def denominator_flags(alpha: Sequence, beta: Sequence, P: Poly, N: int) -> dict[str, bool]:
    """Which denominator conclusions hold for an elementary quadratic."""
    return {
        "alpha_beta_denominator_N": all(has_denominator(x, N) for x in list(alpha) + list(beta)),
        "quadratic_denominator_2N": has_denominator(P.coeff(2), 2 * N),
        "quadratic_denominator_2N2": has_denominator(P.coeff(2), 2 * N * N),
    }


def vdc_expand(alpha, beta, h: int) -> tuple[BracketExpr, list[BracketTerm]]:
    """Split alpha(n+h)[beta(n+h)] - alpha n[beta n] into a linear top part and lower terms.

    With X = alpha n, Y = beta n, s = alpha h, t = beta h one has exactly mod 1

        (X+s)[Y+t] - X[Y] = X[t] + {s} Y
                            + {X}{Y} + {X}{t} - {X}{Y+t} - {s}{Y+t} + {s} t.

    The first line is linear in n: alpha beta h n minus the pairing of
    (alpha n, beta n) with ({alpha h}, {beta h}). The second is the lower part.
    """
    alpha, beta = as_fraction(alpha), as_fraction(beta)
    if h == 0:
        return BracketExpr(), []
    s_frac = frac(alpha * h)
    t = beta * h
    top_coeff = alpha * int_part(t) + s_frac * beta
    top = BracketExpr((PolyTerm(Poly.of(0, top_coeff)),)) if top_coeff else BracketExpr()
    one = Fraction(1)
    cand: list[BracketTerm] = [
        FracProd(one, alpha, beta),
        FracProd(one, alpha, beta, "n", "h", h),
        FracProd(-one, alpha, beta, "n", "n", h, Fraction(0), t),
        FracProd(-one, alpha, beta, "h", "n", h, Fraction(0), t),
        PolyTerm(Poly.of(s_frac * t)),
    ]
    lower = [x for x in cand if not _vanishes(x, h)]
    check_catalogue(lower)
    return top, lower


def _vanishes(t: BracketTerm, h: int) -> bool:
    if isinstance(t, PolyTerm):
        return not t.poly.coeffs
    if isinstance(t, FracProd):
        if t.a == 0:
            return True
        for freq, var, off in ((t.alpha, t.left, t.c1), (t.beta, t.right, t.c2)):
            if var == "h" and frac(freq * h + off) == 0:
                return True
            if var == "n" and freq == 0 and frac(off) == 0:
                return True
    return False


LOWER_KINDS = {"nn", "hn", "nh", "hh"}


def check_catalogue(terms: Iterable[BracketTerm]) -> None:
    """Raise StructuralError unless every term is a catalogued lower-order term."""
    for t in terms:
        if isinstance(t, PolyTerm):
            if t.poly.degree > 1:
                raise StructuralError("polynomial lower term of degree > 1")
        elif isinstance(t, FracProd):
            if t.kind not in LOWER_KINDS:
                raise StructuralError(f"fraction product of kind {t.kind!r}")
        elif isinstance(t, FracLin):
            continue
        else:
            raise StructuralError(f"{type(t).__name__} is not a lower-order term")


def reflection_residual(alpha, beta, n: int) -> Fraction:
    """alpha n[beta n] - beta n[alpha n] - (alpha beta n^2 + 2 alpha n[beta n]) mod 1."""
    x, y = as_fraction(alpha) * n, as_fraction(beta) * n
    return frac(x * int_part(y) - y * int_part(x) - (x * y + 2 * x * int_part(y)))


def symmetric_residual(alpha, beta, n: int) -> Fraction:
    """X[Y] + Y[X] - (XY - {X}{Y}) mod 1 for X = alpha n, Y = beta n; always 0."""
    x, y = as_fraction(alpha) * n, as_fraction(beta) * n
    return frac(x * int_part(y) + y * int_part(x) - x * y + frac(x) * frac(y))


def reduce_coefficients(alpha, beta, n: int) -> Fraction:
    """alpha n[beta n] - ({alpha} n[{beta} n] + {alpha}[beta] n^2) mod 1; always 0."""
    a, b = as_fraction(alpha), as_fraction(beta)
    lhs = a * n * int_part(b * n)
    rhs = frac(a) * n * int_part(frac(b) * n) + frac(a) * int_part(b) * n * n
    return frac(lhs - rhs)


@dataclass(frozen=True)
class TrilinearT:
    """sum_j {a_j x} (b_j/6) (y {g_j z} + z {g_j y}) + sum_j (a'_j/3) {b'_j x} y z."""

    alpha: tuple[Fraction, ...]
    beta: tuple[Fraction, ...]
    gamma: tuple[Fraction, ...]
    alpha2: tuple[Fraction, ...] = field(default=())
    beta2: tuple[Fraction, ...] = field(default=())

    @property
    def d(self) -> int:
        return len(self.alpha)


def eval_T(t: TrilinearT, x: int, y: int, z: int) -> Fraction:
    def raw(y: int, z: int) -> Fraction:
        acc = Fraction(0)
        for a, b, g in zip(t.alpha, t.beta, t.gamma):
            acc += frac(a * x) * b / 6 * (y * frac(g * z) + z * frac(g * y))
        for a2, b2 in zip(t.alpha2, t.beta2):
            acc += a2 / 3 * frac(b2 * x) * y * z
        return acc

    v = frac(raw(y, z))
    assert v == frac(raw(z, y))
    return v


@dataclass
class TrilinearWitness:
    slot: int
    args: tuple[int, ...]


def local_trilinearity_check(
    t: TrilinearT, B: Sequence[int], N: int, max_triples: int = 20000, rng=None
) -> tuple[bool, TrilinearWitness | None]:
    """Additivity of T in each slot over pairs inside the Bohr set B of Z/N.

    Members are used as signed representatives. Exhaustive when the number
    of (pair, other, other) combinations is at most ``max_triples``; otherwise
    ``rng`` supplies that many random samples.
    """
    members = sorted({((b + N // 2) % N) - N // 2 for b in B})
    inset = {b % N for b in members}
    pairs = [(u, v) for u in members for v in members if (u + v) % N in inset]
    total = len(pairs) * len(members) ** 2
    if total <= max_triples:
        cases = ((u, v, p, q) for (u, v) in pairs for p in members for q in members)
    else:
        if rng is None:
            raise ValueError("sampling needs an rng")
        cases = (
            (*rng.choice(pairs), rng.choice(members), rng.choice(members))
            for _ in range(max_triples)
        )
    for u, v, p, q in cases:
        w = u + v
        if eval_T(t, w, p, q) != frac(eval_T(t, u, p, q) + eval_T(t, v, p, q)):
            return False, TrilinearWitness(0, (u, v, p, q))
        if eval_T(t, p, w, q) != frac(eval_T(t, p, u, q) + eval_T(t, p, v, q)):
            return False, TrilinearWitness(1, (p, u, v, q))
        if eval_T(t, p, q, w) != frac(eval_T(t, p, q, u) + eval_T(t, p, q, v)):
            return False, TrilinearWitness(2, (p, q, u, v))
    return True, None


# canonical text form ------------------------------------------------------

def term_to_dict(t: BracketTerm) -> dict:
    if isinstance(t, PolyTerm):
        return {"kind": "poly", "coeffs": [fmt(c) for c in t.poly.coeffs]}
    if isinstance(t, NBracket):
        return {"kind": "nbracket", "a": fmt(t.a), "alpha": fmt(t.alpha), "beta": fmt(t.beta)}
    if isinstance(t, FracProd):
        return {
            "kind": "fracprod", "a": fmt(t.a), "alpha": fmt(t.alpha), "beta": fmt(t.beta),
            "left": t.left, "right": t.right, "h": t.h, "c1": fmt(t.c1), "c2": fmt(t.c2),
        }
    if isinstance(t, FracLin):
        return {"kind": "fraclin", "a": fmt(t.a), "alpha": fmt(t.alpha)}
    return {
        "kind": "deg3", "a": fmt(t.a), "alpha": fmt(t.alpha), "beta": fmt(t.beta),
        "gamma": fmt(t.gamma), "variant": t.variant,
    }


def term_from_dict(d: dict) -> BracketTerm:
    F = Fraction
    k = d["kind"]
    if k == "poly":
        return PolyTerm(Poly(tuple(F(c) for c in d["coeffs"])))
    if k == "nbracket":
        return NBracket(F(d["a"]), F(d["alpha"]), F(d["beta"]))
    if k == "fracprod":
        return FracProd(F(d["a"]), F(d["alpha"]), F(d["beta"]), d["left"], d["right"],
                        int(d["h"]), F(d["c1"]), F(d["c2"]))
    if k == "fraclin":
        return FracLin(F(d["a"]), F(d["alpha"]))
    if k == "deg3":
        return Deg3(F(d["a"]), F(d["alpha"]), F(d["beta"]), F(d["gamma"]), d["variant"])
    raise StructuralError(f"unknown term kind {k!r}")


def expr_to_dict(e: BracketExpr) -> dict:
    return {"modulus": e.modulus, "terms": [term_to_dict(t) for t in e.terms]}


def expr_from_dict(d: dict) -> BracketExpr:
    return BracketExpr(tuple(term_from_dict(t) for t in d["terms"]), d.get("modulus"))
