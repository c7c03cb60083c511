"""Bohr sets, additive energies, additive-quadruple counts and Freiman homomorphism checks on Z/N."""

from __future__ import annotations

import itertools
from math import comb
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .ratmod import as_fraction, fmt, frac, has_denominator


# Bohr sets -----------------------------------------------------------------

@dataclass(frozen=True)
class BohrSet:
    S: tuple[Fraction, ...]
    rho: Fraction
    N: int
    members: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, x: int) -> bool:
        return x % self.N in self.members


def _circle_numerators(S: Sequence[Fraction], N: int) -> np.ndarray:
    """Row i holds N * ||alpha_i x|| for x in [0, N); integers since alpha_i has denominator N."""
    x = np.arange(N, dtype=np.int64)
    rows = []
    for a in S:
        r = (a.numerator * (N // a.denominator) * x) % N
        rows.append(np.minimum(r, N - r))
    return np.array(rows, dtype=np.int64).reshape(len(S), N)


def _bohr_mask(dist: np.ndarray, rho: Fraction, N: int) -> np.ndarray:
    # m / N < rho  <=>  m * den < num * N
    if dist.shape[0] == 0:
        return np.ones(N, dtype=bool)
    return np.all(dist * rho.denominator < rho.numerator * N, axis=0)


def bohr_build(S: Sequence, rho, N: int) -> BohrSet:
    S = tuple(as_fraction(a) for a in S)
    rho = as_fraction(rho)
    for a in S:
        if not has_denominator(a, N):
            raise ValueError(f"frequency {fmt(a)} does not have denominator {N}")
    mask = _bohr_mask(_circle_numerators(S, N), rho, N)
    return BohrSet(S, rho, N, tuple(int(x) for x in np.nonzero(mask)[0]))


class RegularRadiusNotFound(ValueError):
    def __init__(self, best: Fraction, failures: int):
        super().__init__(f"no regular radius on the grid; best candidate {fmt(best)} fails {failures} checks")
        self.best = best
        self.failures = failures


def epsilon_grid(size: int, points: int = 32) -> list[Fraction]:
    """Geometric grid eps_max / 2^j, eps_max = 1/(100 |S|), both signs."""
    top = Fraction(1, 100 * size)
    pos = [top / 2**j for j in range(points)]
    return pos + [-e for e in pos]


def regularity_failures(S: Sequence[Fraction], rho: Fraction, N: int, grid: Sequence[Fraction]) -> int:
    """Number of grid eps violating |B|(1 - 100|S||eps|) <= |B(rho(1+eps))| <= |B|(1 + 100|S||eps|)."""
    dist = _circle_numerators(S, N)
    base = int(_bohr_mask(dist, rho, N).sum())
    c = 100 * len(S)
    bad = 0
    for e in grid:
        size = int(_bohr_mask(dist, rho * (1 + e), N).sum())
        lo = base * (1 - c * abs(e))
        hi = base * (1 + c * abs(e))
        if not lo <= size <= hi:
            bad += 1
    return bad


def find_regular_radius(S: Sequence, rho, N: int, points: int = 32) -> Fraction:
    """rho' in [rho/2, rho] with B(S, rho') regular on the epsilon grid.

    Candidates are rho itself, then the midpoints of the intervals between
    consecutive jumps k/N of the Bohr set size, scanned downward.
    """
    S = tuple(as_fraction(a) for a in S)
    rho = as_fraction(rho)
    if not S:
        return rho
    grid = epsilon_grid(len(S), points)
    cands = [rho]
    lo_k = int(rho / 2 * N)
    hi_k = int(rho * N)
    for k in range(hi_k, lo_k - 1, -1):
        mid = Fraction(2 * k + 1, 2 * N)
        if rho / 2 <= mid <= rho and mid != rho:
            cands.append(mid)
    best, best_bad = rho, None
    for c in cands:
        bad = regularity_failures(S, c, N, grid)
        if bad == 0:
            return c
        if best_bad is None or bad < best_bad:
            best, best_bad = c, bad
    raise RegularRadiusNotFound(best, best_bad)


# energies ------------------------------------------------------------------

def _diff_counts(A, C, N: int) -> np.ndarray:
    """z -> |A intersect (C + z)|, i.e. the number of pairs with a - c = z."""
    out = np.zeros(N, dtype=np.int64)
    for a in set(x % N for x in A):
        for c in set(x % N for x in C):
            out[(a - c) % N] += 1
    return out


def energy(A, B, N: int) -> Fraction:
    """#{(a, a', b, b') : a + b = a' + b'} / N^3."""
    r = _diff_counts(A, B, N)
    return Fraction(int(np.sum(r * r)), N**3)


def energy4(A1, A2, A3, A4, N: int) -> Fraction:
    """(1/N^3) sum_z |A1 cap (A3+z)| |A2 cap (A4+z)|."""
    return Fraction(int(np.sum(_diff_counts(A1, A3, N) * _diff_counts(A2, A4, N))), N**3)


def energy_direct(A, B, N: int) -> Fraction:
    A = sorted(set(x % N for x in A))
    B = sorted(set(x % N for x in B))
    count = 0
    for a, a2 in itertools.product(A, A):
        for b in B:
            if (a + b - a2) % N in B:
                count += 1
    return Fraction(count, N**3)


def cs_energy_holds(A1, A2, A3, A4, N: int) -> bool:
    """E(A1..A4)^4 <= prod E(A_i), compared exactly."""
    lhs = energy4(A1, A2, A3, A4, N) ** 4
    rhs = Fraction(1)
    for A in (A1, A2, A3, A4):
        rhs *= energy(A, A, N)
    return lhs <= rhs


# additive quadruples --------------------------------------------------------

@dataclass
class QuadrupleReport:
    count: int
    total: int
    eta: Fraction
    inner_threshold: float
    bound: Fraction | None = None
    hypothesis_ok: bool | None = None
    threshold_pass: bool | None = None
    worst_h: list[tuple[int, float]] = field(default_factory=list)


def quadruple_correlations(H: Sequence[int], chi: Mapping[int, np.ndarray], N: int):
    """Yield (h1, h2, h3, h4, |E_n chi_h1(n) chi_h2(n+s) conj(chi_h3(n) chi_h4(n+s))|), s = h1 - h4."""
    H = sorted(set(h % N for h in H))
    inH = set(H)
    X = {h: np.asarray(chi[h], dtype=complex) for h in H}
    for h1 in H:
        for h2 in H:
            for h3 in H:
                h4 = (h1 + h2 - h3) % N
                if h4 not in inH:
                    continue
                s = (h1 - h4) % N
                val = np.mean(X[h1] * np.roll(X[h2], -s) * np.conj(X[h3] * np.roll(X[h4], -s)))
                yield h1, h2, h3, h4, float(abs(val))


def hypothesis_check(H, chi, f1, f2, delta, N: int) -> tuple[bool, list[tuple[int, float]]]:
    """Per-h correlations |E_n f1(n) f2(n+h) chi_h(n)| and whether all reach delta."""
    f1 = np.asarray(f1, dtype=complex)
    f2 = np.asarray(f2, dtype=complex)
    vals = []
    for h in sorted(set(x % N for x in H)):
        vals.append((h, float(abs(np.mean(f1 * np.roll(f2, -h) * np.asarray(chi[h]))))))
    ok = all(v >= float(delta) - 1e-12 for _, v in vals)
    return ok, vals


def additive_quadruple_count(H, chi, N: int, delta=None, f1=None, f2=None, inner=None) -> QuadrupleReport:
    """Count additive quadruples in H whose correlation reaches the inner threshold.

    With delta and witnesses f1, f2 supplied, the per-h hypothesis is checked
    and the count compared against eta^8 delta^4 N^3 / 2, eta = |H|/N.
    The default inner threshold is eta^4 delta^2 / 2.
    """
    Hs = sorted(set(h % N for h in H))
    eta = Fraction(len(Hs), N)
    d = None if delta is None else as_fraction(delta)
    if inner is None:
        inner = float(eta**4 * (d if d is not None else 1) ** 2 / 2)
    count = total = 0
    for *_, c in quadruple_correlations(Hs, chi, N):
        total += 1
        if c >= inner - 1e-12:
            count += 1
    rep = QuadrupleReport(count, total, eta, float(inner))
    if d is not None and f1 is not None and f2 is not None:
        ok, vals = hypothesis_check(Hs, chi, f1, f2, d, N)
        rep.hypothesis_ok = ok
        rep.worst_h = sorted(vals, key=lambda t: t[1])[:5]
        rep.bound = eta**8 * d**4 * N**3 / 2
        rep.threshold_pass = ok and count >= rep.bound
    return rep


def planted_linear_family(rng, N: int, density: float = 0.5):
    """chi_h(n) = e(a h n / N + theta_h) on a random H, with witnesses giving correlation one.

    theta_h is a random constant phase, so the family is not literally a
    single character.
    """
    a = rng.randint(1, N - 1)
    H = [h for h in range(N) if rng.random() < density] or [0]
    half = a * pow(2, -1, N) % N
    n = np.arange(N)
    chi = {h: np.exp(2j * np.pi * (((a * h * n) % N) / N + rng.random())) for h in H}
    f1 = np.exp(2j * np.pi * ((half * n * n) % N) / N)
    f2 = np.conj(f1)
    return H, chi, f1, f2


# Freiman homomorphisms --------------------------------------------------------

class EnumerationCapExceeded(ValueError):
    pass


@dataclass
class FreimanResult:
    ok: bool
    witness: tuple[tuple[int, ...], tuple[int, ...]] | None = None


def freiman_check(f: Mapping[int, object], k: int, N: int | None = None, out_mod: Fraction | None = None,
                  cap: int = 2_000_000) -> FreimanResult:
    """Whether sums of k inputs determine sums of the k outputs.

    Inputs are added mod N when N is given; outputs are compared exactly, or
    modulo ``out_mod`` when given.
    """
    A = sorted(f)
    if comb(len(A) + k - 1, k) > cap:
        raise EnumerationCapExceeded(f"{comb(len(A) + k - 1, k)} multisets exceed cap {cap}")
    vals = {x: as_fraction(f[x]) for x in A}
    seen: dict[int, tuple[Fraction, tuple[int, ...]]] = {}
    for tup in itertools.combinations_with_replacement(A, k):
        s = sum(tup)
        if N is not None:
            s %= N
        out = sum((vals[x] for x in tup), Fraction(0))
        if out_mod is not None:
            out %= out_mod
        prev = seen.get(s)
        if prev is None:
            seen[s] = (out, tup)
        elif prev[0] != out:
            return FreimanResult(False, (prev[1], tup))
    return FreimanResult(True)


def fit_bracket_linear(H: Sequence[int], values: Sequence[float], S: Sequence[Fraction]):
    """Least-squares fit of h -> sum_i a_i {alpha_i h} + c over the given frequencies.

    Exploratory only; returns (coefficients, constant, max residual).
    """
    rows = [[float(frac(a * h)) for a in S] + [1.0] for h in H]
    sol, *_ = np.linalg.lstsq(np.array(rows), np.asarray(values, dtype=float), rcond=None)
    resid = np.array(rows) @ sol - np.asarray(values, dtype=float)
    return sol[:-1], float(sol[-1]), float(np.max(np.abs(resid))) if len(H) else 0.0
