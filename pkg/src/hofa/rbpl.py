"""Bracket-linear solver on exact periodic data.

Given a, alpha (denominator N), beta and a set H of h with
||beta + a.{alpha h}|| <= K/N, produce integer vectors w_1..w_r and
eta_1..eta_{d-r}: both families independent, w_i . eta_j = 0, eta_j . alpha
an integer, and |w_i . a| small.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from . import linalg
from .ratmod import as_fraction, dist_circle, fmt, frac, has_denominator, is_prime


class InstanceError(ValueError):
    pass


class VolumeConditionError(ValueError):
    """The tube is too thin for Minkowski's theorem and contains no lattice point."""


class IterationError(RuntimeError):
    """An internal invariant of the iteration failed; never expected."""


def _vec(v: Sequence) -> tuple[Fraction, ...]:
    return tuple(as_fraction(x) for x in v)


@dataclass(frozen=True)
class RBPLInstance:
    N: int
    a: tuple[Fraction, ...]
    alpha: tuple[Fraction, ...]
    beta: Fraction
    K: Fraction
    H: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", _vec(self.a))
        object.__setattr__(self, "alpha", _vec(self.alpha))
        object.__setattr__(self, "beta", as_fraction(self.beta))
        object.__setattr__(self, "K", as_fraction(self.K))
        object.__setattr__(self, "H", tuple(int(h) for h in self.H))
        if len(self.a) != len(self.alpha):
            raise InstanceError("a and alpha must have the same length")
        for x in self.alpha:
            if not has_denominator(x, self.N):
                raise InstanceError(f"alpha entry {x} does not have denominator {self.N}")
        for h in self.H:
            if not 0 <= h < self.N:
                raise InstanceError(f"h = {h} outside [0, {self.N})")
            if dist_circle(self.residual(h)) > self.K / self.N:
                raise InstanceError(f"hypothesis fails at h = {h}")

    @property
    def d(self) -> int:
        return len(self.a)

    @property
    def delta(self) -> Fraction:
        return Fraction(len(self.H), self.N)

    def residual(self, h: int) -> Fraction:
        return self.beta + linalg.dot(self.a, [frac(x * h) for x in self.alpha])


@dataclass
class Certificate:
    """w_bound bounds |w.a|; with mod1 set it bounds ||w.a|| instead."""

    w: list[tuple[int, ...]]
    eta: list[tuple[int, ...]]
    w_bound: Fraction = Fraction(0)
    mod1: bool = False
    trail: list[dict] = field(default_factory=list)

    @property
    def r(self) -> int:
        return len(self.w)

    def max_entry(self) -> int:
        return max((abs(c) for v in self.w + self.eta for c in v), default=0)


@dataclass
class DegenerateReport:
    reason: str
    detail: str = ""


@dataclass
class SolveConfig:
    small_n: int = 3
    max_length_factor: int = 1
    max_iterations: int | None = None


# tube search ---------------------------------------------------------------

def _ball_volume(dim: int, radius: float) -> float:
    return math.pi ** (dim / 2) / math.gamma(dim / 2 + 1) * radius**dim


def minkowski_holds(d: int, width, length) -> bool:
    return _ball_volume(d - 1, float(width)) * 2 * float(length) >= 2**d


def tube_points(a: Sequence, width, length, support: Sequence[int] | None = None) -> list[tuple[int, ...]]:
    """All nonzero integer points within `width` of the line R.a and of norm <= `length`.

    Sorted by norm, then with a positive first nonzero entry first, then
    lexicographically. ``support`` lists the coordinates allowed to be nonzero.
    """
    a = _vec(a)
    width, length = as_fraction(width), as_fraction(length)
    d = len(a)
    if all(x == 0 for x in a):
        raise ValueError("the direction must be nonzero")
    allowed = set(range(d)) if support is None else set(support)
    norm2 = linalg.dot(a, a)
    p = max(range(d), key=lambda i: abs(a[i]))
    out = []
    L = int(math.floor(length))
    for k in range(-L, L + 1):
        # s ranges over parameters with |k - s a_p| <= width
        s_lo = float((k - width) / a[p])
        s_hi = float((k + width) / a[p])
        s_lo, s_hi = min(s_lo, s_hi), max(s_lo, s_hi)
        ranges = []
        for i in range(d):
            if i == p:
                ranges.append([k])
                continue
            if i not in allowed:
                ranges.append([0])
                continue
            ends = (s_lo * float(a[i]), s_hi * float(a[i]))
            lo = math.ceil(min(ends) - float(width) - 1e-9)
            hi = math.floor(max(ends) + float(width) + 1e-9)
            ranges.append(range(lo, hi + 1))
        if p not in allowed and k != 0:
            continue
        for eta in itertools.product(*ranges):
            if not any(eta):
                continue
            n2 = sum(c * c for c in eta)
            if n2 > length * length:
                continue
            proj = linalg.dot(eta, a)
            if n2 - proj * proj / norm2 <= width * width:
                out.append(tuple(eta))
    out.sort(key=_order_key)
    return out


def _order_key(v: tuple[int, ...]):
    first = next((c for c in v if c), 0)
    return (sum(c * c for c in v), first < 0, v)


def tube_vector(a: Sequence, width, length) -> tuple[int, ...] | None:
    """Shortest nonzero integer vector in the tube around R.a; see tube_points."""
    pts = tube_points(a, width, length)
    if pts:
        return pts[0]
    if minkowski_holds(len(a), width, length):
        raise IterationError("Minkowski volume condition holds but the tube is empty")
    raise VolumeConditionError(f"tube of width {fmt(as_fraction(width))} and length {fmt(as_fraction(length))} is empty")


# solver --------------------------------------------------------------------

def _kills(eta: Sequence[int], alpha: Sequence[Fraction]) -> bool:
    return linalg.dot(eta, alpha).denominator == 1


def _measured_K(N: int, beta: Fraction, a: Sequence[Fraction], alpha: Sequence[Fraction], H: Sequence[int]) -> Fraction:
    return max((N * dist_circle(beta + linalg.dot(a, [frac(x * h) for x in alpha])) for h in H), default=Fraction(0))


def solve(inst: RBPLInstance, cfg: SolveConfig | None = None) -> Certificate | DegenerateReport:
    cfg = cfg or SolveConfig()
    N, d = inst.N, inst.d
    if not is_prime(N):
        raise InstanceError(f"N = {N} is not prime")
    if N <= cfg.small_n:
        return DegenerateReport("small-N", f"N = {N} <= {cfg.small_n}")
    if d == 0:
        return Certificate([], [])
    M = max(max(abs(x) for x in inst.a), Fraction(1))
    at = list(inst.a)
    beta = inst.beta
    H = list(inst.H)
    delta = inst.delta if H else Fraction(1, N)
    K = _measured_K(N, beta, at, inst.alpha, H)
    remaining = list(range(d))
    # w[i] for i in remaining; starts as the standard basis
    w = {i: [1 if j == i else 0 for j in range(d)] for i in range(d)}
    etas: list[tuple[int, ...]] = []
    qprod = 1
    trail = []
    limit = d if cfg.max_iterations is None else min(d, cfg.max_iterations)
    while True:
        width = delta / (3**d * M * 2 * d)
        if width ** (4 * d) * max(abs(x) for x in at) <= K / N:
            break
        if len(etas) >= limit:
            raise IterationError(f"no termination after {limit} steps")
        eta = _find_character(at, inst.alpha, width, remaining, N, cfg)
        if eta is None:
            return DegenerateReport("tube-exhausted", f"step {len(etas) + 1}")
        jp = next(i for i in range(d) if eta[i])
        q = eta[jp]
        levels = {h: linalg.dot(eta, [frac(x * h) for x in inst.alpha]) for h in H}
        if any(m.denominator != 1 for m in levels.values()):
            raise IterationError("eta . {alpha h} is not an integer")
        counts = Counter(levels.values())
        if counts:
            best = max(counts.items(), key=lambda kv: (kv[1], -kv[0]))[0]
            H = [h for h in H if levels[h] == best]
        else:
            best = Fraction(0)
        beta = q * beta + at[jp] * best
        at = [q * x - at[jp] * e for x, e in zip(at, eta)]
        assert at[jp] == 0
        remaining.remove(jp)
        wj = w.pop(jp)
        for i in remaining:
            w[i] = [q * x - eta[i] * y for x, y in zip(w[i], wj)]
        etas.append(eta)
        qprod *= q
        for i in remaining:
            if any(linalg.dot(w[i], e) != 0 for e in etas):
                raise IterationError(f"w_{i} is not annihilated after step {len(etas)}")
        delta = delta / 2
        K = _measured_K(N, beta, at, inst.alpha, H)
        trail.append({"step": len(etas), "eta": eta, "q": q, "pivot": jp, "h_count": len(H), "K": K})
    ws = [tuple(int(c) for c in w[i]) for i in remaining]
    amax = max((abs(x) for x in at), default=Fraction(0))
    bound = max((sum(abs(c) for c in v) for v in ws), default=0) * amax / abs(qprod)
    return Certificate(ws, etas, bound, False, trail)


def _find_character(at, alpha, width, support, N, cfg) -> tuple[int, ...] | None:
    direction = linalg.primitive(at)
    cap = N * math.isqrt(sum(c * c for c in direction)) + N
    cap *= cfg.max_length_factor
    length = 1
    while True:
        for eta in tube_points(at, width, length, support):
            if _kills(eta, alpha):
                return eta
        if length >= cap:
            return None
        length = min(2 * length, cap)


# verification --------------------------------------------------------------

@dataclass
class VerifyReport:
    ok: bool
    violations: list[str]
    w_values: list[Fraction]
    eta_values: list[Fraction]


def verify(inst: RBPLInstance, cert: Certificate, w_threshold=None) -> VerifyReport:
    d = inst.d
    bad = []
    for v in cert.w + cert.eta:
        if len(v) != d:
            bad.append(f"vector {v} has length {len(v)} != {d}")
    if bad:
        return VerifyReport(False, bad, [], [])
    if cert.r + len(cert.eta) != d:
        bad.append(f"r + #eta = {cert.r + len(cert.eta)} != d = {d}")
    if cert.w and not linalg.independent(cert.w):
        bad.append("w vectors are dependent")
    if cert.eta and not linalg.independent(cert.eta):
        bad.append("eta vectors are dependent")
    for i, wi in enumerate(cert.w):
        for j, ej in enumerate(cert.eta):
            if linalg.dot(wi, ej) != 0:
                bad.append(f"w_{i} . eta_{j} != 0")
    eta_vals = [dist_circle(linalg.dot(e, inst.alpha)) for e in cert.eta]
    for j, v in enumerate(eta_vals):
        if v != 0:
            bad.append(f"||eta_{j} . alpha|| = {fmt(v)} != 0")
    if cert.mod1:
        w_vals = [dist_circle(linalg.dot(wi, inst.a)) for wi in cert.w]
    else:
        w_vals = [abs(linalg.dot(wi, inst.a)) for wi in cert.w]
    thr = cert.w_bound if w_threshold is None else as_fraction(w_threshold)
    if thr is not None:
        for i, v in enumerate(w_vals):
            if v > thr:
                bad.append(f"|w_{i} . a| = {fmt(v)} > {fmt(thr)}")
    return VerifyReport(not bad, bad, w_vals, eta_vals)


# brute-force oracle ----------------------------------------------------------

def brute_force(inst: RBPLInstance, height_bound: int, threshold=None) -> Certificate | None:
    """Certificate with the fewest eta's among vectors of sup-norm <= height_bound.

    w candidates satisfy |w.a| <= threshold (default K/N).
    """
    d = inst.d
    thr = inst.K / inst.N if threshold is None else as_fraction(threshold)
    box = [v for v in itertools.product(range(-height_bound, height_bound + 1), repeat=d) if any(v)]
    box.sort(key=_order_key)
    w_cands = [v for v in box if abs(linalg.dot(v, inst.a)) <= thr]
    # one eta per direction: the shortest multiple that kills alpha
    eta_cands: dict[tuple[int, ...], tuple[int, ...]] = {}
    for v in box:
        if _kills(v, inst.alpha):
            key = linalg.primitive(v)
            if key[next(i for i in range(d) if key[i])] < 0:
                key = tuple(-c for c in key)
            eta_cands.setdefault(key, v)
    etas = list(eta_cands.values())
    for m in range(d + 1):
        for combo in itertools.combinations(etas, m):
            if m and not linalg.independent(list(combo)):
                continue
            inside = [w for w in w_cands if all(linalg.dot(w, e) == 0 for e in combo)]
            basis = _greedy_basis(inside)
            if len(basis) == d - m:
                return Certificate(basis, list(combo), thr, False)
    return None


def _greedy_basis(vectors: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    out: list[tuple[int, ...]] = []
    for v in vectors:
        if linalg.independent(out + [tuple(v)]):
            out.append(tuple(v))
    return out


# affine extension --------------------------------------------------------------

def extend_affine(cert: Certificate) -> Certificate:
    """Certificate for (a, alpha) from one for ((a, 1), (alpha, beta)).

    The output bounds ||w.a|| mod 1 by the input bound on |w~.(a, 1)|.
    """
    if not cert.w and not cert.eta:
        raise InstanceError("empty certificate")
    D = len((cert.w + cert.eta)[0])
    if D < 1:
        raise InstanceError("dimension must be at least 1")
    if cert.w and not linalg.independent(cert.w) or cert.eta and not linalg.independent(cert.eta):
        raise InstanceError("input families are dependent")
    if any(linalg.dot(u, e) != 0 for u in cert.w for e in cert.eta):
        raise InstanceError("input families are not orthogonal")
    mus = [e[:-1] for e in cert.eta]
    nus = [e[-1] for e in cert.eta]
    us = [u[:-1] for u in cert.w]
    p = next((j for j, nu in enumerate(nus) if nu != 0), None)
    if p is not None:
        new_eta = [
            tuple(nus[j] * x - y * nus[p] for x, y in zip(mus[p], mus[j]))
            for j in range(len(mus)) if j != p
        ]
        new_w = [tuple(u) for u in us]
    else:
        new_eta = [tuple(m) for m in mus]
        new_w = _greedy_basis(us)
    out = Certificate(new_w, new_eta, cert.w_bound, True, list(cert.trail))
    if out.w and not linalg.independent(out.w) or out.eta and not linalg.independent(out.eta):
        raise IterationError("affine extension produced a dependent family")
    if any(linalg.dot(u, e) != 0 for u in out.w for e in out.eta):
        raise IterationError("affine extension broke orthogonality")
    return out


# planted data --------------------------------------------------------------

def planted_instance(rng, d: int, N: int, entry: int = 3, extra: int = 0) -> RBPLInstance:
    """a on the line of a primitive v with v.alpha = 0 mod 1; beta = 0, K = 0.

    ``extra`` further random relations are imposed on alpha. ``rng`` needs
    ``randint(lo, hi)`` and ``choice(seq)``.
    """
    while True:
        v = tuple(rng.randint(-entry, entry) for _ in range(d))
        if any(v) and linalg.primitive(v) == v:
            break
    rows = [list(v)] + [[rng.randint(-entry, entry) for _ in range(d)] for _ in range(extra)]
    basis = linalg.nullspace_mod(rows, N, d)
    coords = [0] * d
    for b in basis:
        c = rng.randint(0, N - 1)
        coords = [(x + c * y) % N for x, y in zip(coords, b)]
    alpha = tuple(frac(Fraction(x, N)) for x in coords)
    c = rng.choice([Fraction(1), Fraction(-1), Fraction(1, 2), Fraction(-1, 2)])
    a = tuple(c * x for x in v)
    H = tuple(h for h in range(N) if frac(linalg.dot(a, [frac(x * h) for x in alpha])) == 0)
    return RBPLInstance(N, a, alpha, Fraction(0), Fraction(0), H)


def random_affine_certificate(rng, d: int, N: int, r: int, branch: str, entry: int = 3):
    """A valid certificate in dimension d+1 for ((a, 1), (alpha, beta)).

    branch "nu" forces an eta with nonzero last entry, "zero" makes all last
    entries zero (which needs r >= 1). Returns the dimension-d instance, the
    certificate and the dimension-(d+1) instance it certifies.
    """
    D = d + 1
    if branch == "zero" and r == 0:
        raise ValueError("the all-zero branch needs r >= 1")
    while True:
        etas = []
        for _ in range(D - r):
            e = [rng.randint(-entry, entry) for _ in range(D)]
            if branch == "zero":
                e[-1] = 0
            etas.append(tuple(e))
        if branch == "nu" and etas and all(e[-1] == 0 for e in etas):
            continue
        if etas and not linalg.independent(etas):
            continue
        break
    ws = linalg.nullspace(etas, D) if etas else [tuple(1 if j == i else 0 for j in range(D)) for i in range(D)]
    basis = linalg.nullspace_mod([list(e) for e in etas], N, D) if etas else [
        [1 if j == i else 0 for j in range(D)] for i in range(D)]
    coords = [0] * D
    for b in basis:
        c = rng.randint(0, N - 1)
        coords = [(x + c * y) % N for x, y in zip(coords, b)]
    alpha_t = tuple(frac(Fraction(x, N)) for x in coords)
    a = tuple(Fraction(rng.randint(-2 * N, 2 * N), 2 * N) for _ in range(d))
    a_t = a + (Fraction(1),)
    bound = max((abs(linalg.dot(u, a_t)) for u in ws), default=Fraction(0))
    cert = Certificate([tuple(u) for u in ws], etas, bound, False)
    inst = RBPLInstance(N, a, alpha_t[:-1], Fraction(0), Fraction(0), ())
    return inst, cert, RBPLInstance(N, a_t, alpha_t, Fraction(0), Fraction(0), ())


# canonical text form ------------------------------------------------------

def instance_to_dict(inst: RBPLInstance) -> dict:
    return {
        "N": inst.N,
        "a": [fmt(x) for x in inst.a],
        "alpha": [fmt(x) for x in inst.alpha],
        "beta": fmt(inst.beta),
        "K": fmt(inst.K),
        "H": list(inst.H),
    }


def instance_from_dict(d: dict) -> RBPLInstance:
    return RBPLInstance(
        int(d["N"]),
        tuple(Fraction(x) for x in d["a"]),
        tuple(Fraction(x) for x in d["alpha"]),
        Fraction(d.get("beta", "0")),
        Fraction(d.get("K", "0")),
        tuple(int(h) for h in d.get("H", [])),
    )


def certificate_to_dict(cert: Certificate) -> dict:
    return {
        "r": cert.r,
        "w": [list(v) for v in cert.w],
        "eta": [list(v) for v in cert.eta],
        "w_bound": None if cert.w_bound is None else fmt(cert.w_bound),
        "mod1": cert.mod1,
    }


def certificate_from_dict(d: dict) -> Certificate:
    bound = d.get("w_bound")
    return Certificate(
        [tuple(int(c) for c in v) for v in d["w"]],
        [tuple(int(c) for c in v) for v in d["eta"]],
        None if bound is None else Fraction(bound),
        bool(d.get("mod1", False)),
    )
