"""Equidistribution dichotomy for periodic elementary bracket quadratics.

run_dichotomy turns a large mean |E_n F(g(n) Gamma)| into integer vectors
w_i, eta_j with eta_j . v and omega(w_i, v) integral, v the horizontal
coefficient vector of g. The steps: van der Corput over h, isolation of the
term linear in n, an affine fit giving a hypothesis for the bracket-linear
solver, the solver itself, its affine extension and an isotropic refinement.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import linalg, rbpl
from .brackets import is_periodic_phase, periodic_linear_base, periodic_quadratic_base, reduce_coefficients, vdc_expand, eval_mod1
from .nilmani import ElemNilmanifold, PolySeq, nil_phase, omega
from .ratmod import Poly, c_infty_norm, fmt, frac, has_denominator, is_prime


class PeriodicityError(ValueError):
    pass


class HypothesisError(ValueError):
    """The mean correlation is below the requested delta."""


@dataclass
class DichotomyConfig:
    small_n: int = 100
    vdc_checks: int = 8
    solver: rbpl.SolveConfig = field(default_factory=rbpl.SolveConfig)


@dataclass
class DichotomyResult:
    branch: str
    w: list[tuple[int, ...]] = field(default_factory=list)
    eta: list[tuple[int, ...]] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    per_h: list[tuple[int, float, bool]] = field(default_factory=list)

    @property
    def r(self) -> int:
        return len(self.w)


def exact_phases(M: ElemNilmanifold, g: PolySeq, N: int) -> list[Fraction]:
    return [nil_phase(M, g, n) for n in range(N)]


def _check_periodic(M: ElemNilmanifold, g: PolySeq, N: int) -> None:
    if not all(has_denominator(x, N) for x in g.horizontal):
        raise PeriodicityError(f"horizontal coefficients do not have denominator {N}")
    if not is_periodic_phase(g.phase_expr(M), N):
        raise PeriodicityError(f"phase is not {N}-periodic")


def mean_correlation(M: ElemNilmanifold, g: PolySeq, N: int) -> float:
    _check_periodic(M, g, N)
    ph = np.array([float(x) for x in exact_phases(M, g, N)])
    return float(abs(np.mean(np.exp(2j * np.pi * ph))))


def symplectic_dual(v: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """The vector a with a . y = omega(v, y)."""
    d = len(v) // 2
    return tuple(-x for x in v[d:]) + tuple(v[:d])


def _fit_affine(t: dict[int, Fraction], N: int) -> tuple[Fraction, Fraction, list[int]]:
    """(b, c) in (1/N)Z^2 maximising #{h : b + c h + t_h = 0 mod 1}; ties to the smallest (c, b)."""
    hs = np.array(sorted(t), dtype=np.int64)
    T = np.array([(x.numerator * (N // x.denominator)) % N for x in (t[h] for h in hs.tolist())], dtype=np.int64)
    best = (-1, 0, 0)
    for c in range(N):
        res = (-T - c * hs) % N
        counts = np.bincount(res, minlength=N)
        b = int(np.argmax(counts))
        if counts[b] > best[0]:
            best = (int(counts[b]), c, b)
    _, c, b = best
    chosen = [int(h) for h, x in zip(hs, T) if (b + c * h + x) % N == 0]
    return frac(Fraction(b, N)), frac(Fraction(c, N)), chosen


def _vdc_guard(v: Sequence[Fraction], hs: Sequence[int], N: int) -> None:
    d = len(v) // 2
    for h in hs:
        for i in range(d):
            al, be = v[i], v[d + i]
            top, lower = vdc_expand(al, be, h)
            for n in range(N):
                lhs = (al * (n + h)) * _ip(be * (n + h)) - (al * n) * _ip(be * n)
                rhs = top.value(n) + sum((t.value(n) if hasattr(t, "value") else 0 for t in lower), Fraction(0))
                if frac(lhs - rhs) != 0:
                    raise RuntimeError(f"difference identity fails at h={h}, n={n}")


def _ip(x: Fraction) -> Fraction:
    return x - frac(x)


def run_dichotomy(M: ElemNilmanifold, g: PolySeq, N: int, delta: float, cfg: DichotomyConfig | None = None) -> DichotomyResult:
    cfg = cfg or DichotomyConfig()
    if not is_prime(N):
        raise ValueError(f"N = {N} is not prime")
    _check_periodic(M, g, N)
    if N <= cfg.small_n:
        return DichotomyResult("SmallN", diagnostics={"N": N, "cutoff": cfg.small_n})
    ph = np.array([float(x) for x in exact_phases(M, g, N)])
    f = np.exp(2j * np.pi * ph)
    mean = float(abs(f.mean()))
    if mean < delta:
        raise HypothesisError(f"mean correlation {mean:.6g} < delta = {delta}")

    # fractional-part window; certificates are unaffected by integer shifts of v
    v = tuple(frac(x) for x in g.horizontal)
    d = g.d
    for i in range(d):
        for n in range(N):
            if reduce_coefficients(g.alpha[i], g.beta[i], n) != 0:
                raise RuntimeError("change of variables identity failed")

    # van der Corput: correlations of f(n+h) conj f(n)
    corr = [float(abs(np.mean(np.roll(f, -h) * np.conj(f)))) for h in range(N)]
    thresh = delta * delta / 2
    good = [h for h in range(N) if corr[h] >= thresh]
    _vdc_guard(v, [h for h in good if h][: cfg.vdc_checks], N)

    # linear-in-n coefficient of the differenced phase versus its dominant frequency
    quad = g.P.coeff(2)
    agree = 0
    for h in good:
        top = 2 * quad * h - sum((g.alpha[i] * _ip(g.beta[i] * h) + frac(g.alpha[i] * h) * g.beta[i] for i in range(d)), Fraction(0))
        spectrum = np.abs(np.fft.fft(np.roll(f, -h) * np.conj(f)))
        xi = int(np.argmax(spectrum))
        if frac(M.k * top - Fraction(xi, N)) == 0:
            agree += 1

    a = symplectic_dual(v)
    t = {h: frac(linalg.dot(a, [frac(x * h) for x in v])) for h in good}
    b_fit, c_fit, hs = _fit_affine(t, N)
    inst = rbpl.RBPLInstance(N, a + (Fraction(1),), v + (c_fit,), b_fit, Fraction(0), tuple(hs))
    cert = rbpl.solve(inst, cfg.solver)
    if isinstance(cert, rbpl.DegenerateReport):
        return DichotomyResult("SmallN", diagnostics={"N": N, "reason": cert.reason})
    ext = rbpl.extend_affine(cert)
    w, eta = isotropic_refinement(v, ext.w, ext.eta)
    diag = {
        "mean": mean,
        "good_h": len(good),
        "good_h_density": len(good) / N,
        "top_term_agreement": agree / len(good),
        "fit": [fmt(b_fit), fmt(c_fit)],
        "fit_h": len(hs),
        "solver_steps": len(cert.trail),
        "unrefined_r": ext.r,
    }
    per_h = [(h, corr[h], corr[h] >= thresh) for h in range(N)]
    return DichotomyResult("Certificate", w, eta, diag, per_h)


def isotropic_refinement(v: Sequence[Fraction], w: Sequence[Sequence[int]], eta: Sequence[Sequence[int]]):
    """Shrink the common kernel of the eta's to an omega-isotropic subspace.

    The new kernel is spanned by the projection of v onto the old kernel W
    together with those old w's that are omega-orthogonal to everything kept
    so far; eta's are added from W to cut the kernel down. All exact
    conditions of the input are preserved.
    """
    D = len(v)
    N = math.lcm(*(x.denominator for x in v)) if v else 1
    w = [tuple(x) for x in w]
    eta = [tuple(x) for x in eta]
    if not w:
        return w, eta
    # projection of v onto W = span(w): v minus its component in span(eta)
    if eta:
        gram = [[linalg.dot(x, y) for y in eta] for x in eta]
        coef = linalg.solve(gram, [linalg.dot(x, v) for x in eta])
        proj = [v[i] - sum((coef[j] * eta[j][i] for j in range(len(eta))), Fraction(0)) for i in range(D)]
    else:
        proj = list(v)
    keep: list[tuple[int, ...]] = []
    if any(proj):
        p = linalg.primitive(proj)
        if omega(None, p, v).denominator != 1:
            p = tuple(N * x for x in p)
        keep.append(p)
    for x in w:
        if all(omega(None, x, y) == 0 for y in keep) and linalg.independent(keep + [x]):
            keep.append(x)
    if len(keep) == len(w) and all(omega(None, x, y) == 0 for x in keep for y in keep):
        return keep, eta
    # new eta's: integer basis of W intersected with keep-perp
    rows = [list(e) for e in eta] + [list(k) for k in keep]
    extra = linalg.nullspace(rows, D)
    return keep, eta + [tuple(e) for e in extra]


@dataclass
class DichotomyReport:
    ok: bool
    violations: list[str]


def verify_dichotomy(M: ElemNilmanifold, g: PolySeq, result: DichotomyResult, N: int | None = None) -> DichotomyReport:
    if result.branch != "Certificate":
        return DichotomyReport(False, ["not a certificate"])
    v = g.horizontal
    D = len(v)
    if N is None:
        N = math.lcm(*(x.denominator for x in v)) if v else 1
    bad = []
    if result.r + len(result.eta) != D:
        bad.append(f"r + #eta = {result.r + len(result.eta)} != {D}")
    if result.w and not linalg.independent(result.w):
        bad.append("w vectors are dependent")
    if result.eta and not linalg.independent(result.eta):
        bad.append("eta vectors are dependent")
    for i, wi in enumerate(result.w):
        for j, ej in enumerate(result.eta):
            if linalg.dot(wi, ej) != 0:
                bad.append(f"<w_{i}, eta_{j}> != 0")
    for j, e in enumerate(result.eta):
        if c_infty_norm(Poly.of(0, linalg.dot(e, v)), N) != 0:
            bad.append(f"eta_{j} . psi is not integral")
    for i, wi in enumerate(result.w):
        if c_infty_norm(Poly.of(0, omega(None, wi, v)), N) != 0:
            bad.append(f"omega(w_{i}, psi) is not integral")
    kernel = linalg.nullspace([list(e) for e in result.eta], D) if result.eta else [
        tuple(1 if j == i else 0 for j in range(D)) for i in range(D)]
    for x in kernel:
        for y in kernel:
            if omega(None, x, y) != 0:
                bad.append("eta kernel is not isotropic")
                break
        else:
            continue
        break
    return DichotomyReport(not bad, bad)


def per_h_csv(result: DichotomyResult) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["h", "correlation", "good"])
    for h, c, good in result.per_h:
        wr.writerow([h, "%.12g" % c, int(good)])
    return buf.getvalue()


# instance generators ------------------------------------------------------------

def _best_vertical(alpha, beta, N: int) -> tuple[Poly, float]:
    """Periodic vertical polynomial maximising the mean of the elementary phase."""
    q0 = periodic_quadratic_base(alpha, beta, N)
    seq0 = PolySeq(alpha, beta, Poly.of(0, 0, q0))
    base = np.array([float(eval_mod1(seq0.phase_expr(), n)) for n in range(N)])
    n = np.arange(N)
    best = (-1.0, 0, 0)
    for j in range(2 * N):
        b0 = periodic_linear_base(q0 + Fraction(j, 2 * N), N)
        f = np.exp(2j * np.pi * (base + (j / (2 * N)) * n * n + float(b0) * n))
        spectrum = np.abs(np.fft.fft(f)) / N
        xi = int(np.argmax(spectrum))
        if spectrum[xi] > best[0] + 1e-12:
            best = (float(spectrum[xi]), j, xi)
    _, j, xi = best
    q = q0 + Fraction(j, 2 * N)
    return Poly.of(0, periodic_linear_base(q, N) - Fraction(xi, N), q), best[0]


def planted_isotropic(rng, d: int, N: int, rank: int | None = None, entry: int = 2) -> tuple[PolySeq, list[tuple[int, ...]]]:
    """g whose horizontal part lies in a random isotropic subspace, P tuned for a large mean.

    Returns g and the integer spanning vectors of the subspace.
    """
    m = rank if rank is not None else rng.randint(1, d)
    us: list[tuple[int, ...]] = []
    while len(us) < m:
        u = tuple(rng.randint(-entry, entry) for _ in range(2 * d))
        if not any(u) or not linalg.independent(us + [u]):
            continue
        if all(omega(None, u, x) == 0 for x in us):
            us.append(u)
    c = [rng.randint(0, N - 1) for _ in us]
    v = [frac(Fraction(sum(ci * u[j] for ci, u in zip(c, us)), N)) for j in range(2 * d)]
    P, _ = _best_vertical(v[:d], v[d:], N)
    return PolySeq(tuple(v[:d]), tuple(v[d:]), P), us


def random_periodic(rng, d: int, N: int) -> PolySeq:
    """Generic g: uniform horizontal coefficients, periodic P with random offsets."""
    alpha = [frac(Fraction(rng.randint(0, N - 1), N)) for _ in range(d)]
    beta = [frac(Fraction(rng.randint(0, N - 1), N)) for _ in range(d)]
    q = periodic_quadratic_base(alpha, beta, N) + Fraction(rng.randint(0, 2 * N - 1), 2 * N)
    b = periodic_linear_base(q, N) + Fraction(rng.randint(0, N - 1), N)
    return PolySeq(tuple(alpha), tuple(beta), Poly.of(0, b, q))
