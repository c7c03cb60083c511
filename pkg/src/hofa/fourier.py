"""DFT on Z/N and constructive Fourier expansions of bracket phases with denominator N.

Each expansion multiplies the phase, viewed as a function of the fractional
parts on a torus, by a smooth cutoff, expands on the torus and substitutes the
fractional parts back. The truncation radius (and, if needed, the cutoff
width) is grown until the exhaustively measured L^1 error is at most delta.
"""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .brackets import FracProd
from .ratmod import as_fraction, frac, has_denominator


class NonPeriodicError(ValueError):
    """A phase whose denominator does not divide the modulus."""


def dft(f: Sequence[complex]) -> np.ndarray:
    """f^(xi) = E_n f(n) e(-xi n / N)."""
    f = np.asarray(f, dtype=complex)
    return np.fft.fft(f) / len(f)


def idft(F: Sequence[complex]) -> np.ndarray:
    F = np.asarray(F, dtype=complex)
    return np.fft.ifft(F) * len(F)


def dft_direct(f: Sequence[complex]) -> np.ndarray:
    """O(N^2) reference transform with the same normalisation as ``dft``."""
    f = np.asarray(f, dtype=complex)
    N = len(f)
    n = np.arange(N)
    return np.exp(-2j * np.pi * np.outer(n, n) / N) @ f / N


@dataclass
class ExpansionConfig:
    smoothness: int = 3
    radius_start: int = 2
    radius_max: int = 128
    min_width: float = 1e-4
    degenerate_exponent: float = 1.0


@dataclass
class FourierExpansion:
    terms: list[tuple[complex, Fraction, Fraction]]
    l1_bound: float
    measured_l1_error: float
    radius: int = 0
    width: float = 0.0
    degenerate: bool = False

    def evaluate(self, n: np.ndarray, h: np.ndarray | None = None) -> np.ndarray:
        n = np.asarray(n)
        h = np.zeros_like(n) if h is None else np.asarray(h)
        out = np.zeros(np.broadcast(n, h).shape, dtype=complex)
        for c, fn, fh in self.terms:
            out += c * np.exp(2j * np.pi * (float(fn) * n + float(fh) * h))
        return out


def smoothstep(t: np.ndarray, order: int) -> np.ndarray:
    """Polynomial step from 0 at t<=0 to 1 at t>=1 with `order` continuous derivatives."""
    t = np.clip(t, 0.0, 1.0)
    s = order
    acc = np.zeros_like(t)
    for k in range(s + 1):
        acc += math.comb(s + k, k) * math.comb(2 * s + 1, s - k) * (-t) ** k
    return t ** (s + 1) * acc


def cutoff(u: np.ndarray, width: float, order: int) -> np.ndarray:
    """1 on [-1/2+width, 1/2-width], falling smoothly to 0 at +-1/2."""
    return smoothstep((0.5 - np.abs(u)) / width, order)


def _grid_size(radius: int, width: float) -> int:
    need = max(4 * radius, int(math.ceil(8 / width)), 32)
    return 1 << (need - 1).bit_length()


def _torus_coeffs(values: np.ndarray, radius: int, lo: float, period: float) -> np.ndarray:
    """Fourier coefficients c_k, |k|_inf <= radius, of samples on [lo, lo+period)^m."""
    L = values.shape[0]
    m = values.ndim
    spectrum = np.fft.fftn(values) / L**m
    ks = np.arange(-radius, radius + 1)
    out = spectrum[np.ix_(*([ks % L] * m))]
    shift = np.exp(-2j * np.pi * ks * lo / period)
    for axis in range(m):
        shape = [1] * m
        shape[axis] = len(ks)
        out = out * shift.reshape(shape)
    return out


def _check_denominator(x: Fraction, q: int, label: str) -> None:
    if not has_denominator(x, q):
        raise NonPeriodicError(f"{label} phase {x} does not have denominator {q}")


Key = tuple[Fraction, Fraction]


def _scatter(out: np.ndarray, coeffs: np.ndarray, idx: tuple[np.ndarray, ...]) -> None:
    np.add.at(out, idx, coeffs)


def _cyclic_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # product of two expansions indexed by residues = cyclic convolution of coefficients
    return np.fft.ifft2(np.fft.fft2(a) * np.fft.fft2(b))


def _residue(x: Fraction, q: int) -> int:
    return (x.numerator * (q // x.denominator)) % q


def _pair_factor(t: FracProd, coeffs: np.ndarray, radius: int, N: int, H: int) -> np.ndarray:
    """Substitute u = {alpha x + c1}, v = {beta y + c2} into a 2-d torus expansion.

    The result is indexed by the residues of the n- and h-frequencies.
    """
    ks = np.arange(-radius, radius + 1)
    k1, k2 = np.meshgrid(ks, ks, indexing="ij")
    qa = N if t.left == "n" else H
    qb = N if t.right == "n" else H
    ra = (k1 * _residue(t.alpha, qa)) % qa
    rb = (k2 * _residue(t.beta, qb)) % qb
    rn = (ra if t.left == "n" else 0) + (rb if t.right == "n" else 0)
    rh = (ra if t.left == "h" else 0) + (rb if t.right == "h" else 0)
    shift = np.exp(2j * np.pi * (k1 * float(t.c1) + k2 * float(t.c2)))
    out = np.zeros((N, H), dtype=complex)
    rn = np.broadcast_to(rn % N, k1.shape)
    rh = np.broadcast_to(rh % H, k1.shape)
    _scatter(out, (coeffs * shift).ravel(), (rn.ravel(), rh.ravel()))
    return out


@lru_cache(maxsize=64)
def _pair_spectrum(a: float, width: float, order: int, L: int) -> np.ndarray:
    u = -0.5 + np.arange(L) / L
    cut = cutoff(u, width, order)
    vals = np.exp(2j * np.pi * a * np.outer(u, u)) * np.outer(cut, cut)
    return _torus_coeffs(vals, L // 2 - 1, -0.5, 1.0)


@lru_cache(maxsize=64)
def _line_spectrum(a: float, width: float, order: int, L: int) -> np.ndarray:
    u = -0.5 + np.arange(L) / L
    vals = np.exp(2j * np.pi * a * u) * cutoff(u, width, order)
    return _torus_coeffs(vals, L // 2 - 1, -0.5, 1.0)


def _window(spectrum: np.ndarray, radius: int) -> np.ndarray:
    mid = spectrum.shape[0] // 2
    sl = slice(mid - radius, mid + radius + 1)
    return spectrum[(sl,) * spectrum.ndim]


def _pair_coeffs(a: float, radius: int, width: float, order: int, radius_max: int) -> np.ndarray:
    return _window(_pair_spectrum(a, width, order, _grid_size(radius_max, width)), radius)


def _line_coeffs(a: float, radius: int, width: float, order: int, radius_max: int) -> np.ndarray:
    return _window(_line_spectrum(a, width, order, _grid_size(radius_max, width)), radius)


def _synthesize(coeffs: np.ndarray) -> np.ndarray:
    """Values on [N] x [H] of sum_r c_r e(r_n n / N + r_h h / H)."""
    return np.fft.ifft2(coeffs) * coeffs.size


def _finish(coeffs: np.ndarray, err: float, radius: int, width: float, degenerate: bool) -> FourierExpansion:
    N, H = coeffs.shape
    terms = []
    for rn, rh in zip(*np.nonzero(np.abs(coeffs) > 1e-15)):
        terms.append((complex(coeffs[rn, rh]), frac(Fraction(int(rn), N)), frac(Fraction(int(rh), H))))
    terms.sort(key=lambda t: (t[1], t[2]))
    return FourierExpansion(terms, float(sum(abs(t[0]) for t in terms)), err, radius, width, degenerate)


def _adaptive(build, target, delta, width0, cfg: ExpansionConfig, degenerate: bool) -> FourierExpansion:
    width = width0
    best = None
    while width >= cfg.min_width:
        radius = cfg.radius_start
        while radius <= cfg.radius_max:
            coeffs = build(radius, width)
            err = float(np.mean(np.abs(target - _synthesize(coeffs))))
            if best is None or err < best[1]:
                best = (coeffs, err, radius, width)
            if err <= delta:
                return _finish(coeffs, err, radius, width, degenerate)
            radius *= 2
        width /= 2
    return _finish(*best, degenerate)


def _phase_values(terms: Sequence[FracProd], N: int, H: int) -> np.ndarray:
    """Exact phases on [N] x [H], reduced mod 1 in rationals before conversion to floats."""
    out = np.empty((N, H), dtype=float)
    for nv in range(N):
        for hv in range(H):
            acc = Fraction(0)
            for t in terms:
                x = nv if t.left == "n" else hv
                y = nv if t.right == "n" else hv
                acc += t.a * frac(t.alpha * x + t.c1) * frac(t.beta * y + t.c2)
            out[nv, hv] = float(frac(acc))
    return np.exp(2j * np.pi * out)


def _degenerate(N: int, delta: float, count: int, kmax: float, cfg: ExpansionConfig) -> bool:
    return N <= (delta / (2**count * max(kmax, 1))) ** (-cfg.degenerate_exponent)


def expand_frac_product(terms: Sequence[FracProd], N: int, delta: float, cfg: ExpansionConfig | None = None) -> FourierExpansion:
    """Expansion of e(sum_i a_i {alpha_i n + c_i}{beta_i n + c'_i}) on [N]."""
    cfg = cfg or ExpansionConfig()
    for t in terms:
        if t.left != "n" or t.right != "n":
            raise ValueError("single-variable expansion needs n-only factors")
        _check_denominator(t.alpha, N, "alpha")
        _check_denominator(t.beta, N, "beta")
    return _expand_pairs(list(terms), N, 1, delta, cfg)


def expand_bilinear(terms: Sequence[FracProd], N: int, H: int, delta: float, cfg: ExpansionConfig | None = None) -> FourierExpansion:
    """Expansion on [N] x [H] of e(sum of a_i-weighted products in n and h)."""
    cfg = cfg or ExpansionConfig()
    for t in terms:
        for freq, var in ((t.alpha, t.left), (t.beta, t.right)):
            _check_denominator(freq, N if var == "n" else H, var)
    return _expand_pairs(list(terms), N, H, delta, cfg)


def _expand_pairs(terms: list[FracProd], N: int, H: int, delta: float, cfg: ExpansionConfig) -> FourierExpansion:
    kmax = max((abs(float(t.a)) for t in terms), default=1.0)
    degenerate = _degenerate(N, delta, len(terms), kmax, cfg)
    live = [t for t in terms if t.a != 0]
    if not live:
        one = np.zeros((N, H), dtype=complex)
        one[0, 0] = 1.0
        return _finish(one, 0.0, 0, 0.0, degenerate)
    target = _phase_values(live, N, H)
    width0 = delta / (2 ** len(live) * max(math.ceil(kmax), 1))

    def build(radius: int, width: float) -> np.ndarray:
        acc = None
        for t in live:
            f = _pair_factor(t, _pair_coeffs(float(t.a), radius, width, cfg.smoothness, cfg.radius_max), radius, N, H)
            acc = f if acc is None else _cyclic_product(acc, f)
        return acc

    return _adaptive(build, target, delta, width0, cfg, degenerate)


def expand_trivial(a: Sequence, alpha: Sequence, N: int, delta: float, cfg: ExpansionConfig | None = None) -> FourierExpansion:
    """Expansion of e(sum_i a_i {alpha_i n}), splitting a = [a] + {a}."""
    cfg = cfg or ExpansionConfig()
    a = [as_fraction(x) for x in a]
    alpha = [as_fraction(x) for x in alpha]
    for x in alpha:
        _check_denominator(x, N, "alpha")
    int_phase = frac(sum(((ai - frac(ai)) * al for ai, al in zip(a, alpha)), Fraction(0)))
    live = [(frac(ai), al) for ai, al in zip(a, alpha) if frac(ai) != 0 and al.denominator != 1]
    degenerate = _degenerate(N, delta, len(a), 1.0, cfg)
    base = np.zeros((N, 1), dtype=complex)
    base[_residue(int_phase, N), 0] = 1.0
    if not live:
        return _finish(base, 0.0, 0, 0.0, degenerate)
    vals = [float(frac(sum((ai * frac(al * k) for ai, al in zip(a, alpha)), Fraction(0)))) for k in range(N)]
    target = np.exp(2j * np.pi * np.array(vals)).reshape(N, 1)
    width0 = delta / (4 * len(a))

    def build(radius: int, width: float) -> np.ndarray:
        acc = base
        ks = np.arange(-radius, radius + 1)
        for fa, al in live:
            fac = np.zeros((N, 1), dtype=complex)
            cs = _line_coeffs(float(fa), radius, width, cfg.smoothness, cfg.radius_max)
            _scatter(fac, cs, ((ks * _residue(al, N)) % N, np.zeros_like(ks)))
            acc = _cyclic_product(acc, fac)
        return acc

    return _adaptive(build, target, delta, width0, cfg, degenerate)


@dataclass
class BoxExpansion:
    """Product over i of sum_{k,l} c_i[k,l] e((k/2) x_i + (l/2) y_i) with x_i, y_i fractional parts.

    The frequencies k/2, l/2 range over the half-integer grid and every
    product coefficient has modulus at most one.
    """

    coeffs: list[np.ndarray]
    scales: list[float]
    radius: int
    measured_l1_error: float = 0.0
    degenerate: bool = False
    max_coeff: float = field(default=0.0)

    def evaluate(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """xs, ys have shape (terms, points); entries in (-1/2, 1/2]."""
        ks = np.arange(-self.radius, self.radius + 1)
        out = np.ones(xs.shape[1], dtype=complex)
        for i, c in enumerate(self.coeffs):
            ex = np.exp(1j * np.pi * np.outer(ks, xs[i]))
            ey = np.exp(1j * np.pi * np.outer(ks, ys[i]))
            out *= np.einsum("kl,kp,lp->p", c, ex, ey)
        return out


def _box_coeffs(a: float, radius: int) -> np.ndarray:
    # e(a x y) on [-1/2, 1/2]^2 extended by a cutoff supported in (-1, 1); period 2
    L = max(64, 1 << (8 * radius - 1).bit_length())
    u = -1.0 + 2.0 * np.arange(L) / L
    ext = smoothstep((1.0 - np.abs(u)) / 0.5, 3)
    vals = np.exp(2j * np.pi * a * np.outer(u, u)) * np.outer(ext, ext)
    return _torus_coeffs(vals, radius, -1.0, 2.0)


def expand_box_product(xs: np.ndarray, ys: np.ndarray, delta: float, scales: Sequence[float] | None = None,
                       cfg: ExpansionConfig | None = None) -> BoxExpansion:
    """Expansion of e(sum_i s_i x_i y_i) at the supplied fractional-part samples.

    xs[i, p] and ys[i, p] are the values {a_i(n)} and {b_i(m)} at sample p;
    the measured error is the mean absolute deviation over the samples.
    """
    cfg = cfg or ExpansionConfig()
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    m = xs.shape[0] if xs.size else 0
    scales = [1.0] * m if scales is None else [float(s) for s in scales]
    if m == 0:
        return BoxExpansion([], [], 0, 0.0, False, 1.0)
    target = np.exp(2j * np.pi * np.sum(np.array(scales)[:, None] * xs * ys, axis=0))
    radius = cfg.radius_start
    best = None
    while radius <= cfg.radius_max:
        coeffs = [_box_coeffs(s, radius) for s in scales]
        exp = BoxExpansion(coeffs, scales, radius)
        err = float(np.mean(np.abs(target - exp.evaluate(xs, ys))))
        exp.measured_l1_error = err
        exp.max_coeff = float(max(np.max(np.abs(c)) for c in coeffs))
        if best is None or err < best.measured_l1_error:
            best = exp
        if err <= delta:
            return exp
        radius *= 2
    return best
