"""Gowers U^1..U^4 norms on Z/N and the averages Lambda, Lambda^1 and the dual function D."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .fourier import dft

ONE_BOUND_TOL = 1e-12


def as_fn(values: Sequence[complex]) -> np.ndarray:
    f = np.asarray(values, dtype=complex)
    if f.ndim != 1 or f.size == 0:
        raise ValueError("a function on Z/N is a nonempty 1-d array")
    return f


def one_bounded(f: np.ndarray) -> bool:
    return bool(np.max(np.abs(f)) <= 1 + ONE_BOUND_TOL)


def mult_derivative(f: np.ndarray, h: int) -> np.ndarray:
    """n -> f(n+h) conj f(n), indices mod N."""
    f = as_fn(f)
    return np.roll(f, -h) * np.conj(f)


def _all_derivatives(f: np.ndarray) -> np.ndarray:
    """Row h is the derivative in direction h; works along the last axis of stacked arrays."""
    N = f.shape[-1]
    idx = (np.arange(N)[:, None] + np.arange(N)[None, :]) % N
    return f[..., idx] * np.conj(f)[..., None, :]


def _u2_fourth(f: np.ndarray) -> np.ndarray:
    spectrum = np.fft.fft(f, axis=-1) / f.shape[-1]
    return np.sum(np.abs(spectrum) ** 4, axis=-1)


def gowers_norm(f: Sequence[complex], s: int) -> float:
    """||f||_{U^s}; U^2 through the Fourier transform, higher orders through derivatives."""
    f = as_fn(f)
    if s == 1:
        return float(abs(f.mean()))
    if s not in (2, 3, 4):
        raise ValueError("s must be 1, 2, 3 or 4")
    g = f
    for _ in range(s - 2):
        g = _all_derivatives(g)
    val = float(np.mean(_u2_fourth(g)))
    return max(val, 0.0) ** (1.0 / 2**s)


def gowers_norm_direct(f: Sequence[complex], s: int) -> float:
    """Box-sum route: E_{x,h_1..h_s} of the 2^s-fold product, through iterated derivatives."""
    f = as_fn(f)
    g = f
    for _ in range(s):
        g = _all_derivatives(g)
    val = float(np.real(np.mean(g)))
    return max(val, 0.0) ** (1.0 / 2**s)


def u2_direct(f: Sequence[complex]) -> float:
    """E_{x,a,b} f(x) conj f(x+a) conj f(x+b) f(x+a+b), O(N^3)."""
    f = as_fn(f)
    N = len(f)
    x = np.arange(N)
    total = 0j
    for a in range(N):
        fa = np.conj(f[(x + a) % N])
        for b in range(N):
            total += np.sum(f * fa * np.conj(f[(x + b) % N]) * f[(x + a + b) % N])
    return max(float(np.real(total)) / N**3, 0.0) ** 0.25


def _poly_values(coeffs: Sequence[int], N: int) -> np.ndarray:
    y = np.arange(N, dtype=np.int64)
    out = np.zeros(N, dtype=np.int64)
    for c in reversed(list(coeffs)):
        out = (out * y + int(c)) % N
    return out


def _check_poly(coeffs: Sequence[int]) -> None:
    if coeffs and int(coeffs[0]) != 0:
        raise ValueError("polynomials must vanish at 0")


def _same_n(*fs: np.ndarray) -> int:
    ns = {len(f) for f in fs}
    if len(ns) != 1:
        raise ValueError(f"modulus mismatch: {sorted(ns)}")
    return ns.pop()


def lam(f, g, k, p, P: Sequence[int], Q: Sequence[int]) -> complex:
    """E_{x,y} f(x) g(x+P(y)) k(x+Q(y)) p(x+P(y)+Q(y)); P, Q as coefficient lists."""
    f, g, k, p = (as_fn(v) for v in (f, g, k, p))
    N = _same_n(f, g, k, p)
    _check_poly(P)
    _check_poly(Q)
    pv, qv = _poly_values(P, N), _poly_values(Q, N)
    x = np.arange(N)
    total = 0j
    for y in range(N):
        total += np.sum(f * g[(x + pv[y]) % N] * k[(x + qv[y]) % N] * p[(x + pv[y] + qv[y]) % N])
    return complex(total / N**2)


def lam_direct(f, g, k, p, P: Sequence[int], Q: Sequence[int]) -> complex:
    """Plain double loop; reference for ``lam``."""
    f, g, k, p = (as_fn(v) for v in (f, g, k, p))
    N = _same_n(f, g, k, p)
    pv, qv = _poly_values(P, N), _poly_values(Q, N)
    total = 0j
    for x in range(N):
        for y in range(N):
            total += f[x] * g[(x + pv[y]) % N] * k[(x + qv[y]) % N] * p[(x + pv[y] + qv[y]) % N]
    return complex(total / N**2)


def lam1(f, g, k, p) -> complex:
    """E_{x,y,z} f(x) g(x+y) k(x+z) p(x+y+z)."""
    f, g, k, p = (as_fn(v) for v in (f, g, k, p))
    N = _same_n(f, g, k, p)
    x = np.arange(N)
    total = 0j
    for y in range(N):
        gy = g[(x + y) % N]
        # sum over z of k(x+z) p(x+y+z) as a matrix in (x, z)
        idx = (x[:, None] + x[None, :]) % N
        kz = k[idx]
        pz = p[(idx + y) % N]
        total += np.sum((f * gy)[:, None] * kz * pz)
    return complex(total / N**3)


def lam1_fourier(f, g, k, p) -> complex:
    """sum_xi f^(xi) g^(-xi) k^(-xi) p^(xi)."""
    f, g, k, p = (as_fn(v) for v in (f, g, k, p))
    _same_n(f, g, k, p)
    F, G, K, Pp = (dft(v) for v in (f, g, k, p))
    neg = (-np.arange(len(f))) % len(f)
    return complex(np.sum(F * G[neg] * K[neg] * Pp))


def dual_D(f, g, k, P: Sequence[int], Q: Sequence[int]) -> np.ndarray:
    """x -> E_y f(x-P(y)-Q(y)) g(x-Q(y)) k(x-P(y))."""
    f, g, k = (as_fn(v) for v in (f, g, k))
    N = _same_n(f, g, k)
    _check_poly(P)
    _check_poly(Q)
    pv, qv = _poly_values(P, N), _poly_values(Q, N)
    x = np.arange(N)
    out = np.zeros(N, dtype=complex)
    for y in range(N):
        out += f[(x - pv[y] - qv[y]) % N] * g[(x - qv[y]) % N] * k[(x - pv[y]) % N]
    return out / N


def random_one_bounded(rng, N: int) -> np.ndarray:
    """Values r e(t) with r, t uniform in [0, 1)."""
    r = np.array([rng.random() for _ in range(N)])
    t = np.array([rng.random() for _ in range(N)])
    return r * np.exp(2j * np.pi * t)
