"""Independent reference implementations used to freeze expected values.

Nothing here imports hofa. Each oracle takes the slow, obvious route:
floor-based fractional parts, explicit matrices, plain nested loops.
"""

from __future__ import annotations

import cmath
import itertools
import math
from fractions import Fraction as F


def frac(x) -> F:
    """Representative of x mod 1 in (-1/2, 1/2], via floor."""
    x = F(x)
    r = x - math.floor(x)
    return r - 1 if r > F(1, 2) else r


def int_part(x) -> int:
    return int(F(x) - frac(x))


def c_infty(coeffs, N: int) -> F:
    """max_{i >= 1} N^i ||c_i||."""
    return max((N**i * abs(frac(c)) for i, c in enumerate(coeffs) if i >= 1), default=F(0))


def bracket_phase(alpha, beta, P, n: int) -> F:
    """P(n) - sum alpha_i n [beta_i n], reduced into (-1/2, 1/2]."""
    val = sum((F(c) * n**i for i, c in enumerate(P)), F(0))
    for a, b in zip(alpha, beta):
        x, y = F(a) * n, F(b) * n
        val -= x * int_part(y)
    return frac(val)


def periodic(alpha, beta, P, N: int) -> bool:
    return all(bracket_phase(alpha, beta, P, n) == bracket_phase(alpha, beta, P, n + N) for n in range(N))


# group law through explicit (d+2) x (d+2) upper-triangular matrices

def to_matrix(x, y, z):
    d = len(x)
    m = [[F(int(i == j)) for j in range(d + 2)] for i in range(d + 2)]
    for i in range(d):
        m[0][1 + i] = F(x[i])
        m[1 + i][d + 1] = F(y[i])
    m[0][d + 1] = F(z)
    return m


def from_matrix(m):
    d = len(m) - 2
    return tuple(m[0][1 + i] for i in range(d)), tuple(m[1 + i][d + 1] for i in range(d)), m[0][d + 1]


def matmul(a, b):
    n = len(a)
    return [[sum((a[i][k] * b[k][j] for k in range(n)), F(0)) for j in range(n)] for i in range(n)]


def group_mul(g, h):
    return from_matrix(matmul(to_matrix(*g), to_matrix(*h)))


def coset_representative(x, y, z, box: int = 3):
    """Search g * gamma over integer gamma with small entries for the point inside (-1/2, 1/2]^(2d+1)."""
    d = len(x)
    found = []
    for gx in itertools.product(range(-box, box + 1), repeat=d):
        for gy in itertools.product(range(-box, box + 1), repeat=d):
            xx, yy, zz = group_mul((x, y, z), (gx, gy, 0))
            if not all(-F(1, 2) < c <= F(1, 2) for c in xx + yy):
                continue
            # the central coordinate can always be shifted by an integer
            found.append((xx, yy, frac(zz)))
    return found


def nil_phase(alpha, beta, P, n: int) -> F:
    """Phase of e(-x.[y] + z) at the window representative of g(n), found by lattice search.

    Inside the window [y] = 0, so the phase is just the central coordinate.
    """
    x = tuple(F(a) * n for a in alpha)
    y = tuple(F(b) * n for b in beta)
    z = sum((F(c) * n**i for i, c in enumerate(P)), F(0))
    box = int(max((abs(c) for c in x + y), default=0)) + 2
    reps = coset_representative(x, y, z, box)
    assert len(reps) == 1
    return reps[0][2]


def trilinear(alpha, beta, gamma, x, y, z) -> F:
    acc = F(0)
    for a, b, g in zip(alpha, beta, gamma):
        acc += frac(F(a) * x) * F(b) / 6 * (y * frac(F(g) * z) + z * frac(F(g) * y))
    return frac(acc)


# Fourier side

def dft(values):
    N = len(values)
    return [sum(values[n] * cmath.exp(-2j * math.pi * xi * n / N) for n in range(N)) / N for xi in range(N)]


def u2_fourth_box(values) -> float:
    """E_{x,a,b} f(x) conj f(x+a) conj f(x+b) f(x+a+b) by plain loops."""
    N = len(values)
    f = values
    tot = 0j
    for x, a, b in itertools.product(range(N), repeat=3):
        tot += f[x] * f[(x + a) % N].conjugate() * f[(x + b) % N].conjugate() * f[(x + a + b) % N]
    return (tot / N**3).real


def lam(f, g, k, p, P, Q) -> complex:
    N = len(f)

    def ev(c, y):
        return sum(ci * y**i for i, ci in enumerate(c)) % N

    tot = 0j
    for x in range(N):
        for y in range(N):
            py, qy = ev(P, y), ev(Q, y)
            tot += f[x] * g[(x + py) % N] * k[(x + qy) % N] * p[(x + py + qy) % N]
    return tot / N**2


# additive side

def bohr(S, rho, N: int) -> list[int]:
    return [x for x in range(N) if all(abs(frac(F(a) * x)) < F(rho) for a in S)]


def energy(A, B, N: int) -> F:
    A, B = set(a % N for a in A), set(b % N for b in B)
    c = sum(1 for a, a2, b, b2 in itertools.product(A, A, B, B) if (a + b - a2 - b2) % N == 0)
    return F(c, N**3)


def energy4(A1, A2, A3, A4, N: int) -> F:
    """(1/N^3) #{(a1, a2, a3, a4) : a1 - a3 = a2 - a4}."""
    c = sum(1 for a1, a2, a3, a4 in itertools.product(*(set(x % N for x in A) for A in (A1, A2, A3, A4)))
            if (a1 - a3 - a2 + a4) % N == 0)
    return F(c, N**3)


# lattice side

def tube_members(a, width, length, box: int):
    """All nonzero integer vectors with |v| <= length and distance to the line R a at most width."""
    a = [F(c) for c in a]
    aa = sum(c * c for c in a)
    out = []
    for v in itertools.product(range(-box, box + 1), repeat=len(a)):
        if not any(v):
            continue
        vv = sum(c * c for c in v)
        va = sum(x * y for x, y in zip(v, a))
        dist2 = vv - va * va / aa
        if vv <= F(length) ** 2 and dist2 <= F(width) ** 2:
            out.append(v)
    return out


def smallest_killer(alpha, height: int):
    """Smallest positive integer multiple m <= height with m alpha integral, for d = 1."""
    for m in range(1, height + 1):
        if frac(F(alpha) * m) == 0:
            return m
    return None
