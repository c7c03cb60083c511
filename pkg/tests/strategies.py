"""Shared hypothesis strategies."""

from fractions import Fraction

from hypothesis import strategies as st


def rationals(max_num: int = 50, max_den: int = 30):
    return st.builds(Fraction, st.integers(-max_num, max_num), st.integers(1, max_den))


def residues(N: int):
    """Rationals with denominator N."""
    return st.integers(-2 * N, 2 * N).map(lambda a: Fraction(a, N))


primes = st.sampled_from([2, 3, 5, 7, 11, 13])
