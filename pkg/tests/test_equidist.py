from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hofa import equidist as EQ
from hofa.nilmani import ElemNilmanifold, PolySeq, omega
from hofa.ratmod import Poly
from hofa.rng import SplitMix64

N_BIG = 101


def _planted(seed, d=2, N=N_BIG, rank=None):
    return EQ.planted_isotropic(SplitMix64(seed), d, N, rank)


@pytest.mark.parametrize("seed", range(6))
def test_planted_certificate_verifies(seed):
    d = 1 + seed % 2
    g, us = _planted(seed, d)
    M = ElemNilmanifold(d)
    res = EQ.run_dichotomy(M, g, N_BIG, 0.2)
    assert res.branch == "Certificate"
    rep = EQ.verify_dichotomy(M, g, res, N_BIG)
    assert rep.ok, rep.violations
    assert len(res.per_h) == N_BIG


def test_planted_subspace_is_isotropic():
    g, us = _planted(7, 3)
    assert all(omega(None, x, y) == 0 for x in us for y in us)


@pytest.mark.parametrize("seed", [0, 2, 3])
def test_higher_k(seed):
    g, _ = _planted(seed, 2)
    M = ElemNilmanifold(2, 2)
    mean = EQ.mean_correlation(M, g, N_BIG)
    res = EQ.run_dichotomy(M, g, N_BIG, 0.2)
    assert mean >= 0.2 and res.branch == "Certificate"
    assert EQ.verify_dichotomy(M, g, res, N_BIG).ok


def test_small_n_branch():
    g = EQ.random_periodic(SplitMix64(1), 1, 7)
    res = EQ.run_dichotomy(ElemNilmanifold(1), g, 7, 0.0)
    assert res.branch == "SmallN"
    assert not EQ.verify_dichotomy(ElemNilmanifold(1), g, res).ok


def test_hypothesis_error_below_delta():
    g = EQ.random_periodic(SplitMix64(4), 2, N_BIG)
    M = ElemNilmanifold(2)
    mean = EQ.mean_correlation(M, g, N_BIG)
    with pytest.raises(EQ.HypothesisError):
        EQ.run_dichotomy(M, g, N_BIG, mean + 0.01)


def test_non_periodic_rejected():
    M = ElemNilmanifold(1)
    with pytest.raises(EQ.PeriodicityError):
        EQ.run_dichotomy(M, PolySeq((F(1, 3),), (F(1, 101),), Poly()), N_BIG, 0.1)
    with pytest.raises(EQ.PeriodicityError):
        EQ.mean_correlation(M, PolySeq((F(1, 7),), (F(2, 7),), Poly()), 7)
    with pytest.raises(ValueError):
        EQ.run_dichotomy(M, PolySeq((F(1, 9),), (F(1, 9),), Poly()), 9, 0.1)


@settings(max_examples=25)
@given(st.integers(0, 10_000), st.integers(1, 3))
def test_random_periodic_is_periodic(seed, d):
    g = EQ.random_periodic(SplitMix64(seed), d, 13)
    EQ.mean_correlation(ElemNilmanifold(d), g, 13)


def test_symplectic_dual():
    v = (F(1, 5), F(2, 5), F(3, 5), F(4, 5))
    a = EQ.symplectic_dual(v)
    for y in [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (2, -1, 3, 1)]:
        assert sum(x * c for x, c in zip(a, y)) == omega(None, v, y)


@settings(max_examples=40)
@given(st.integers(0, 10_000))
def test_isotropic_refinement_preserves_conditions(seed):
    # start from an arbitrary valid (w, eta) pair for v and check the output
    rng = SplitMix64(seed)
    d = 2
    g = EQ.random_periodic(rng, d, 11)
    v = g.horizontal
    eta = []
    w = [tuple(1 if j == i else 0 for j in range(2 * d)) for i in range(2 * d)]
    w = [tuple(11 * x for x in row) for row in w]
    w2, eta2 = EQ.isotropic_refinement(v, w, eta)
    res = EQ.DichotomyResult("Certificate", w2, eta2)
    rep = EQ.verify_dichotomy(ElemNilmanifold(d), g, res, 11)
    assert rep.ok, rep.violations


def test_isotropic_refinement_zero_vector():
    v = (F(0),) * 4
    w = [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]
    w2, eta2 = EQ.isotropic_refinement(v, w, [])
    assert len(w2) + len(eta2) == 4
    assert all(omega(None, x, y) == 0 for x in w2 for y in w2)


def test_verify_catches_non_isotropic_kernel():
    g = PolySeq((F(0),), (F(0),), Poly())
    res = EQ.DichotomyResult("Certificate", [(1, 0), (0, 1)], [])
    rep = EQ.verify_dichotomy(ElemNilmanifold(1), g, res, 7)
    assert not rep.ok and any("isotropic" in x for x in rep.violations)


def test_per_h_csv():
    res = EQ.DichotomyResult("Certificate", per_h=[(0, 1.0, True), (1, 0.125, False)])
    assert EQ.per_h_csv(res) == "h,correlation,good\n0,1,1\n1,0.125,0\n"


def test_exact_phases_match_float_mean():
    g, _ = _planted(11, 1)
    M = ElemNilmanifold(1)
    ph = EQ.exact_phases(M, g, N_BIG)
    want = abs(np.mean(np.exp(2j * np.pi * np.array([float(x) for x in ph]))))
    assert abs(want - EQ.mean_correlation(M, g, N_BIG)) < 1e-12
