from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import frozen
import oracles
from hofa import additive as AD
from hofa.rng import SplitMix64

sets13 = st.lists(st.integers(0, 12), min_size=1, max_size=8)


def test_bohr_frozen():
    assert list(AD.bohr_build([F(1, 7)], F(1, 7) + F(1, 100), 7).members) == frozen.BOHR_1_7


@given(st.lists(st.integers(0, 12), max_size=3), st.fractions(min_value=0, max_value=F(1, 2), max_denominator=40))
def test_bohr_matches_oracle(nums, rho):
    S = [F(x, 13) for x in nums]
    B = AD.bohr_build(S, rho, 13)
    assert list(B.members) == oracles.bohr(S, rho, 13)


def test_bohr_set_is_symmetric_and_contains_zero():
    B = AD.bohr_build([F(3, 31), F(7, 31)], F(1, 5), 31)
    assert 0 in B
    assert all((-x) % 31 in B for x in B.members)
    assert len(B) == len(B.members)


def test_bohr_rejects_bad_frequency():
    with pytest.raises(ValueError):
        AD.bohr_build([F(1, 3)], F(1, 4), 7)


def test_regular_radius():
    S = [F(3, 101)]
    rho = AD.find_regular_radius(S, F(1, 5), 101)
    assert F(1, 10) <= rho <= F(1, 5)
    assert AD.regularity_failures(S, rho, 101, AD.epsilon_grid(1)) == 0
    assert AD.find_regular_radius([], F(1, 4), 7) == F(1, 4)


def test_epsilon_grid():
    g = AD.epsilon_grid(2, 4)
    assert g[0] == F(1, 200) and len(g) == 8 and g[4] == -F(1, 200)


@given(sets13, sets13)
def test_energy_three_routes(A, B):
    e = AD.energy(A, B, 13)
    assert e == AD.energy_direct(A, B, 13) == oracles.energy(A, B, 13)


@settings(max_examples=50)
@given(sets13, sets13, sets13, sets13)
def test_energy4_and_cauchy_schwarz(A1, A2, A3, A4):
    assert AD.energy4(A1, A2, A3, A4, 13) == oracles.energy4(A1, A2, A3, A4, 13)
    assert AD.cs_energy_holds(A1, A2, A3, A4, 13)


def test_energy_of_interval():
    # |A| = 1 gives exactly one quadruple
    assert AD.energy([4], [4], 11) == F(1, 11**3)


@pytest.mark.parametrize("seed", range(4))
def test_planted_family_meets_bound(seed):
    N = 31
    H, chi, f1, f2 = AD.planted_linear_family(SplitMix64(seed), N)
    rep = AD.additive_quadruple_count(H, chi, N, delta=F(1, 2), f1=f1, f2=f2)
    assert rep.hypothesis_ok
    assert rep.threshold_pass
    assert rep.count == rep.total
    assert rep.inner_threshold == pytest.approx(float(rep.eta**4 / 8))


def test_hypothesis_failure_reported():
    N = 13
    rng = SplitMix64(3)
    H = [1, 2, 3]
    chi = {h: np.exp(2j * np.pi * np.array([rng.random() for _ in range(N)])) for h in H}
    ok, vals = AD.hypothesis_check(H, chi, np.ones(N), np.ones(N), 0.99, N)
    assert not ok and [h for h, _ in vals] == H


def test_quadruple_correlations_count():
    N = 7
    H = [0, 1, 2]
    chi = {h: np.ones(N) for h in H}
    quads = list(AD.quadruple_correlations(H, chi, N))
    want = sum(1 for a in H for b in H for c in H if (a + b - c) % N in H)
    assert len(quads) == want
    assert all(q[-1] == pytest.approx(1.0) for q in quads)


def test_freiman():
    f = {x: F(3 * x, 1) for x in range(5)}
    assert AD.freiman_check(f, 2).ok
    g = dict(f)
    g[4] = F(1)
    res = AD.freiman_check(g, 2)
    assert not res.ok and sum(res.witness[0]) == sum(res.witness[1])
    # modular inputs and outputs: x -> x/7 is a Freiman map Z/7 -> R/Z
    h = {x: F(x, 7) for x in range(7)}
    assert AD.freiman_check(h, 2, N=7, out_mod=F(1)).ok
    assert not AD.freiman_check(h, 2, N=7).ok
    with pytest.raises(AD.EnumerationCapExceeded):
        AD.freiman_check(h, 3, cap=10)


def test_fit_bracket_linear_recovers_exact_data():
    S = [F(3, 31)]
    H = list(range(20))
    vals = [2.0 * float(oracles.frac(S[0] * h)) + 0.25 for h in H]
    coef, const, resid = AD.fit_bracket_linear(H, vals, S)
    assert coef[0] == pytest.approx(2.0) and const == pytest.approx(0.25) and resid < 1e-9
