from fractions import Fraction as F

import frozen
import oracles as O


def test_frac_values():
    for x, want in frozen.FRAC.items():
        assert O.frac(x) == want


def test_smoothness_value():
    assert O.c_infty([0, 0, F(1, 10)], 5) == frozen.C_INFTY_HALF_OVER_N


def test_bracket_values():
    assert O.bracket_phase([F(1, 5)], [F(2, 5)], [], 3) == frozen.NBRACKET_PHASE
    assert O.periodic([F(1, 7)], [F(2, 7)], [], 7) == frozen.PERIODIC_1_7_2_7_P0
    assert O.periodic([F(1, 7)], [F(2, 7)], [0, 0, F(1, 49)], 7) == frozen.PERIODIC_1_7_2_7_QUAD
    assert O.periodic([F(1, 2)], [F(1, 2)], [], 7) == frozen.PERIODIC_HALF_N7


def test_group_values():
    g = ((F(1, 2), 0, 0), (0, 0, 0), 0)
    h = ((0, 0, 0), (F(1, 3), 0, 0), 0)
    assert O.group_mul(g, h)[2] == frozen.MUL_Z
    assert O.coset_representative((F(3, 4),), (F(5, 3),), F(2)) == [frozen.PROJECT]
    assert O.nil_phase([F(1, 5)], [F(2, 5)], [], 3) == frozen.NIL_PHASE


def test_trilinear_value():
    assert O.trilinear([F(1, 5)], [F(6, 5)], [F(2, 5)], 1, 1, 1) == frozen.TRILINEAR


def test_lambda_value():
    A = [1, 1, 0, 0, 0]
    assert abs(O.lam(A, A, A, A, [0, 1], [0, 2]) - frozen.LAMBDA_SMALL) < 1e-15


def test_additive_values():
    assert O.bohr([F(1, 7)], F(1, 7) + F(1, 100), 7) == frozen.BOHR_1_7


def test_lattice_values():
    assert O.tube_members([1, F(13, 8)], F(1, 4), 10, 10) == frozen.TUBE_13_8
    assert O.smallest_killer(F(1, 7), 10) == frozen.KILLER_1_7


def test_oracle_group_law_is_matrix_product():
    # the oracle's own consistency: associativity through matrices
    a = ((F(1, 3), F(2)), (F(-1, 2), F(1, 5)), F(1, 7))
    b = ((F(2, 3), F(-1)), (F(1, 4), F(3)), F(2, 9))
    c = ((F(5), F(1, 11)), (F(0), F(-2, 3)), F(-1))
    assert O.group_mul(O.group_mul(a, b), c) == O.group_mul(a, O.group_mul(b, c))
