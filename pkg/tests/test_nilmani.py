from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

import frozen
import oracles
from hofa import nilmani as NM
from hofa.brackets import eval_mod1
from hofa.ratmod import Poly, c_infty_norm, frac
from strategies import rationals, residues

vec2 = st.tuples(rationals(), rationals())
elements = st.builds(NM.GroupElement, vec2, vec2, rationals())


def as_tuple(g):
    return (g.x, g.y, g.z)


def test_mul_frozen():
    g = NM.GroupElement((F(1, 2), 0, 0), (0, 0, 0), 0)
    h = NM.GroupElement((0, 0, 0), (F(1, 3), 0, 0), 0)
    assert NM.mul(g, h).z == frozen.MUL_Z


@given(elements, elements)
def test_mul_is_matrix_product(g, h):
    assert as_tuple(NM.mul(g, h)) == oracles.group_mul(as_tuple(g), as_tuple(h))


@given(elements, elements, elements)
def test_associative(a, b, c):
    assert NM.mul(NM.mul(a, b), c) == NM.mul(a, NM.mul(b, c))


@given(elements)
def test_inverse(g):
    e = NM.GroupElement.identity(2)
    assert NM.mul(g, NM.inv(g)) == e
    assert NM.mul(NM.inv(g), g) == e


@given(elements, elements)
def test_commutator_is_central_omega(g, h):
    c = NM.commutator(g, h)
    assert all(v == 0 for v in c.x + c.y)
    assert c.z == NM.omega(None, g.horizontal, h.horizontal)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        NM.mul(NM.GroupElement.identity(1), NM.GroupElement.identity(2))
    with pytest.raises(ValueError):
        NM.omega(NM.ElemNilmanifold(2), (1, 2), (3, 4))


def test_project_frozen():
    g = NM.GroupElement((F(3, 4),), (F(5, 3),), 2)
    rep = NM.project_fundamental(g)
    assert as_tuple(rep) == frozen.PROJECT


small = rationals(max_num=12, max_den=6)


@given(st.tuples(small), st.tuples(small), rationals())
def test_projection_matches_lattice_search(x, y, z):
    rep, gamma = NM.project_with_lattice(NM.GroupElement(x, y, z))
    assert gamma.in_lattice()
    moved = NM.mul(NM.GroupElement(x, y, z), gamma)
    assert moved.x == rep.x and moved.y == rep.y and moved.z == rep.z
    box = int(max(abs(c) for c in x + y)) + 2
    assert oracles.coset_representative(x, y, z, box) == [as_tuple(rep)]


def test_nil_phase_frozen():
    g = NM.PolySeq((F(1, 5),), (F(2, 5),), Poly())
    assert NM.nil_phase(NM.ElemNilmanifold(1), g, 3) == frozen.NIL_PHASE


# the oracle searches a box of size ~ |g(n)|^(2d), so keep d = 1 there
@given(st.lists(st.tuples(residues(7), residues(7)), min_size=1, max_size=1),
       st.lists(rationals(), max_size=3), st.integers(-6, 6))
def test_nil_phase_is_bracket_phase(pairs, P, n):
    alpha = tuple(a for a, _ in pairs)
    beta = tuple(b for _, b in pairs)
    g = NM.PolySeq(alpha, beta, Poly.of(*P))
    M = NM.ElemNilmanifold(len(alpha))
    want = NM.nil_phase(M, g, n)
    assert want == eval_mod1(g.phase_expr(M), n)
    assert want == oracles.nil_phase(alpha, beta, P, n)


@given(st.lists(st.tuples(rationals(), rationals()), min_size=2, max_size=3),
       st.lists(rationals(), max_size=3), st.integers(-40, 40))
def test_nil_phase_is_bracket_phase_higher_d(pairs, P, n):
    alpha = tuple(a for a, _ in pairs)
    beta = tuple(b for _, b in pairs)
    g = NM.PolySeq(alpha, beta, Poly.of(*P))
    M = NM.ElemNilmanifold(len(alpha))
    assert NM.nil_phase(M, g, n) == eval_mod1(g.phase_expr(M), n)


@given(st.integers(2, 4), st.integers(-10, 10))
def test_nil_phase_scales_with_k(k, n):
    g = NM.PolySeq((F(1, 5), F(2, 3)), (F(2, 5), F(-1, 3)), Poly.of(0, F(1, 7), F(1, 11)))
    one = NM.nil_phase(NM.ElemNilmanifold(2), g, n)
    assert NM.nil_phase(NM.ElemNilmanifold(2, k), g, n) == frac(k * one)
    assert NM.nil_phase(NM.ElemNilmanifold(2, k), g, n) == eval_mod1(g.phase_expr(NM.ElemNilmanifold(2, k)), n)


def test_structure_constants_give_omega():
    M = NM.ElemNilmanifold(2)
    C = M.structure_constants
    u, v = (1, 2, 3, 4), (5, -1, 2, 7)
    assert sum(u[i] * C[i][j] * v[j] for i in range(4) for j in range(4)) == NM.omega(M, u, v)


def test_check_degree():
    NM.check_degree(NM.PolySeq((), (), Poly.of(1, 2, 3)))
    with pytest.raises(ValueError):
        NM.check_degree(NM.PolySeq((), (), Poly.of(0, 0, 0, 1)))


def _factorization_holds(g, eps, g1, gamma, etas, N):
    for e in etas:
        lin = sum((c * v for c, v in zip(e, g1.horizontal)), F(0))
        assert lin == 0
    for n in range(-6, 7):
        lhs = g.at(n)
        rhs = NM.mul(NM.mul(eps, g1.at(n)), gamma.at(n))
        assert lhs == rhs


def test_factorize_valid_example():
    N = 7
    g = NM.PolySeq((F(2, 7), F(1, 3)), (F(1, 2), F(5, 7)), Poly.of(F(1, 9), F(1, 4), F(1, 5)))
    etas = [(1, 0, 0, 0)]
    # eta . horizontal = 2/7 has zero smoothness norm only when multiplied through; use eta = 7e1
    with pytest.raises(NM.FactorizationError):
        NM.factorize_I(g, etas, N)
    g = NM.PolySeq((F(2), F(1, 3)), (F(1, 2), F(5, 7)), Poly.of(F(1, 9), F(1, 4), F(1, 5)))
    eps, g1, gamma, q = NM.factorize_I(g, etas, N)
    assert eps.z == F(1, 9)
    assert all(c.denominator == 1 for c in gamma.horizontal) and q == 1
    _factorization_holds(g, eps, g1, gamma, etas, N)


def test_factorize_rejects_nonzero_norm():
    g = NM.PolySeq((F(3, 7),), (F(1, 2),), Poly())
    with pytest.raises(NM.FactorizationError) as exc:
        NM.factorize_I(g, [(1, 0)], 7)
    assert exc.value.value == c_infty_norm(Poly.of(0, F(3, 7)), 7)


@given(st.lists(st.integers(-3, 3), min_size=4, max_size=4), st.lists(st.integers(-3, 3), min_size=4, max_size=4),
       rationals(), rationals())
def test_factorize_general(a, b, p1, p2):
    alpha = (F(a[0]), F(a[1], 5))
    beta = (F(a[2], 3), F(a[3]))
    g = NM.PolySeq(alpha, beta, Poly.of(p1, p2, F(1, 3)))
    etas = [(1, 0, 0, 0), (0, 0, 0, 1)]
    eps, g1, gamma, q = NM.factorize_I(g, etas, 11)
    _factorization_holds(g, eps, g1, gamma, etas, 11)
    assert gamma.P.coeffs == ()


def test_factorize_needs_independent_characters():
    g = NM.PolySeq((F(1),), (F(2),), Poly())
    with pytest.raises(ValueError):
        NM.factorize_I(g, [(1, 0), (2, 0)], 5)


@given(st.sampled_from([[[1, 0], [0, 1]], [[1, 1], [0, 1]], [[2, 1], [1, 1]], [[1, -2], [3, -5]]]),
       st.tuples(residues(7), residues(7)), st.tuples(residues(7), residues(7)),
       st.integers(-10, 10))
def test_change_basis_phase_identity(A, alpha, beta, n):
    M = NM.ElemNilmanifold(2)
    g = NM.PolySeq(alpha, beta, Poly.of(0, F(1, 7), F(3, 49)))
    M2, g2, lower = NM.change_basis(M, g, A)
    lhs = NM.nil_phase(M, g, 2 * n)
    rhs = NM.nil_phase(M2, g2, n) + sum((t.value(n) for t in lower), F(0))
    assert frac(lhs - rhs) == 0


def test_change_basis_rejects_singular():
    M = NM.ElemNilmanifold(2)
    g = NM.PolySeq((F(1, 3), 0), (0, 0), Poly())
    with pytest.raises(ValueError):
        NM.change_basis(M, g, [[1, 2], [2, 4]])


def test_serialization_round_trip():
    g = NM.PolySeq((F(1, 3), F(-2, 7)), (F(5, 2), 0), Poly.of(1, F(1, 4)))
    assert NM.seq_from_dict(NM.seq_to_dict(g)) == g
    M = NM.ElemNilmanifold(2, 3, 5)
    assert NM.manifold_from_dict(NM.manifold_to_dict(M)) == M
