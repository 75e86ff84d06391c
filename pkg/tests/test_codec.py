import pytest
import sympy
from hypothesis import given, settings, strategies as st

from psdmm import (Modulus, MatrixF, MatrixPoly, eval_matrix_poly, lagrange_interpolate,
                   make_rng, random_matrix, replicated_plan, sample_distinct_points,
                   solve_monomial_system)
from psdmm.codec import independent_rows
from psdmm.errors import CountMismatch, DuplicatePoints, SingularSystem
from psdmm.linalg import partition

from conftest import BIG_Q

MOD = Modulus(BIG_Q)


def _random_poly(exponents, rng, shape=(2, 3), q=BIG_Q):
    return MatrixPoly({e: random_matrix(*shape, rng, q) for e in exponents})


def test_eval_simple_cases():
    M = MatrixF([[3, 4]], 7)
    assert eval_matrix_poly(MatrixPoly({0: M}), Modulus(7)(5)) == M
    identity = MatrixF.identity(2, 7)
    assert eval_matrix_poly(MatrixPoly({1: identity}), 3) == identity.scale(3)


def test_eval_matches_sympy_per_entry():
    rng = make_rng(0, "eval")
    poly = _random_poly([0, 2, 5], rng, shape=(1, 1), q=101)
    x = sympy.Symbol("x")
    expr = sum(int(poly.terms[e].tolist()[0][0]) * x**e for e in poly.terms)
    for point in range(1, 20):
        want = int(expr.subs(x, point)) % 101
        assert eval_matrix_poly(poly, point).tolist() == [[want]]


def test_line_through_two_points():
    q = Modulus(101)
    values = [MatrixF([[(7 + 3 * x) % 101]], q) for x in (2, 9)]
    poly = lagrange_interpolate([q(2), q(9)], values, 1)
    assert poly.coefficient(0).tolist() == [[7]]
    assert poly.coefficient(1).tolist() == [[3]]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 20), st.integers(0, 2**32))
def test_interpolation_round_trip(degree, seed):
    rng = make_rng(seed, "interp")
    poly = _random_poly(range(degree + 1), rng)
    pts = sample_distinct_points(degree + 1, rng, MOD)
    got = lagrange_interpolate(pts, [poly(a) for a in pts], degree)
    for e in range(degree + 1):
        assert got.coefficient(e) == poly.coefficient(e)


def test_round_trip_sparse_three_terms():
    rng = make_rng(1, "sparse")
    poly = _random_poly([1, 3, 4], rng)
    pts = sample_distinct_points(5, rng, MOD)
    got = lagrange_interpolate(pts, [poly(a) for a in pts], 4)
    assert got.coefficient(0) == MatrixF.zeros(2, 3, MOD) == got.coefficient(2)
    assert all(got.coefficient(e) == poly.coefficient(e) for e in (1, 3, 4))


def test_interpolation_small_field_matches_sympy_solve():
    q = 101
    rng = make_rng(2, "sympy-solve")
    xs = [3, 17, 44, 90]
    ys = [int(v) for v in rng.integers(0, q, 4)]
    V = sympy.Matrix([[pow(x, e, q) for e in range(4)] for x in xs])
    want = (V.inv_mod(q) * sympy.Matrix(ys)).applyfunc(lambda v: v % q)
    mod = Modulus(q)
    got = lagrange_interpolate([mod(x) for x in xs], [MatrixF([[y]], mod) for y in ys], 3)
    assert [got.coefficient(e).tolist()[0][0] for e in range(4)] == list(want)


def test_interpolation_errors():
    q = Modulus(101)
    vals = [MatrixF([[1]], q)] * 3
    with pytest.raises(CountMismatch):
        lagrange_interpolate([q(1), q(2), q(3)], vals, 1)
    with pytest.raises(DuplicatePoints):
        lagrange_interpolate([q(1), q(1), q(3)], vals, 2)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 12), st.integers(0, 2**32))
def test_dense_support_agrees_with_lagrange(degree, seed):
    rng = make_rng(seed, "dense")
    poly = _random_poly(range(degree + 1), rng)
    pts = sample_distinct_points(degree + 1, rng, MOD)
    vals = [poly(a) for a in pts]
    a = solve_monomial_system(range(degree + 1), pts, vals)
    b = lagrange_interpolate(pts, vals, degree)
    assert all(a.coefficient(e) == b.coefficient(e) for e in range(degree + 1))


def test_singular_support_raises():
    # support {0, 2} at points {1, 4} mod 5: rows (1, 1) and (1, 16 = 1)
    q = Modulus(5)
    vals = [MatrixF([[1]], q), MatrixF([[2]], q)]
    with pytest.raises(SingularSystem):
        solve_monomial_system([0, 2], [q(1), q(4)], vals)
    with pytest.raises(SingularSystem):
        independent_rows([1, 4], [0, 2], 5)
    assert independent_rows([1, 4, 2], [0, 2], 5) == [0, 2]


def test_useful_coefficients_of_replicated_example():
    # h(x) = f(x) g(x) for the 2x2x2 replicated plan, with random A, B, Z
    plan = replicated_plan(2, 2, 2)
    rng = make_rng(11, "small-example")
    A, B, Z = random_matrix(4, 4, rng, MOD), random_matrix(4, 4, rng, MOD), random_matrix(2, 2, rng, MOD)
    ga, gb = partition(A, 2, 2), partition(B, 2, 2)
    f = {}
    for (k, j), blk in ga:
        f[plan.alpha[k][j]] = blk
    f[plan.gamma] = f.get(plan.gamma, MatrixF.zeros(2, 2, MOD)) + Z
    g = {plan.beta[j][k]: blk for (j, k), blk in gb}
    fpoly, gpoly = MatrixPoly(f), MatrixPoly(g)
    pts = sample_distinct_points(plan.recovery_threshold, rng, MOD)
    h = lagrange_interpolate(pts, [fpoly(a) @ gpoly(a) for a in pts], plan.degree)
    C = partition(A @ B, 2, 2)
    for (k, kk), e in plan.useful_exponent_of.items():
        assert h.coefficient(e) == C[k, kk]
