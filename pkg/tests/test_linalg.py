from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from nfreduce.harness import EX1_A
from nfreduce.linalg import (
    GradedSubspace,
    RationalMatrix,
    image,
    intersect,
    is_semisimple,
    minimal_polynomial,
    nullspace,
    rank,
    rref,
    solve,
    solve_min_norm,
    subspace_sum,
)

rationals = st.fractions(min_value=-4, max_value=4, max_denominator=5)


@st.composite
def matrices(draw, max_rows=5, max_cols=5):
    r = draw(st.integers(1, max_rows))
    c = draw(st.integers(1, max_cols))
    # bias towards rank deficiency with small integer entries
    entries = st.one_of(st.just(Fraction(0)), rationals)
    return RationalMatrix([[draw(entries) for _ in range(c)] for _ in range(r)], c)


def to_sympy(M):
    return sp.Matrix([[sp.Rational(x.numerator, x.denominator) for x in row] for row in M.rows])


def test_nullspace_examples():
    assert nullspace(RationalMatrix.identity(3)) == []
    assert len(nullspace(RationalMatrix.zeros(2, 2))) == 2
    (v,) = nullspace(RationalMatrix([[1, 1], [2, 2]]))
    assert v[0] == -v[1] and v[0] != 0


@settings(max_examples=80, deadline=None)
@given(matrices())
def test_rref_matches_sympy(M):
    R, pivots = rref(M)
    SR, spiv = to_sympy(M).rref()
    assert tuple(pivots) == tuple(spiv)
    nz = [list(r) for r in R if any(r)]
    assert nz == [[Fraction(int(x.p), int(x.q)) for x in SR.row(i)] for i in range(len(spiv))]


@settings(max_examples=80, deadline=None)
@given(matrices())
def test_rank_nullity(M):
    K = nullspace(M)
    assert rank(M) + len(K) == M.ncols
    assert rank(M) == to_sympy(M).rank()
    for v in K:
        assert not any(M @ v)


def test_solve_min_norm_examples():
    I2 = RationalMatrix.identity(2)
    assert solve_min_norm(RationalMatrix([[1, 0], [0, 0]]), [0, 0], I2) == (0, 0)
    assert solve_min_norm(RationalMatrix([[1, 0], [0, 0]]), [1, 0], I2) == (1, 0)
    assert solve_min_norm(RationalMatrix([[1, 1]]), [2], I2) == (1, 1)
    assert solve_min_norm(RationalMatrix([[1, 0], [0, 0]]), [0, 1], I2) is None


def test_solve_min_norm_weighted():
    # weights 1 and 2: minimise x^2 + 2 y^2 on x + y = 3
    assert solve_min_norm(RationalMatrix([[1, 1]]), [3], RationalMatrix.diag([1, 2])) == (2, 1)


def test_solve_min_norm_shape_error():
    with pytest.raises(ValueError):
        solve_min_norm(RationalMatrix([[1, 1]]), [1], RationalMatrix.identity(3))


@settings(max_examples=80, deadline=None)
@given(matrices(), st.data())
def test_solve_min_norm_properties(M, data):
    x_true = [data.draw(rationals) for _ in range(M.ncols)]
    b = M @ x_true
    weights = [data.draw(st.integers(1, 6)) for _ in range(M.ncols)]
    G = RationalMatrix.diag(weights)
    x = solve_min_norm(M, b, G)
    assert tuple(M @ x) == tuple(b)
    for k in nullspace(M):
        assert sum(xi * g * ki for xi, g, ki in zip(x, weights, k)) == 0


def test_solve_inconsistent():
    assert solve(RationalMatrix([[1, 1], [1, 1]]), [1, 2]) is None


def test_intersect_examples():
    U = GradedSubspace(3, [(1, 0, 0), (0, 1, 0)])
    V = GradedSubspace(3, [(0, 1, 0), (0, 0, 1)])
    assert intersect(U, V) == GradedSubspace(3, [(0, 1, 0)])
    assert intersect(U, GradedSubspace.full(3)) == U
    assert intersect(U, U) == U


def test_intersect_ambient_mismatch():
    with pytest.raises(ValueError):
        intersect(GradedSubspace(2, [(1, 0)]), GradedSubspace(3, [(1, 0, 0)]))


@settings(max_examples=60, deadline=None)
@given(matrices(4, 4), matrices(4, 4))
def test_intersection_dimension_formula(A, B):
    if A.nrows != B.nrows:
        return
    U, V = image(A), image(B)
    assert intersect(U, V).dim + subspace_sum(U, V).dim == U.dim + V.dim


def test_image_examples():
    assert image(RationalMatrix.zeros(2, 2)).dim == 0
    assert image(RationalMatrix.identity(3)) == GradedSubspace.full(3)
    assert image(RationalMatrix([[1, 2], [2, 4]])) == GradedSubspace(2, [(1, 2)])


@settings(max_examples=60, deadline=None)
@given(matrices(4, 4), st.data())
def test_canonical_representation(M, data):
    # a change of basis never changes the stored form
    U = image(M)
    if not U.dim:
        return
    coeffs = [data.draw(st.integers(1, 3)) for _ in U.basis]
    mixed = [tuple(sum(c * v[j] for c, v in zip(coeffs, U.basis)) for j in range(U.size))]
    assert GradedSubspace(U.size, mixed + list(U.basis)[1:]) == U


def test_semisimplicity_examples():
    assert is_semisimple(RationalMatrix.diag([0, 1]))
    assert not is_semisimple(RationalMatrix([[0, 1], [0, 0]]))
    assert is_semisimple(RationalMatrix(EX1_A))
    # (t^2 + 1)(t + 1) = t^3 + t^2 + t + 1
    assert minimal_polynomial(RationalMatrix(EX1_A)) == [1, 1, 1, 1]


@st.composite
def square_integer(draw):
    n = draw(st.integers(1, 3))
    entries = st.sampled_from([0, 0, 0, 1, -1, 2])
    return RationalMatrix([[draw(entries) for _ in range(n)] for _ in range(n)], n)


@settings(max_examples=30, deadline=None)
@given(square_integer())
def test_semisimplicity_matches_sympy(M):
    S = to_sympy(M)
    assert is_semisimple(M) == S.is_diagonalizable(reals_only=False)
