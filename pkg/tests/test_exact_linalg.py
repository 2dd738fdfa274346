from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracle import dense_rank, kostant_matrix
from tractor_poisson.exact_linalg import (
    RowReducer,
    SparseMatrix,
    SubspaceBasis,
    dense_inverse,
    dump_matrix,
    in_column_space,
    load_matrix,
    nullspace,
    rank,
    rat,
    rat_add,
    rat_inv,
    solve,
)
from tractor_poisson.lie import AlgebraModel
from tractor_poisson.operators import ChainComplex

small = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@st.composite
def matrices(draw, max_dim=6):
    r = draw(st.integers(1, max_dim))
    c = draw(st.integers(1, max_dim))
    entries = draw(st.lists(st.lists(small | st.just(Fraction(0)), min_size=c, max_size=c), min_size=r, max_size=r))
    return entries


def to_sparse(rows):
    return SparseMatrix.from_rows(len(rows), len(rows[0]), {i: {j: x for j, x in enumerate(r) if x} for i, r in enumerate(rows)})


def test_rational_arithmetic():
    assert rat_add(Fraction(1, 2), Fraction(1, 3)) == Fraction(5, 6)
    assert rat("-2/4") == Fraction(-1, 2)
    assert rat_inv(Fraction(3, 7)) == Fraction(7, 3)
    with pytest.raises(ZeroDivisionError):
        rat_inv(0)


def test_nullspace_examples():
    assert nullspace(SparseMatrix.identity(2)).dim == 0
    ns = nullspace(SparseMatrix.from_rows(1, 2, {0: {0: 1, 1: -1}}))
    assert ns.vectors == [{0: Fraction(1), 1: Fraction(1)}]


def test_rank_examples():
    assert rank(SparseMatrix.zero(3, 4)) == 0
    assert rank(SparseMatrix.identity(5)) == 5


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_rank_matches_dense_oracle(rows):
    assert rank(to_sparse(rows)) == dense_rank(rows)


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_rank_nullity(rows):
    m = to_sparse(rows)
    ns = nullspace(m)
    assert rank(m) + ns.dim == m.ncols
    for v in ns:
        assert not any(m.apply(v).values())


@settings(max_examples=60, deadline=None)
@given(matrices(), st.data())
def test_solve_on_column_space(rows, data):
    m = to_sparse(rows)
    x = {j: data.draw(small) for j in range(m.ncols)}
    b = m.apply(x)
    sol = solve(m, b)
    assert sol is not None and m.apply(sol) == b
    assert in_column_space(m, b)


def test_solve_inconsistent():
    m = SparseMatrix.from_rows(2, 1, {0: {0: 1}, 1: {0: 1}})
    assert solve(m, {0: 1, 1: 2}) is None
    assert not in_column_space(m, {0: 1})
    assert in_column_space(m, {})


@settings(max_examples=40, deadline=None)
@given(matrices())
def test_dump_roundtrip(rows):
    m = to_sparse(rows)
    assert load_matrix(dump_matrix(m)) == m


def test_load_rejects_bad_counts():
    with pytest.raises(ValueError):
        load_matrix("2 2 2\n0 0 1/1\n")


def test_row_reducer_is_order_independent():
    rows = [{0: 2, 1: 4}, {1: 1, 2: 1}, {0: 1, 1: 2}]
    a, b = RowReducer(3), RowReducer(3)
    for r in rows:
        a.add(r)
    for r in reversed(rows):
        b.add(r)
    assert a.rank == b.rank == 2
    assert a.contains({0: 1, 1: 3, 2: 1}) and b.contains({0: 1, 1: 3, 2: 1})


def test_subspace_basis_rejects_dependent_vectors():
    with pytest.raises(ValueError):
        SubspaceBasis(2, [{0: 1}, {0: 2}])


def test_dense_inverse():
    a = [[2, 1], [1, 1]]
    inv = dense_inverse(a)
    assert inv == [[1, -1], [-1, 2]]


def test_kernel_of_one_chain_codifferential_n3():
    ch = ChainComplex(AlgebraModel(3))
    m = ch.matrix(1)
    dense = kostant_matrix(3, 1)
    assert [[m[r, c] for c in range(m.ncols)] for r in range(m.nrows)] == dense
    assert m.ncols == 15
    assert 15 - rank(m) == 15 - dense_rank(dense) == 11
