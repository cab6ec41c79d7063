"""Tests for the exact rational matrix and subspace layer."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inred.exact import (
    DimensionMismatch,
    InvarianceViolated,
    RationalMatrix,
    Subspace,
    as_fraction,
    complete_basis,
    image,
    kernel,
    preimage,
    restriction_matrix,
)

from conftest import random_invertible, random_matrix, random_subspace


def mat(rows):
    return RationalMatrix.from_rows(rows)


def span(ambient, *vectors):
    return Subspace.from_vectors(ambient, vectors)


# ---------------------------------------------------------------------------
# oracle: independent rank via plain Gaussian elimination on Fraction lists


def rank_oracle(rows):
    work = [[Fraction(x) for x in r] for r in rows]
    rank = 0
    ncols = len(work[0]) if work else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(work)) if work[i][c] != 0), None)
        if piv is None:
            continue
        work[rank], work[piv] = work[piv], work[rank]
        for i in range(len(work)):
            if i != rank and work[i][c] != 0:
                f = work[i][c] / work[rank][c]
                work[i] = [a - f * b for a, b in zip(work[i], work[rank])]
        rank += 1
    return rank


# ---------------------------------------------------------------------------
# scalars and serialization


def test_as_fraction_accepts_strings_and_ints():
    assert as_fraction("3/4") == Fraction(3, 4)
    assert as_fraction("0.25") == Fraction(1, 4)
    assert as_fraction(-7) == Fraction(-7)


def test_as_fraction_rejects_floats():
    with pytest.raises(TypeError):
        as_fraction(0.1)


def test_string_round_trip():
    M = mat([["1/3", "-2"], ["0", "5/7"]])
    strings = M.to_strings()
    assert strings == [["1/3", "-2"], ["0", "5/7"]]
    assert RationalMatrix.from_rows(strings) == M


# ---------------------------------------------------------------------------
# kernel


def test_kernel_one_equation():
    assert kernel(mat([[1, 1]])) == span(2, [1, -1])


def test_kernel_four_input_matrix(four_input_system):
    null = kernel(four_input_system.B)
    assert null.dim == 1
    assert null == span(4, [0, 0, 1, -1])


def test_kernel_identity_is_zero():
    assert kernel(RationalMatrix.identity(3)).is_zero()


def test_kernel_vectors_annihilate():
    rng = random.Random(11)
    for _ in range(30):
        M = random_matrix(rng, rng.randint(1, 4), rng.randint(1, 5))
        null = kernel(M)
        assert (M @ null.basis).is_zero()
        assert null.dim == M.cols - rank_oracle(M.entries)


# ---------------------------------------------------------------------------
# image


def test_image_zero_matrix():
    assert image(RationalMatrix.zeros(3, 2)).is_zero()


def test_image_insertion_is_full(four_input_system, four_input_pinned):
    b_u = four_input_system.B @ four_input_pinned.R
    assert b_u == RationalMatrix.identity(3)
    assert image(b_u).is_full()


def test_image_rank_matches_oracle():
    rng = random.Random(5)
    for _ in range(30):
        M = random_matrix(rng, 4, 2)
        assert image(M).dim == rank_oracle(M.entries)


small_entries = st.integers(min_value=-3, max_value=3)


@settings(max_examples=100, deadline=None)
@given(
    data=st.lists(st.lists(small_entries, min_size=3, max_size=3), min_size=4, max_size=4),
    mix=st.lists(st.lists(small_entries, min_size=3, max_size=3), min_size=3, max_size=3),
)
def test_canonical_form_invariant_under_column_mix(data, mix):
    M = mat(data)
    G = mat(mix)
    if G.rank() < 3:
        return
    assert image(M) == image(M @ G)


# ---------------------------------------------------------------------------
# sum and intersection


def test_sum_with_zero_is_identity():
    V = span(3, [1, 2, 3], [0, 1, 0])
    assert V + Subspace.zero(3) == V


def test_sum_of_axes():
    assert span(3, [1, 0, 0]) + span(3, [0, 1, 0]) == span(3, [1, 0, 0], [0, 1, 0])


def test_intersection_idempotent():
    V = span(4, [1, 0, 1, 0], [0, 2, 0, 1])
    assert (V & V) == V


def test_buck_static_kernel_trivial(buck):
    sys, _, _ = buck
    assert (kernel(sys.B) & kernel(sys.D)).is_zero()


def test_intersection_membership_sampling():
    rng = random.Random(21)
    for _ in range(25):
        V = random_subspace(rng, 5, rng.randint(1, 4))
        W = random_subspace(rng, 5, rng.randint(1, 4))
        I = V & W
        for j in range(I.dim):
            v = I.basis.col(j)
            assert V.contains(v) and W.contains(v)
        # vectors of V outside W must be outside the intersection
        for j in range(V.dim):
            v = V.basis.col(j)
            if not W.contains(v):
                assert not I.contains(v)


@settings(max_examples=200, deadline=None)
@given(
    a=st.lists(st.lists(small_entries, min_size=2, max_size=2), min_size=6, max_size=6),
    b=st.lists(st.lists(small_entries, min_size=3, max_size=3), min_size=6, max_size=6),
)
def test_grassmann_dimension_identity(a, b):
    V = image(mat(a))
    W = image(mat(b))
    assert (V + W).dim + (V & W).dim == V.dim + W.dim


# ---------------------------------------------------------------------------
# preimage


def test_preimage_of_full_space_is_full_domain():
    M = mat([[1, 2, 3], [0, 1, 0]])
    assert preimage(M, Subspace.full(2)).is_full()


def test_preimage_four_input_example(four_input_system):
    # stacked elimination oracle: u maps into span{e1,e2} iff row 3 of Bu is 0
    target = span(3, [1, 0, 0], [0, 1, 0])
    pre = preimage(four_input_system.B, target)
    assert pre.dim == 3
    assert pre == kernel(mat([[0, 0, 1, 1]]))


def test_preimage_under_identity_is_identity():
    V = span(3, [1, 1, 0])
    assert preimage(RationalMatrix.identity(3), V) == V


def test_preimage_of_zero_is_kernel():
    rng = random.Random(3)
    for _ in range(20):
        M = random_matrix(rng, 3, 4)
        assert preimage(M, Subspace.zero(3)) == kernel(M)


def test_preimage_contains_kernel():
    rng = random.Random(9)
    for _ in range(20):
        M = random_matrix(rng, 4, 3)
        V = random_subspace(rng, 4, 2)
        assert kernel(M) <= preimage(M, V)


# ---------------------------------------------------------------------------
# contains


def test_contains_zero_vector_always():
    assert Subspace.zero(3).contains([0, 0, 0])
    assert span(3, [1, -1, 0]).contains([0, 0, 0])


def test_contains_scaling():
    V = span(3, [1, -1, 0])
    assert V.contains([2, -2, 0])
    assert not V.contains([1, 0, 0])


def test_contains_dimension_check():
    with pytest.raises(DimensionMismatch):
        span(3, [1, 0, 0]).contains([1, 0])


# ---------------------------------------------------------------------------
# restriction


def test_restriction_of_identity():
    V = span(3, [1, 0, 1], [0, 1, 0])
    assert restriction_matrix(RationalMatrix.identity(3), V) == RationalMatrix.identity(2)


def test_restriction_four_input_state_constraint(four_input_system, four_input_constraints):
    _, x_set = four_input_constraints
    restricted = restriction_matrix(four_input_system.A, x_set)
    assert restricted == RationalMatrix.identity(2).scaled(-1)


def test_restriction_rejects_non_invariant():
    rotation = mat([[0, -1], [1, 0]])
    axis = span(2, [1, 0])
    with pytest.raises(InvarianceViolated):
        restriction_matrix(rotation, axis)


def test_restriction_commutes():
    # the closure of any subspace under M is M-invariant, so restriction
    # must succeed and satisfy M T = T M' exactly
    rng = random.Random(17)
    for _ in range(25):
        M = random_matrix(rng, 4, 4)
        V = random_subspace(rng, 4, rng.randint(1, 2))
        for _ in range(4):
            V = V + image(M @ V.basis)
        Mt = restriction_matrix(M, V)
        assert M @ V.basis == V.basis @ Mt


# ---------------------------------------------------------------------------
# solving, inversion, completion


def test_solve_columns_consistency():
    A = mat([[1, 2], [2, 4]])
    assert A.solve_columns(mat([[1], [2]])) is not None
    assert A.solve_columns(mat([[1], [3]])) is None


def test_inverse_round_trip():
    rng = random.Random(13)
    for _ in range(10):
        M = random_invertible(rng, 3)
        assert M @ M.inverse() == RationalMatrix.identity(3)


def test_inverse_rejects_singular():
    with pytest.raises(ValueError):
        mat([[1, 2], [2, 4]]).inverse()


def test_complete_basis_reaches_full_rank():
    T = mat([[1], [1], [0]])
    extra = complete_basis(T, [RationalMatrix.identity(3)])
    full = RationalMatrix.hstack(T, extra)
    assert full.rank() == 3


def test_matmul_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        mat([[1, 2]]) @ mat([[1, 2]])
