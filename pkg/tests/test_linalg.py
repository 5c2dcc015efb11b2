import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from loophh.linalg import (
    NotAComplex,
    SparseMatrix,
    cohomology_dims,
    image_basis,
    kernel_basis,
    quotient_rank,
    rank,
)
from loophh.scalars import CyclotomicField


def test_rank_trivial_examples():
    assert rank(SparseMatrix.from_rows([[1, 1], [1, 1]])) == 1
    assert rank(SparseMatrix.from_rows([[2, 4]])) == 1
    assert rank(SparseMatrix.identity(3)) == 3
    assert rank(SparseMatrix.zero(2, 5)) == 0


def test_rank_cyclotomic_vanishing_entry():
    F = CyclotomicField(3)
    z = F.zeta()
    M = SparseMatrix(1, 1, {(0, 0): 1 + z + z * z})
    assert rank(M) == 0


def test_kernel_canonical_normalization():
    # [[2,4]] -> canonical (1, -1/2)
    [v] = kernel_basis(SparseMatrix.from_rows([[2, 4]]))
    assert v == {0: Fraction(1), 1: Fraction(-1, 2)}

    assert kernel_basis(SparseMatrix.identity(3)) == []

    [v] = kernel_basis(SparseMatrix.from_rows([[1, 1], [1, 1]]))
    assert v == {0: Fraction(1), 1: Fraction(-1)}


def test_kernel_size_matches_rank():
    M = SparseMatrix.from_rows([[1, 2, 3], [2, 4, 6], [0, 0, 1]])
    assert rank(M) == 2
    assert len(kernel_basis(M)) == 1


def test_cohomology_dims_examples():
    two = SparseMatrix.zero(0, 2)  # no outgoing rows
    zin = SparseMatrix.zero(2, 0)
    assert cohomology_dims(zin, two, "b") == 2

    d_out = SparseMatrix.from_rows([[1]])
    assert cohomology_dims(SparseMatrix.zero(1, 0), d_out, "b") == 0

    d_in = SparseMatrix.from_rows([[1], [0]])  # k -> k^2
    d_out = SparseMatrix.from_rows([[0, 1]])  # k^2 -> k
    assert cohomology_dims(d_in, d_out, "b") == 0


def test_not_a_complex_names_bin():
    d_in = SparseMatrix.from_rows([[1], [0]])
    d_out = SparseMatrix.from_rows([[1, 0]])
    with pytest.raises(NotAComplex) as ei:
        cohomology_dims(d_in, d_out, bin_name="(0, (1,), 2)")
    assert "(0, (1,), 2)" in str(ei.value)


def test_image_basis_and_quotient_rank():
    M = SparseMatrix.from_rows([[1, 2], [2, 4], [0, 1]])
    basis = image_basis(M)
    assert len(basis) == 2
    # vector already in the image contributes nothing mod the image
    assert quotient_rank([{0: Fraction(1), 1: Fraction(2)}], basis, 3) == 0
    assert quotient_rank([{0: Fraction(1)}], basis, 3) == 1


@settings(max_examples=60)
@given(
    st.lists(
        st.lists(st.integers(min_value=-5, max_value=5), min_size=3, max_size=3),
        min_size=1,
        max_size=4,
    )
)
def test_rank_transpose_invariant(rows):
    M = SparseMatrix.from_rows(rows)
    assert rank(M) == rank(M.transpose())


def _random_invertible(n, rng):
    while True:
        rows = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(n)]
        M = SparseMatrix.from_rows(rows)
        if rank(M) == n:
            return M


def test_cohomology_dims_basis_invariance():
    rng = random.Random(7)
    # complex k^2 --d_in--> k^3 --d_out--> k^2 with d_out d_in = 0
    d_in = SparseMatrix.from_rows([[1, 0], [0, 0], [0, 0]])
    d_out = SparseMatrix.from_rows([[0, 0, 1], [0, 0, 0]])
    base = cohomology_dims(d_in, d_out, "b")
    for _ in range(10):
        A = _random_invertible(2, rng)
        B = _random_invertible(3, rng)
        C = _random_invertible(2, rng)
        # conjugated complex: same cohomology
        d_in2 = B @ d_in @ A
        Binv_needed = cohomology_dims(d_in2, C @ d_out @ _inverse(B), "b")
        assert Binv_needed == base


def _inverse(M):
    n = M.nrows
    aug = M.hstack(SparseMatrix.identity(n))
    from loophh.linalg import rref

    pivot_cols, rows = rref(aug)
    assert pivot_cols == list(range(n)), "matrix not invertible"
    ent = {}
    for r, row in enumerate(rows):
        for c, v in row.items():
            if c >= n:
                ent[(r, c - n)] = v
    return SparseMatrix(n, n, ent)


def test_cyclotomic_kernel():
    F = CyclotomicField(4)
    i = F.zeta()
    # [[1, i]] has kernel spanned by (1, i) after normalization: (1, ?)
    [v] = kernel_basis(SparseMatrix(1, 2, {(0, 0): F.one(), (0, 1): i}))
    assert v[0] == F.one()
    assert v[1] == -i.inverse()  # -1/i = i... wait: x + i y = 0 => y = -x/i
    # check it is actually in the kernel
    assert (F.one() * v[0] + i * v[1]).is_zero()
