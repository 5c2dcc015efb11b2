from fractions import Fraction

import pytest

from loophh.complexes import ChainMap, GradedComplex, unit_complex
from loophh.grading import Multidegree, Window, md
from loophh.linalg import NotAComplex, SparseMatrix
from loophh.tables import HilbertTable

WIN = Window((-4, 4), ((-4, 4),), (0, 4))


def two_term_zero():
    m0 = md(0, (0,), 0)
    m1 = md(1, (0,), 0)
    return GradedComplex({m0: ["a"], m1: ["b"]}, {}, WIN)


def test_two_term_zero_differential():
    C = two_term_zero()
    t = C.cohomology()
    assert t.dim(md(0, (0,), 0)) == 1
    assert t.dim(md(1, (0,), 0)) == 1


def test_cohomology_kills_acyclic():
    m0 = md(0, (0,), 0)
    m1 = md(1, (0,), 0)
    C = GradedComplex(
        {m0: ["a"], m1: ["b"]},
        {m0: SparseMatrix.from_rows([[1]])},
        WIN,
    )
    t = C.cohomology()
    assert t.values == {}


def test_d_squared_violation_named():
    m0 = md(0, (0,), 0)
    m1 = md(1, (0,), 0)
    m2 = md(2, (0,), 0)
    C = GradedComplex(
        {m0: ["a"], m1: ["b"], m2: ["c"]},
        {m0: SparseMatrix.from_rows([[1]]), m1: SparseMatrix.from_rows([[1]])},
        WIN,
    )
    with pytest.raises(NotAComplex) as ei:
        C.cohomology()
    assert str(md(0, (0,), 0)) in str(ei.value)


def test_tensor_unit():
    C = two_term_zero()
    U = unit_complex(1, WIN)
    T = C.tensor(U)
    assert T.cohomology().values == C.cohomology().values


def test_tensor_contractible_factor_acyclic():
    m0 = md(0, (0,), 0)
    m1 = md(1, (0,), 0)
    A = GradedComplex(
        {m0: ["v"], m1: ["dv"]},
        {m0: SparseMatrix.from_rows([[1]])},
        WIN,
    )
    C = two_term_zero()
    T = C.tensor(A)
    assert T.cohomology().values == {}


def test_tensor_koszul_signs_square_zero():
    # Koszul(x) (x) Koszul(y) must again be a complex (sign check)
    m0 = md(0, (1,), 1)
    mm = md(-1, (1,), 1)
    K = GradedComplex(
        {md(0, (0,), 0): ["1"], m0: ["x"], mm: ["e"]},
        {mm: SparseMatrix.from_rows([[1]])},
        WIN,
    )
    T = K.tensor(K)
    T.check_complex()


def test_euler_consistency():
    C = two_term_zero()
    assert C.euler_consistent()


def test_weight_component():
    m0 = md(0, (0,), 0)
    m1 = md(0, (3,), 3)
    C = GradedComplex({m0: ["1"], m1: ["x3"]}, {}, WIN)
    sub = C.weight_component((3,))
    assert sub.cohomology().dim(m1) == 1
    assert sub.cohomology().dim(m0) == 0


def test_weight_component_commutes_with_cohomology():
    m0 = md(0, (1,), 1)
    mm = md(-1, (1,), 1)
    C = GradedComplex(
        {m0: ["x"], mm: ["e"], md(0, (2,), 2): ["x2"]},
        {mm: SparseMatrix.from_rows([[1]])},
        WIN,
    )
    t_then = C.weight_component((1,)).cohomology()
    full = C.cohomology()
    sub = {m: v for m, v in full.values.items() if m.weight == (1,)}
    assert t_then.values == sub


def test_chain_map_verification_and_induced():
    m0 = md(0, (0,), 0)
    C = GradedComplex({m0: ["a"]}, {}, WIN)
    D = GradedComplex({m0: ["b"]}, {}, WIN)
    F = ChainMap(C, D, {m0: SparseMatrix.from_rows([[2]])})
    F.verify_chain_map()
    ok, failures = F.induced_iso_everywhere()
    assert ok
    assert F.induced_rank(m0) == 1


def test_chain_map_detects_non_chain():
    m0 = md(0, (0,), 0)
    m1 = md(1, (0,), 0)
    C = GradedComplex({m0: ["a"], m1: ["b"]}, {m0: SparseMatrix.from_rows([[1]])}, WIN)
    D = GradedComplex({m0: ["a"], m1: ["b"]}, {}, WIN)
    F = ChainMap(C, D, {m0: SparseMatrix.identity(1), m1: SparseMatrix.identity(1)})
    with pytest.raises(NotAComplex):
        F.verify_chain_map()


def test_table_serialization_format():
    t = HilbertTable({md(0, (2,), 1): 3, md(-1, (0,), 0): 1}, {md(-1, (0,), 0)}, WIN)
    text = t.serialize()
    assert "-1;0;0;0 -> 1 [edge]" in text.splitlines()[0]
    assert "0;2;1;0 -> 3" in text


def test_table_compare_and_masking():
    a = HilbertTable({md(0, (0,), 0): 1}, window=WIN)
    b = HilbertTable({md(0, (0,), 0): 1}, window=WIN)
    mism, comp, masked = a.compare(b)
    assert not mism and comp
    c = HilbertTable({md(0, (0,), 0): 2}, window=WIN)
    mism, _, _ = a.compare(c)
    assert mism
    d = HilbertTable({md(0, (0,), 0): 1}, edge={md(0, (0,), 0)}, window=WIN)
    mism, comp, masked = a.compare(d)
    assert not mism and masked == [md(0, (0,), 0)]
