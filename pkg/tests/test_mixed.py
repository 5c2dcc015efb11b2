from fractions import Fraction

import pytest

from loophh.complexes import GradedComplex
from loophh.grading import Multidegree, Window, md
from loophh.linalg import SparseMatrix
from loophh.mixed import (
    MixedComplex,
    bga_completed_preset,
    bga_polynomial_preset,
    coinvariants,
    connes_periodicity_check,
    direct_sum,
    oplus_tate,
    prod_tate,
    random_mixed_complex,
    s1_invariants_level,
    tate,
)

WIN = Window((-6, 6), ((-6, 6),), (0, 6))


def point_complex():
    m = md(0, (0,), 0)
    gc = GradedComplex({m: ["1"]}, {}, WIN)
    return MixedComplex(gc, {})


def eps_pair():
    """k + k[-1] with eps the identity from cohomological degree 1 to 0."""
    m0 = md(0, (0,), 0)
    m1 = md(1, (0,), 0)
    gc = GradedComplex({m0: ["a"], m1: ["b"]}, {}, WIN)
    return MixedComplex(gc, {m1: SparseMatrix.from_rows([[1]])})


def test_invariants_level_point():
    V = point_complex()
    t = s1_invariants_level(V, 3).cohomology()
    assert t.values == {md(0, (0,), 0, p): 1 for p in range(3)}
    assert not t.edge


def test_invariants_level_one_recovers_v():
    V = bga_polynomial_preset(4)
    t1 = s1_invariants_level(V, 1).cohomology()
    plain = V.cohomology()
    assert {Multidegree(m.cohdeg, m.weight, m.aux, 0): v for m, v in t1.values.items()} == plain.values


def test_invariants_level_eps_pair():
    # level n: surviving classes at (0, p=0) and (1, p=n-1)
    V = eps_pair()
    for n in (1, 2, 3):
        t = s1_invariants_level(V, n).cohomology()
        assert t.values == {
            md(0, (0,), 0, 0): 1,
            md(1, (0,), 0, n - 1): 1,
        }


def test_tate_of_zero_eps_is_periodic_spread():
    V = point_complex()
    t = tate(V, 3).cohomology()
    assert t.values == {md(0, (0,), 0, p): 1 for p in range(-3, 4)}
    assert not t.edge


def test_tate_bga_preset_is_ku_pattern():
    V = bga_polynomial_preset(5)
    t = tate(V, 3).cohomology()
    expected = {md(0, (0,), 0, p): 1 for p in range(-3, 4)}
    known = {m: v for m, v in t.values.items() if t.known(m)}
    assert known == expected


def test_tate_completed_preset_matches_away_from_edges():
    A = tate(bga_polynomial_preset(6), 3).cohomology()
    B = tate(bga_completed_preset(6, 4), 3).cohomology()
    mism, comp, _ = A.compare(B)
    assert not mism
    assert comp  # nonempty comparable region


def test_tate_prod_oplus_agree_for_bounded():
    V = bga_polynomial_preset(4)
    t = tate(V, 3).cohomology()
    t_plus = oplus_tate(V, 3).cohomology()
    t_prod = prod_tate(V, 3).cohomology()
    assert t.values == t_plus.values == t_prod.values


def test_oplus_refused_on_uncertified():
    V = bga_completed_preset(6, 4)  # carries edge bins
    with pytest.raises(ValueError):
        oplus_tate(V, 3)


def test_coinvariants_point():
    V = point_complex()
    t = coinvariants(V, 3).cohomology()
    known = {m: v for m, v in t.values.items() if t.known(m)}
    assert known == {md(0, (0,), 0, p): 1 for p in range(-2, 1)} or known == {
        md(0, (0,), 0, p): 1 for p in range(-3, 1)
    }


def test_tate_spread_identity_with_differential():
    # eps = 0: the Tate table is exactly the 2-periodic spread of H(V)
    m0 = md(0, (0,), 0)
    m1 = md(1, (0,), 0)
    m2 = md(2, (0,), 1)
    gc = GradedComplex(
        {m0: ["a", "b"], m1: ["c"], m2: ["e"]},
        {m0: SparseMatrix.from_rows([[1, 0]])},
        WIN,
    )
    V = MixedComplex(gc, {})
    h = V.cohomology()
    t = tate(V, 2).cohomology()
    for m, v in h.values.items():
        for p in range(-2, 3):
            key = Multidegree(m.cohdeg, m.weight, m.aux, p)
            if t.known(key):
                assert t.dim(key) == v
    for m in t.values:
        base = Multidegree(m.cohdeg, m.weight, m.aux, 0)
        assert t.dim(m) == h.dim(base)


def test_periodicity_point_and_bga():
    ok, failures = connes_periodicity_check(point_complex(), 3)
    assert ok, failures
    ok, failures = connes_periodicity_check(bga_polynomial_preset(5), 3)
    assert ok, failures


def test_periodicity_acyclic():
    m0 = md(0, (0,), 0)
    m1 = md(1, (0,), 0)
    gc = GradedComplex({m0: ["v"], m1: ["dv"]}, {m0: SparseMatrix.from_rows([[1]])}, WIN)
    V = MixedComplex(gc, {})
    ok, failures = connes_periodicity_check(V, 3)
    assert ok


def test_mixed_laws_on_presets():
    bga_polynomial_preset(5).check_mixed_laws()
    bga_completed_preset(6, 4).check_mixed_laws()
    eps_pair().check_mixed_laws()


def test_random_mixed_complexes_laws():
    for seed in range(12):
        V = random_mixed_complex(seed)
        V.base.check_complex()
        V.check_mixed_laws()
        # (d + u eps)^2 = 0 surfaces through u-series assembly
        t = tate(V, 2)
        t.cohomology()
        assert V.base.euler_consistent()


def test_direct_sum_adds_tables():
    a = point_complex()
    b = eps_pair()
    s = direct_sum(a, b)
    s.check_mixed_laws()
    ta = a.cohomology()
    tb = b.cohomology()
    ts = s.cohomology()
    for m in set(ta.values) | set(tb.values):
        assert ts.dim(m) == ta.dim(m) + tb.dim(m)
