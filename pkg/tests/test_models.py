from fractions import Fraction

import pytest

from loophh.grading import Multidegree, md
from loophh.models import (
    AlgebraPresentation,
    TorusData,
    TorusPoint,
    cartan_model,
    derived_fiber_model,
    fixed_points,
    identity_point,
    koszul_model,
    localization_open_set,
    loop_model,
    point_in_open_set,
    reduce_linear_relations,
    regrade_by_group_exponent,
    stabilizer_subgroups,
)


def line(weight=1, rank=1):
    return AlgebraPresentation(
        [("x", (weight,), 1)], rank=rank, asserted_smooth=True,
        asserted_regular_sequence=True,
    )


def plane(w1, w2):
    return AlgebraPresentation(
        [("x", (w1,), 1), ("y", (w2,), 1)], rank=1, asserted_smooth=True,
        asserted_regular_sequence=True,
    )


# -- koszul ------------------------------------------------------------------

def test_koszul_single_relation_x():
    P = line()
    P.add_relation(P.ambient.poly_gen("x"))
    model = koszul_model(P)
    model.check_symbolic()
    t = model.instantiate(4).cohomology()
    assert t.values == {md(0, (0,), 0): 1}


def test_koszul_xy_relation():
    P = AlgebraPresentation(
        [("x", (1,), 1), ("y", (1,), 1)], rank=1, asserted_regular_sequence=True
    )
    P.add_relation(P.ambient.poly_gen("x") * P.ambient.poly_gen("y"))
    model = koszul_model(P)
    model.check_symbolic()
    t = model.instantiate(4).cohomology()
    # H^0 = k[x,y]/(xy): dims 1,2,2,2,... per aux; H^{-1} = 0
    by_aux = {}
    for m, v in t.values.items():
        assert m.cohdeg == 0
        by_aux[m.aux] = by_aux.get(m.aux, 0) + v
    assert by_aux == {0: 1, 1: 2, 2: 2, 3: 2, 4: 2}


def test_koszul_x_squared():
    P = line()
    P.add_relation(P.ambient.poly_gen("x", 2))
    model = koszul_model(P)
    t = model.instantiate(4).cohomology()
    dims = [sum(v for m, v in t.values.items() if m.aux == a and m.cohdeg == 0) for a in range(4)]
    assert dims == [1, 1, 0, 0]
    assert all(m.cohdeg == 0 for m in t.values)


def test_koszul_non_regular_evidence():
    # relations (x, x) are not a regular sequence: H^{-1} != 0
    P = line()
    P.add_relation(P.ambient.poly_gen("x"))
    P.add_relation(P.ambient.poly_gen("x"))
    t = koszul_model(P).instantiate(4).cohomology()
    assert any(m.cohdeg < 0 and v for m, v in t.values.items())


# -- loop models -----------------------------------------------------------------

def test_loop_model_line_weight_one():
    P = line()
    V = loop_model(P, TorusData(1))
    V.check_symbolic()
    inv = V.instantiate(3, laurent_cap=4, weight_filter=(0,))
    reg = regrade_by_group_exponent(inv, V)
    assert reg is not None
    t = reg.cohomology()
    # weight-0 H = k[w^+-]: dim 1 per w-power in cohdeg 0, nothing else
    for mu in range(-4, 5):
        assert t.dim(md(0, (mu,), 0)) == 1
    assert all(m.cohdeg == 0 for m in t.values)
    assert not t.edge


def test_loop_model_point_bg():
    P = AlgebraPresentation([], rank=1)
    V = loop_model(P, TorusData(1))
    inv = V.instantiate(2, laurent_cap=3, weight_filter=(0,))
    reg = regrade_by_group_exponent(inv, V)
    t = reg.cohomology()
    assert {m for m in t.values} == {md(0, (mu,), 0) for mu in range(-3, 4)}


def test_loop_model_trivial_group_is_hkr():
    P2 = AlgebraPresentation([("x", (), 1)], rank=0, asserted_smooth=True)
    V = loop_model(P2, TorusData(0))
    V.check_symbolic()
    mc = V.instantiate(3)
    t = mc.cohomology()
    # odd tangent bundle of the line: k[x] + k[x]dx
    for a in range(4):
        assert t.dim(md(0, (), a)) == 1
    for a in range(1, 4):
        assert t.dim(md(-1, (), a)) == 1
    # mixed structure is the de Rham differential: rank 1 on H per aux >= 1
    assert mc.eps_induced_rank(md(0, (), 2)) == 1


def test_loop_model_mixed_weights():
    V = loop_model(plane(1, -1), TorusData(1))
    V.check_symbolic()
    inv = V.instantiate(2, laurent_cap=6, weight_filter=(0,))
    t = inv.cohomology()
    # the aux-2 column couples w-powers across the cap: must be edge-flagged
    assert t.is_edge(md(0, (0,), 2))
    # the derived fiber at the identity sees the honest class xy (HKR)
    fib = derived_fiber_model(plane(1, -1), TorusData(1), identity_point(1))
    tf = fib.instantiate(2, weight_filter=(0,)).cohomology()
    assert tf.dim(md(0, (0,), 2)) == 1
    assert not tf.is_edge(md(0, (0,), 2))


# -- cartan models ------------------------------------------------------------

def test_cartan_point_mod_torus():
    P = AlgebraPresentation([], rank=1)
    V = cartan_model(P, TorusData(1))
    V.check_symbolic()
    t = V.instantiate(4, weight_filter=(0,)).cohomology()
    assert t.values == {md(0, (0,), s): 1 for s in range(5)}


def test_cartan_line_trivial_group():
    P = AlgebraPresentation([("x", (), 1)], rank=0, asserted_smooth=True)
    V = cartan_model(P, TorusData(0))
    V.check_symbolic()
    mc = V.instantiate(4)
    t = mc.cohomology()
    assert t.dim(md(0, (), 0)) == 1
    assert t.dim(md(-1, (), 3)) == 1
    assert mc.eps_induced_rank(md(0, (), 3)) == 1


def test_cartan_line_weight_one_invariants():
    P = line()
    V = cartan_model(P, TorusData(1))
    V.check_symbolic()
    t = V.instantiate(4, weight_filter=(0,)).cohomology()
    # weight-0 part is the xi tower
    assert t.values == {md(0, (0,), s): 1 for s in range(5)}


# -- fixed points ----------------------------------------------------------------

def test_fixed_points_identity_keeps_presentation():
    P = plane(1, 2)
    Q = fixed_points(P, identity_point(1))
    assert not Q.relations
    assert [g.name for g in Q.generators] == ["x", "y"]


def test_fixed_points_minus_one():
    P = plane(1, 2)
    z = TorusPoint.make([-1])
    Q = fixed_points(P, z)
    assert Q.bare_relation_names() == {"x"}
    R = reduce_linear_relations(Q)
    assert [g.name for g in R.generators] == ["y"]


def test_fixed_points_root_of_unity():
    P = line(weight=2)
    z = TorusPoint.make([(1, Fraction(1, 2))])  # zeta_2
    Q = fixed_points(P, z)
    assert not Q.relations  # lambda(z) = zeta_2^2 = 1


def test_derived_fiber_at_2():
    P = line()
    z = TorusPoint.make([2])
    fib = derived_fiber_model(P, TorusData(1), z)
    t = fib.instantiate(3).cohomology()
    assert t.values == {md(0, (0,), 0): 1}


def test_derived_fiber_at_identity_is_hkr():
    P = line()
    fib = derived_fiber_model(P, TorusData(1), identity_point(1))
    mc = fib.instantiate(3)
    t = mc.cohomology()
    assert t.dim(md(0, (2,), 2)) == 1
    assert t.dim(md(-1, (2,), 2)) == 1
    # de Rham support got re-derived on the fiber
    assert mc.eps_induced_rank(md(0, (2,), 2)) == 1


# -- stabilizers ------------------------------------------------------------------

def test_stabilizers_weight_one():
    subs = stabilizer_subgroups(TorusData(1), [(1,)])
    assert [s.describe() for s in subs] == ["full torus", "trivial"]


def test_stabilizers_weight_two():
    subs = stabilizer_subgroups(TorusData(1), [(2,)])
    assert [s.describe() for s in subs] == ["full torus", "mu_2"]


def test_stabilizers_mixed():
    subs = stabilizer_subgroups(TorusData(1), [(1,), (-1,)])
    assert [s.describe() for s in subs] == ["full torus", "trivial"]


def test_localization_open_set_examples():
    T = TorusData(1)
    z2 = TorusPoint.make([2])
    deleted, kept = localization_open_set(T, [(1,)], z2)
    assert [s.describe() for s in deleted] == ["trivial"]
    z1 = identity_point(1)
    deleted, kept = localization_open_set(T, [(1,)], z1)
    assert deleted == []
    # weights {2}, z = -1: mu_2 contains -1, so nothing is deleted and U = T
    zm1 = TorusPoint.make([-1])
    deleted, kept = localization_open_set(T, [(2,)], zm1)
    assert deleted == []
    assert any(s.describe() == "mu_2" for s in kept)


def test_open_set_membership_and_containment():
    T = TorusData(1)
    z = TorusPoint.make([2])
    P = line()
    deleted, _ = localization_open_set(T, [(1,)], z)
    samples = [TorusPoint.make([q]) for q in (2, 3, -2, Fraction(1, 2), 5, -1, 7, Fraction(3, 2), -3, 4)]
    inside = [w for w in samples if point_in_open_set(w, deleted)]
    assert len(inside) == 10
    base = {g.name for g in fixed_points(P, z).generators if g.name in fixed_points(P, z).bare_relation_names()}
    for w in inside:
        rel_w = fixed_points(P, w).bare_relation_names()
        assert base <= rel_w or rel_w == base
