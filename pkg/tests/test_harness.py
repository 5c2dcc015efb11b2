from fractions import Fraction

import pytest

from loophh.harness import (
    FAIL,
    INCONCLUSIVE,
    PASS,
    LocalizationInstance,
    Truncation,
    check_derived_fixed_fiber,
    check_hc_variants,
    check_hh_localization,
    check_hp_completion,
    check_unipotent_formal_tate,
)
from loophh.models import AlgebraPresentation, TorusData, TorusPoint, identity_point


def line_instance(z, **tr):
    P = AlgebraPresentation(
        [("x", (1,), 1)], rank=1, asserted_smooth=True, asserted_regular_sequence=True
    )
    return LocalizationInstance(
        P, TorusData(1), TorusPoint.make([z]), Truncation(**tr)
    )


def plane_instance(w1, w2, z, **tr):
    P = AlgebraPresentation(
        [("x", (w1,), 1), ("y", (w2,), 1)], rank=1, asserted_smooth=True,
        asserted_regular_sequence=True,
    )
    return LocalizationInstance(
        P, TorusData(1), TorusPoint.make([z]), Truncation(**tr)
    )


def test_hh_localization_line_at_2():
    rep = check_hh_localization(line_instance(2))
    assert rep.verdict == PASS, rep.render()


def test_hh_localization_line_at_identity():
    rep = check_hh_localization(line_instance(1))
    assert rep.verdict == PASS, rep.render()


def test_hh_localization_plane_jump():
    rep = check_hh_localization(plane_instance(1, 2, -1))
    assert rep.verdict == PASS, rep.render()
    rep = check_hh_localization(plane_instance(1, 2, 3))
    assert rep.verdict == PASS, rep.render()


def test_hc_variants_line():
    rep = check_hc_variants(line_instance(2, tower_levels=3, u_window=3))
    assert rep.verdict == PASS, rep.render()


def test_hc_variants_trivial_group():
    P = AlgebraPresentation([("x", (), 1)], rank=0, asserted_smooth=True)
    inst = LocalizationInstance(
        P, TorusData(0), TorusPoint.make([]), Truncation(tower_levels=2, u_window=3)
    )
    rep = check_hc_variants(inst)
    assert rep.verdict == PASS, rep.render()


def test_hc_variants_mixed_weights():
    rep = check_hc_variants(plane_instance(1, -1, 3, tower_levels=2, u_window=3, aux_max=3))
    assert rep.verdict == PASS, rep.render()


def test_hp_completion_line():
    rep = check_hp_completion(line_instance(2))
    assert rep.verdict == PASS, rep.render()


def test_hp_completion_line_at_identity():
    rep = check_hp_completion(line_instance(1))
    assert rep.verdict == PASS, rep.render()


def test_hp_completion_trivial_group():
    P = AlgebraPresentation([("x", (), 1)], rank=0, asserted_smooth=True)
    inst = LocalizationInstance(
        P, TorusData(0), TorusPoint.make([]), Truncation(tower_levels=2, u_window=3)
    )
    rep = check_hp_completion(inst)
    assert rep.verdict == PASS, rep.render()


def test_hp_completion_point():
    P = AlgebraPresentation([], rank=1)
    P.asserted_smooth = True
    inst = LocalizationInstance(P, TorusData(1), TorusPoint.make([2]))
    rep = check_hp_completion(inst)
    assert rep.verdict == PASS, rep.render()


def test_fixed_fiber_line():
    rep = check_derived_fixed_fiber(line_instance(2))
    assert rep.verdict == PASS, rep.render()
    rep = check_derived_fixed_fiber(line_instance(1))
    assert rep.verdict == PASS, rep.render()


def test_fixed_fiber_plane():
    rep = check_derived_fixed_fiber(plane_instance(1, 2, -1))
    assert rep.verdict == PASS, rep.render()


def test_unipotent_formal():
    rep = check_unipotent_formal_tate()
    assert rep.verdict == PASS, rep.render()


def test_negative_control_corrupted_differential():
    # corrupt one side: the comparison must FAIL with the bin named
    inst = line_instance(2, tower_levels=2)
    from loophh import harness as H

    lhs, rhs, maps = H._both_towers(inst)
    t1 = lhs.level(1).cohomology()
    t2 = rhs.level(1).cohomology()
    # tamper with the table directly
    k = next(iter(t1.values))
    t2.values[k] = t1.values[k] + 7
    rep = H.Report("corrupted", PASS)
    assert H._compare_tables("corrupted", t1, t2, rep) == FAIL
    assert any("mismatch" in ln for ln in rep.lines)


def test_window_too_small_is_inconclusive():
    from loophh import harness as H
    from loophh.tables import HilbertTable
    from loophh.grading import Window, md

    win = Window((0, 0), ((0, 0),), (0, 0))
    a = HilbertTable({md(0, (0,), 0): 1}, edge={md(0, (0,), 0)}, window=win)
    b = HilbertTable({md(0, (0,), 0): 1}, edge={md(0, (0,), 0)}, window=win)
    rep = H.Report("tiny", PASS)
    assert H._compare_tables("tiny", a, b, rep) == INCONCLUSIVE


def test_pass_monotone_in_window():
    small = check_hh_localization(line_instance(2, tower_levels=2, aux_max=2))
    big = check_hh_localization(line_instance(2, tower_levels=4, aux_max=5))
    assert small.verdict == PASS
    assert big.verdict == PASS
