import pytest
from hypothesis import given, settings

from conftest import markets
from reserved_seats.auxiliary import (
    GENERAL,
    RESERVED,
    build_aux,
    check_equivalence,
    expand_preferences,
    project,
    run_disc_staged,
    seat_types,
)
from reserved_seats.choice import Mechanism
from reserved_seats.engine import matching_of
from reserved_seats.golden import ALL_EXAMPLES, DISC_SMART_RESERVE_HURTS, MR_JSA_INCOMPARABLE
from reserved_seats.model import DISADVANTAGED, Matching, MatchingError


def test_expansion_orders():
    assert expand_preferences((1, 0), Mechanism.MR) == (3, 2, 1, 0)
    assert expand_preferences((1, 0), Mechanism.JSA) == (2, 3, 0, 1)
    assert expand_preferences((1, 0), Mechanism.DISC) == (2, 0, 3, 1)
    with pytest.raises(ValueError):
        expand_preferences((0,), Mechanism.BASE)


def test_aux_quotas_and_reserved_priority():
    ex = DISC_SMART_RESERVE_HURTS
    aux = build_aux(ex.instance, ex.reserve, "mr")
    assert aux.instance.quotas == (2, 1, 1, 1)
    assert aux.omega == (0, 0, 1, 1)
    order = aux.instance.schools[1].priority.order
    n_dis = len(ex.instance.students_in(DISADVANTAGED))
    assert all(ex.instance.groups[s] is DISADVANTAGED for s in order[:n_dis])


def test_project_detects_overfill():
    ex = DISC_SMART_RESERVE_HURTS
    bad = Matching((0, 0, 1, 1, None, None), 4)
    with pytest.raises(MatchingError):
        project(bad, 2, ex.instance.__class__.build(ex.instance.groups, ex.instance.preferences, [1, 1], list(range(6))))


@pytest.mark.parametrize("ex", ALL_EXAMPLES, ids=lambda e: e.name)
def test_equivalence_on_examples(ex):
    for tag in ("mr", "jsa", "disc"):
        assert check_equivalence(ex.instance, ex.reserve, tag)


@given(markets(max_students=8, max_schools=4))
@settings(max_examples=300, deadline=None)
def test_equivalence_random(market):
    instance, q_r = market
    for tag in ("mr", "jsa", "disc"):
        eq = check_equivalence(instance, q_r, tag)
        assert eq, eq.diff
    assert run_disc_staged(instance, q_r) == matching_of("disc", instance, q_r)


def test_seat_types_mr_jsa_incomparable():
    ex = MR_JSA_INCOMPARABLE
    types = seat_types(ex.instance, ex.reserve, "mr")
    # sm1 holds c2's only seat, which is reserved; sm3 takes c3's general seat
    assert types[ex.student("sm1")] == RESERVED
    assert types[ex.student("sm3")] == GENERAL
    assert types[ex.student("sM1")] is None
    assert set(seat_types(ex.instance, ex.reserve, "base")) <= {GENERAL, None}
