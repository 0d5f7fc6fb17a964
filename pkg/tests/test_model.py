import pytest

from reserved_seats.model import (
    ADVANTAGED,
    DISADVANTAGED,
    UNMATCHED,
    Instance,
    Matching,
    MatchingError,
    PriorityOrder,
    ReservationQuotas,
    UnacceptableAssignment,
    as_reserve,
    check_matching,
    prefers,
    rank_in_preferences,
    validate_instance,
)


def small():
    return Instance.build(
        [ADVANTAGED, DISADVANTAGED, DISADVANTAGED],
        [[0, 1], [1], []],
        [1, 1],
        [2, 0, 1],
    )


def test_priority_order_roundtrip():
    p = PriorityOrder.from_order([2, 0, 1])
    assert p.order == (2, 0, 1)
    assert p.prefers(2, 0) and not p.prefers(1, 0)
    assert p.swapped(2, 0).order == (0, 2, 1)
    assert p.is_valid()


def test_unmatched_sorts_last():
    assert UNMATCHED > 10**9
    assert not UNMATCHED < 3


def test_build_universal_and_per_school():
    inst = small()
    assert inst.universal_priority
    assert inst.quotas == (1, 1)
    assert inst.students_in(DISADVANTAGED) == [1, 2]
    per = Instance.build([ADVANTAGED] * 2, [[0], [0, 1]], [1, 1], [[0, 1], [1, 0]])
    assert not per.universal_priority


def test_preference_lookup():
    inst = small()
    assert inst.pref_index(0, 1) == 1
    assert rank_in_preferences(inst, 0, 1) == 2
    assert rank_in_preferences(inst, 0, None) is UNMATCHED
    assert prefers(inst, 0, 0, 1)
    assert prefers(inst, 1, 1, None)
    with pytest.raises(UnacceptableAssignment):
        inst.pref_index(1, 0)


def test_reserve_normalisation():
    assert as_reserve(None, 2) == ReservationQuotas((0, 0))
    assert as_reserve([1, 0], 2).general(small()) == (0, 1)


def test_validate_instance_reports_bad_reserve():
    assert validate_instance(small()) == []
    assert validate_instance(small(), ReservationQuotas((2, 0)))


def test_check_matching_rejects_overfill_and_unacceptable():
    inst = small()
    check_matching(inst, Matching.from_pairs([(0, 0), (1, 1)], 3, 2))
    with pytest.raises((MatchingError, UnacceptableAssignment)):
        check_matching(inst, Matching.from_pairs([(2, 0)], 3, 2))
    two = Instance.build([ADVANTAGED] * 2, [[0], [0]], [1], [0, 1])
    with pytest.raises(MatchingError):
        check_matching(two, Matching((0, 0), 1))
