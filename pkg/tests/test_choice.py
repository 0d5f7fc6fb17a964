import random
from dataclasses import dataclass

import pytest
from hypothesis import given, settings, strategies as st

from reserved_seats.choice import (
    ChoiceContext,
    Mechanism,
    check_consistent,
    check_q_acceptant,
    check_substitutable,
    definitional_violations,
    make_context,
    max_select,
)
from reserved_seats.model import ADVANTAGED, DISADVANTAGED, PriorityOrder

A, D = ADVANTAGED, DISADVANTAGED


def ctx(mech, order, groups, quota, reserved):
    return ChoiceContext(Mechanism.parse(mech), PriorityOrder.from_order(order), quota, reserved, tuple(groups))


# m1 a1 a2 m2, ids 0..3
GROUPS = [D, A, A, D]
ORDER = [0, 1, 2, 3]


def test_max_select():
    p = PriorityOrder.from_order([3, 1, 0, 2])
    assert max_select([0, 1, 2], p, 2) == {1, 0}
    assert max_select([0, 1], p, 0) == frozenset()


def test_base_is_top_q():
    assert ctx("base", ORDER, GROUPS, 2, 0).choose({0, 1, 2, 3}) == {0, 1}


def test_mr_fills_reserved_first():
    # the top disadvantaged student takes the reserved seat, the rest go by priority
    assert ctx("mr", ORDER, GROUPS, 3, 1).choose({0, 1, 2, 3}) == {0, 1, 2}
    assert ctx("mr", ORDER, GROUPS, 2, 1).choose({1, 2, 3}) == {1, 3}


def test_jsa_fills_general_first():
    # m1 wins a general seat, so the reserved seat goes to m2
    assert ctx("jsa", ORDER, GROUPS, 3, 1).choose({0, 1, 2, 3}) == {0, 1, 3}


def test_unfilled_reserve_reverts_to_anyone():
    for mech in ("mr", "jsa"):
        assert ctx(mech, ORDER, GROUPS, 3, 2).choose({1, 2}) == {1, 2}


def test_context_rejects_disc_and_bad_reserve():
    with pytest.raises(ValueError):
        ctx("disc", ORDER, GROUPS, 2, 1)
    with pytest.raises(ValueError):
        ctx("mr", ORDER, GROUPS, 1, 2)


@dataclass
class Complements:
    """Takes student 1 only together with student 0: not substitutable."""

    quota: int = 2

    def choose(self, applicants):
        s = set(applicants)
        if {0, 1} <= s:
            return frozenset({0, 1})
        return frozenset(sorted(s - {1})[:1])


@dataclass
class Parity:
    """Top two from even-sized pools, top one otherwise."""

    quota: int = 2

    def choose(self, applicants):
        s = sorted(applicants)
        return frozenset(s[: 2 if len(s) % 2 == 0 else 1])


def _verify_subst(c, witness):
    s1, s2, s = witness
    assert s2 <= s1 and s in c.choose(s1) and s not in c.choose(set(s2) | {s})


def _verify_cons(c, witness):
    s1, s2 = witness
    assert c.choose(s1) <= s2 <= s1 and c.choose(s2) != c.choose(s1)


@pytest.mark.parametrize("rule", [Complements(), Parity()])
def test_checkers_agree_with_definitions_on_broken_rules(rule):
    universe = [0, 1, 2, 3, 4]
    subst, cons, accept = definitional_violations(rule, universe)
    w = check_substitutable(rule, universe)
    assert (w is not None) == (subst > 0)
    if w:
        _verify_subst(rule, w)
    w = check_consistent(rule, universe)
    assert (w is not None) == (cons > 0)
    if w:
        _verify_cons(rule, w)
    assert (check_q_acceptant(rule, universe) is not None) == (accept > 0)


def test_sampling_mode_finds_complements():
    universe = list(range(16))
    w = check_substitutable(Complements(), universe, budget=5000)
    assert w is not None
    _verify_subst(Complements(), w)
    assert check_q_acceptant(Parity(), universe) is not None


contexts = st.builds(
    lambda mech, n, seed, quota, frac: _random_ctx(mech, n, seed, quota, frac),
    st.sampled_from(["base", "mr", "jsa"]),
    st.integers(1, 7),
    st.integers(0, 10**6),
    st.integers(0, 5),
    st.floats(0, 1),
)


def _random_ctx(mech, n, seed, quota, frac):
    rng = random.Random(seed)
    groups = [rng.choice([A, D]) for _ in range(n)]
    reserved = 0 if mech == "base" else int(frac * quota)
    return ctx(mech, rng.sample(range(n), n), groups, quota, reserved), list(range(n))


@given(contexts)
@settings(max_examples=150, deadline=None)
def test_rules_satisfy_axioms(pair):
    c, universe = pair
    assert check_substitutable(c, universe) is None
    assert check_consistent(c, universe) is None
    assert check_q_acceptant(c, universe) is None


@given(contexts)
@settings(max_examples=40, deadline=None)
def test_fast_checkers_match_definitions(pair):
    c, universe = pair
    universe = universe[:5]
    assert definitional_violations(c, universe) == (0, 0, 0)


@given(contexts, st.integers(0, 2**7 - 1))
@settings(max_examples=150, deadline=None)
def test_choice_size_and_reserve_floor(pair, mask):
    c, universe = pair
    pool = [s for s in universe if mask >> s & 1]
    chosen = c.choose(pool)
    assert chosen <= set(pool)
    assert len(chosen) == min(c.quota, len(pool))
    dis = [s for s in pool if c.groups[s] is D]
    # reserved seats go to disadvantaged applicants whenever there are enough
    assert sum(c.groups[s] is D for s in chosen) >= min(c.reserved, len(dis))


def test_make_context_base_ignores_reserve():
    from reserved_seats.golden import DISC_SMART_RESERVE_HURTS as ex

    assert make_context("base", ex.instance, 0, ex.reserve).reserved == 0
    assert make_context("mr", ex.instance, 0, ex.reserve).reserved == 1


def test_check_axioms_combines_checkers():
    from reserved_seats.choice import check_axioms

    universe = [0, 1, 2, 3, 4]
    report = check_axioms(Complements(), universe)
    assert not report and report.substitutability == check_substitutable(Complements(), universe)
    assert check_axioms(ctx("jsa", ORDER, GROUPS, 3, 1), range(4))
    assert not check_axioms(Parity(), list(range(14))).q_acceptance is None
