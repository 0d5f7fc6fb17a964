"""Fairness and comparison analytics over matchings."""
from __future__ import annotations

import enum
import itertools
import random
from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .choice import Mechanism
from .engine import matching_of
from .model import (
    ADVANTAGED,
    DISADVANTAGED,
    UNMATCHED,
    Group,
    Instance,
    Matching,
    as_reserve,
    prefers,
    rank_in_preferences,
)

VACANT_SEAT = "vacant"
GAINED_SEAT = "gained-seat"
LOST_SEAT = "lost-seat"

IN_GROUP_SCOPE = {DISADVANTAGED: "disadvantaged-in-group", ADVANTAGED: "advantaged-in-group"}


@dataclass(frozen=True)
class BlockingPair:
    student: int
    school: int
    witness: Union[int, str]
    scope: str


def find_in_group_blocking_pairs(instance: Instance, matching: Matching, group: Group) -> List[BlockingPair]:
    """(s, c) with s in ``group``, c preferred to mu(s), and a same-group student
    of lower priority at c. The witness is the lowest-priority such student."""
    members = matching.by_school()
    groups = instance.groups
    out = []
    for s in instance.students_in(group):
        current = matching[s]
        for c in instance.preferences[s]:
            if c == current:
                break
            rank = instance.schools[c].priority.rank
            worse = [t for t in members[c] if groups[t] is group and rank[t] > rank[s]]
            if worse:
                out.append(BlockingPair(s, c, max(worse, key=rank.__getitem__), IN_GROUP_SCOPE[group]))
    return out


def affected_students(pairs: Sequence[BlockingPair]) -> int:
    people = set()
    for bp in pairs:
        people.add(bp.student)
        if isinstance(bp.witness, int):
            people.add(bp.witness)
    return len(people)


class Verdict(enum.Enum):
    EQUAL = "equal"
    WEAKLY_DOMINATES = "weakly-dominates"
    PARETO_DOMINATES = "pareto-dominates"
    DOMINATED = "dominated"
    INCOMPARABLE = "incomparable"


@dataclass(frozen=True)
class DominanceVerdict:
    """How ``first`` compares with ``second`` for one group.

    ``WEAKLY_DOMINATES`` is reported when every member weakly prefers
    ``first`` and the matchings differ only through indifferent students;
    ``PARETO_DOMINATES`` when at least one member strictly prefers it.
    ``DOMINATED`` is the mirror case (``second`` Pareto dominates ``first``).
    """

    verdict: Verdict
    prefer_first: Tuple[int, ...]
    prefer_second: Tuple[int, ...]

    @property
    def first_weakly_dominates(self) -> bool:
        return not self.prefer_second

    @property
    def second_weakly_dominates(self) -> bool:
        return not self.prefer_first


def compare_for_group(instance: Instance, first: Matching, second: Matching, group: Group) -> DominanceVerdict:
    a, b = [], []
    diff = False
    for s in instance.students_in(group):
        x, y = first[s], second[s]
        if x == y:
            continue
        diff = True
        if prefers(instance, s, x, y):
            a.append(s)
        elif prefers(instance, s, y, x):
            b.append(s)
    if a and b:
        v = Verdict.INCOMPARABLE
    elif a:
        v = Verdict.PARETO_DOMINATES
    elif b:
        v = Verdict.DOMINATED
    elif diff:
        v = Verdict.WEAKLY_DOMINATES
    else:
        v = Verdict.EQUAL
    return DominanceVerdict(v, tuple(a), tuple(b))


def rank_change_histogram(instance: Instance, baseline: Matching, other: Matching, group: Group) -> Dict[Union[int, str], int]:
    """delta = rank under ``other`` minus rank under ``baseline`` (positive is worse).

    Moves between matched and unmatched go to GAINED_SEAT / LOST_SEAT;
    unmatched under both counts as delta 0.
    """
    hist: Counter = Counter()
    for s in instance.students_in(group):
        before = rank_in_preferences(instance, s, baseline[s])
        after = rank_in_preferences(instance, s, other[s])
        if before is UNMATCHED and after is UNMATCHED:
            hist[0] += 1
        elif before is UNMATCHED:
            hist[GAINED_SEAT] += 1
        elif after is UNMATCHED:
            hist[LOST_SEAT] += 1
        else:
            hist[after - before] += 1
    return dict(hist)


def rank_deltas(instance: Instance, baseline: Matching, other: Matching, students: Sequence[int]) -> List[int]:
    """Numeric rank change per student, counting unmatched as one past the list end."""
    out = []
    for s in students:
        worst = len(instance.preferences[s]) + 1
        before = rank_in_preferences(instance, s, baseline[s])
        after = rank_in_preferences(instance, s, other[s])
        out.append((worst if after is UNMATCHED else after) - (worst if before is UNMATCHED else before))
    return out


def disadvantaged_admits(instance: Instance, matching: Matching) -> List[int]:
    groups = instance.groups
    return [sum(groups[s] is DISADVANTAGED for s in m) for m in matching.by_school()]


@dataclass(frozen=True)
class Competitiveness:
    highly_competitive: bool
    slack: Tuple[int, ...]
    matching: Matching

    def __bool__(self) -> bool:
        return self.highly_competitive


def check_high_competitiveness(instance: Instance, q_r, mr_matching: Optional[Matching] = None) -> Competitiveness:
    """MR admits at most q_c^R disadvantaged students at every school."""
    q_r = as_reserve(q_r, instance.n_schools)
    mu = mr_matching if mr_matching is not None else matching_of(Mechanism.MR, instance, q_r)
    slack = tuple(r - k for r, k in zip(q_r.reserved, disadvantaged_admits(instance, mu)))
    return Competitiveness(all(x >= 0 for x in slack), slack, mu)


def check_smart_reserve(
    instance: Instance, q_r, base_matching: Optional[Matching] = None, aggregate: bool = False
) -> bool:
    """q_c^R covers the disadvantaged students BASE admits at every school.

    With ``aggregate`` only the totals over all schools are compared.
    """
    q_r = as_reserve(q_r, instance.n_schools)
    mu = base_matching if base_matching is not None else matching_of(Mechanism.BASE, instance)
    admits = disadvantaged_admits(instance, mu)
    if aggregate:
        return sum(q_r.reserved) >= sum(admits)
    return all(r >= k for r, k in zip(q_r.reserved, admits))


@dataclass(frozen=True)
class JsaVsMr:
    highly_competitive: bool
    verdict: DominanceVerdict
    violation: bool


def verify_jsa_dominates_mr(instance: Instance, q_r) -> JsaVsMr:
    """Compare JSA with MR for disadvantaged students; a highly competitive
    market where JSA does not weakly dominate is flagged as a violation."""
    q_r = as_reserve(q_r, instance.n_schools)
    hc = check_high_competitiveness(instance, q_r)
    jsa = matching_of(Mechanism.JSA, instance, q_r)
    verdict = compare_for_group(instance, jsa, hc.matching, DISADVANTAGED)
    return JsaVsMr(hc.highly_competitive, verdict, hc.highly_competitive and not verdict.first_weakly_dominates)


# -- manipulation and improvement probes --------------------------------------


@dataclass(frozen=True)
class Manipulation:
    student: int
    misreport: Tuple[int, ...]
    truthful_school: Optional[int]
    school: Optional[int]


def _misreports(prefs: Tuple[int, ...], budget: int, rng: random.Random):
    seen = {prefs}
    for k in range(len(prefs)):
        seen.add(prefs[:k])
        yield prefs[:k]
    if len(prefs) <= 4:
        for r in range(1, len(prefs) + 1):
            for perm in itertools.permutations(prefs, r):
                if perm not in seen:
                    seen.add(perm)
                    yield perm
        return
    for _ in range(budget):
        yield tuple(rng.sample(prefs, rng.randint(1, len(prefs))))


def probe_strategyproofness(tag, instance: Instance, q_r, budget: int = 200, rng_seed: int = 0) -> Optional[Manipulation]:
    """Search single-student misreports that win a truly better school.

    Misreports only use schools from the student's own list. Truncations are
    always tried; lists of at most 4 schools also try every ordering of every
    subset, longer lists draw ``budget`` random reorderings of subsets.
    """
    tag = Mechanism.parse(tag)
    q_r = as_reserve(q_r, instance.n_schools)
    truthful = matching_of(tag, instance, q_r)
    rng = random.Random(rng_seed)
    for s, prefs in enumerate(instance.preferences):
        if truthful[s] is not None and instance.pref_index(s, truthful[s]) == 0:
            continue
        for lie in _misreports(prefs, budget, rng):
            got = matching_of(tag, instance.with_preferences(s, lie), q_r)[s]
            if got is not None and instance.is_acceptable(s, got) and prefers(instance, s, got, truthful[s]):
                return Manipulation(s, lie, truthful[s], got)
    return None


@dataclass(frozen=True)
class ImprovementWitness:
    """Raising ``student`` over ``displaced`` at ``schools`` moves them from
    ``before`` to the strictly worse ``after``."""

    student: int
    displaced: int
    schools: Tuple[int, ...]
    before: Optional[int]
    after: Optional[int]


def _adjacent_swaps(order: Sequence[int], s: int):
    pos = list(order).index(s)
    if pos > 0:
        yield "up", order[pos - 1]
    if pos + 1 < len(order):
        yield "down", order[pos + 1]


def probe_respect_improvements(
    tag, instance: Instance, q_r, budget: int = 50, rng_seed: int = 0
) -> Optional[ImprovementWitness]:
    """Swap a student with an adjacent student in priority and watch their school.

    An upward swap that makes the student strictly worse off is a witness
    directly. A downward swap (under-performing) that makes them strictly
    better off is a witness too: the swap back is an improvement that hurts.
    With a universal priority the swap is applied at every school at once,
    otherwise at one school at a time. Up to ``budget`` students are probed.
    """
    tag = Mechanism.parse(tag)
    q_r = as_reserve(q_r, instance.n_schools)
    base = matching_of(tag, instance, q_r)
    students = list(range(instance.n_students))
    if len(students) > budget:
        students = random.Random(rng_seed).sample(students, budget)
    orders = [c.priority for c in instance.schools]
    universal = instance.universal_priority or len(set(orders)) <= 1
    school_sets = [tuple(range(instance.n_schools))] if universal else [(c,) for c in range(instance.n_schools)]
    for s in students:
        for schools in school_sets:
            for direction, t in _adjacent_swaps(orders[schools[0]].order, s):
                new_orders = list(orders)
                for c in schools:
                    new_orders[c] = orders[c].swapped(s, t)
                got = matching_of(tag, instance.with_priorities(new_orders), q_r)[s]
                if direction == "up" and prefers(instance, s, base[s], got):
                    return ImprovementWitness(s, t, schools, base[s], got)
                if direction == "down" and prefers(instance, s, got, base[s]):
                    return ImprovementWitness(s, t, schools, got, base[s])
    return None


# -- report -------------------------------------------------------------------


@dataclass
class AuditReport:
    mechanism: str
    blocking_pairs: Dict[str, List[BlockingPair]]
    blocking_counts: Dict[str, int]
    affected_students: int
    rank_change: Dict[str, Dict[Union[int, str], int]]
    admitted_proportion: List[float]
    disadvantaged_admits: List[int]
    highly_competitive: bool
    smart_reserve: bool


def audit_matching(
    instance: Instance,
    q_r,
    matching: Matching,
    mechanism: str = "",
    baseline: Optional[Matching] = None,
) -> AuditReport:
    q_r = as_reserve(q_r, instance.n_schools)
    base = baseline if baseline is not None else matching_of(Mechanism.BASE, instance)
    pairs = {
        "disadvantaged": find_in_group_blocking_pairs(instance, matching, DISADVANTAGED),
        "advantaged": find_in_group_blocking_pairs(instance, matching, ADVANTAGED),
    }
    admits = disadvantaged_admits(instance, matching)
    sizes = [len(m) for m in matching.by_school()]
    return AuditReport(
        mechanism=mechanism,
        blocking_pairs=pairs,
        blocking_counts={k: len(v) for k, v in pairs.items()},
        affected_students=affected_students(pairs["disadvantaged"] + pairs["advantaged"]),
        rank_change={
            "disadvantaged": rank_change_histogram(instance, base, matching, DISADVANTAGED),
            "advantaged": rank_change_histogram(instance, base, matching, ADVANTAGED),
        },
        admitted_proportion=[a / n if n else 0.0 for a, n in zip(admits, sizes)],
        disadvantaged_admits=admits,
        highly_competitive=check_high_competitiveness(instance, q_r).highly_competitive,
        smart_reserve=check_smart_reserve(instance, q_r, base),
    )
