"""Student-proposing deferred acceptance over arbitrary choice profiles, and
the three-stage Discovery Program mechanism."""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .choice import ChoiceContext, Mechanism, make_profile
from .model import (
    ADVANTAGED,
    DISADVANTAGED,
    Instance,
    Matching,
    ReservationQuotas,
    as_reserve,
    check_matching,
)

ChoiceProfile = Sequence[ChoiceContext]


class EngineError(RuntimeError):
    """Internal invariant broken (round cap exceeded, bad profile, ...)."""


@dataclass(frozen=True)
class RoundLog:
    round: int
    applications: Tuple[Tuple[int, int], ...]
    rejections: Tuple[Tuple[int, int], ...]


@dataclass(frozen=True)
class MechanismRun:
    mechanism: Mechanism
    instance: Instance
    reserve: ReservationQuotas
    matching: Matching
    trace: Tuple[RoundLog, ...] = ()
    stages: Tuple[Matching, ...] = ()


def _round_cap(instance: Instance) -> int:
    longest = max((len(p) for p in instance.preferences), default=0)
    return instance.n_students * longest + 1


def sda_rounds(
    instance: Instance,
    profile: ChoiceProfile,
    *,
    students: Optional[Iterable[int]] = None,
    trace: Optional[List[RoundLog]] = None,
) -> Matching:
    """Round-based DA: every unheld student applies to their best school that
    has not rejected them; each school keeps ``choose(held + applicants)``.

    ``students`` restricts the market to a subset of students. Pass a list as
    ``trace`` to collect per-round application/rejection logs.
    """
    if len(profile) != instance.n_schools:
        raise EngineError(f"profile has {len(profile)} contexts for {instance.n_schools} schools")
    prefs = instance.preferences
    active = range(instance.n_students) if students is None else sorted(set(students))
    pointer = {s: 0 for s in active}
    held: List[Set[int]] = [set() for _ in range(instance.n_schools)]
    free = [s for s in active if prefs[s]]
    cap = _round_cap(instance)
    k = 0
    while free:
        k += 1
        if k > cap:
            raise EngineError(f"deferred acceptance exceeded {cap} rounds")
        applicants: Dict[int, List[int]] = {}
        for s in free:
            applicants.setdefault(prefs[s][pointer[s]], []).append(s)
        free = []
        rejected_log = []
        for c, new in applicants.items():
            pool = held[c].union(new)
            keep = profile[c].choose(pool)
            held[c] = set(keep)
            for s in pool - keep:
                rejected_log.append((s, c))
                pointer[s] += 1
                if pointer[s] < len(prefs[s]):
                    free.append(s)
        if trace is not None:
            trace.append(
                RoundLog(
                    k,
                    tuple(sorted((s, c) for c, new in applicants.items() for s in new)),
                    tuple(sorted(rejected_log)),
                )
            )
        free.sort()
    assignment: List[Optional[int]] = [None] * instance.n_students
    for c, members in enumerate(held):
        for s in members:
            assignment[s] = c
    return Matching(tuple(assignment), instance.n_schools)


def sda_sequential(
    instance: Instance,
    profile: ChoiceProfile,
    stages: Sequence[Callable[[int, int], bool]] = (),
    rng: Optional[random.Random] = None,
    *,
    students: Optional[Iterable[int]] = None,
) -> Matching:
    """One-proposal-at-a-time DA, for responsive (BASE) profiles only.

    Each stage is a predicate ``(student, school) -> bool``; while a stage is
    active only free students whose next application passes it may propose.
    After the stages run dry the execution continues unrestricted. Among the
    eligible students the lowest id proposes, or a random one if ``rng`` is set.
    """
    if any(ctx.mechanism is not Mechanism.BASE for ctx in profile):
        raise EngineError("sequential DA requires responsive (BASE) choice contexts")
    prefs = instance.preferences
    active = range(instance.n_students) if students is None else sorted(set(students))
    pointer = {s: 0 for s in active}
    held: List[Set[int]] = [set() for _ in range(instance.n_schools)]
    free = {s for s in active if prefs[s]}
    cap = _round_cap(instance) * max(1, instance.n_students)
    steps = 0
    for allowed in list(stages) + [lambda s, c: True]:
        while True:
            eligible = sorted(s for s in free if allowed(s, prefs[s][pointer[s]]))
            if not eligible:
                break
            steps += 1
            if steps > cap:
                raise EngineError("sequential deferred acceptance did not terminate")
            s = rng.choice(eligible) if rng is not None else eligible[0]
            c = prefs[s][pointer[s]]
            free.discard(s)
            pool = held[c] | {s}
            keep = profile[c].choose(pool)
            held[c] = set(keep)
            for r in pool - keep:
                pointer[r] += 1
                if pointer[r] < len(prefs[r]):
                    free.add(r)
    assignment: List[Optional[int]] = [None] * instance.n_students
    for c, members in enumerate(held):
        for s in members:
            assignment[s] = c
    return Matching(tuple(assignment), instance.n_schools)


def _base_profile(instance: Instance, quotas: Sequence[int]) -> Tuple[ChoiceContext, ...]:
    return tuple(
        ChoiceContext(Mechanism.BASE, school.priority, q, 0, instance.groups)
        for school, q in zip(instance.schools, quotas)
    )


def run_disc(instance: Instance, q_r: ReservationQuotas | Sequence[int]) -> MechanismRun:
    """Discovery Program: general seats for everyone, then reserved seats for
    unmatched disadvantaged students, then vacant reserved seats for
    unmatched advantaged students."""
    q_r = as_reserve(q_r, instance.n_schools)
    mu1 = sda_rounds(instance, _base_profile(instance, q_r.general(instance)))
    stage2 = [s for s in instance.students_in(DISADVANTAGED) if mu1[s] is None]
    mu2 = sda_rounds(instance, _base_profile(instance, q_r.reserved), students=stage2)
    leftover = [r - len(m) for r, m in zip(q_r.reserved, mu2.by_school())]
    stage3 = [s for s in instance.students_in(ADVANTAGED) if mu1[s] is None]
    mu3 = sda_rounds(instance, _base_profile(instance, leftover), students=stage3)
    assignment = [
        a if a is not None else (b if b is not None else c)
        for a, b, c in zip(mu1.assignment, mu2.assignment, mu3.assignment)
    ]
    matching = Matching(tuple(assignment), instance.n_schools)
    check_matching(instance, matching)
    return MechanismRun(Mechanism.DISC, instance, q_r, matching, stages=(mu1, mu2, mu3))


def run_mechanism(
    tag: Mechanism | str,
    instance: Instance,
    q_r: ReservationQuotas | Sequence[int] | None = None,
    *,
    trace: bool = False,
) -> MechanismRun:
    tag = Mechanism.parse(tag)
    q_r = as_reserve(q_r, instance.n_schools)
    if tag is Mechanism.DISC:
        return run_disc(instance, q_r)
    log: Optional[List[RoundLog]] = [] if trace else None
    matching = sda_rounds(instance, make_profile(tag, instance, q_r), trace=log)
    check_matching(instance, matching)
    return MechanismRun(tag, instance, q_r, matching, trace=tuple(log or ()))


def matching_of(tag: Mechanism | str, instance: Instance, q_r=None) -> Matching:
    return run_mechanism(tag, instance, q_r).matching


def blocking_pairs_under(instance: Instance, profile: ChoiceProfile, matching: Matching) -> List[Tuple[int, int]]:
    """All (s, c) with c better than mu(s) for s and s in choose(mu(c) + {s})."""
    members = matching.by_school()
    out = []
    for s, prefs in enumerate(instance.preferences):
        current = matching[s]
        for c in prefs:
            if c == current:
                break
            if s in profile[c].choose(members[c] | {s}):
                out.append((s, c))
    return out
