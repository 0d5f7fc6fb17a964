"""Split-school auxiliary markets.

Each school c becomes a general part (aux index ``2c``, quota ``q_c - q_c^R``)
and a reserved part (aux index ``2c + 1``, quota ``q_c^R``). The reserved
part ranks every disadvantaged student above every advantaged one. MR, DISC
and JSA then differ only in how each student's list is expanded, and running
plain deferred acceptance on the auxiliary market reproduces the mechanism.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .choice import Mechanism, make_profile
from .engine import matching_of, sda_rounds, sda_sequential
from .model import (
    DISADVANTAGED,
    Instance,
    Matching,
    MatchingError,
    PriorityOrder,
    ReservationQuotas,
    School,
    as_reserve,
)

GENERAL, RESERVED = "general", "reserved"


def general_part(school: int) -> int:
    return 2 * school


def reserved_part(school: int) -> int:
    return 2 * school + 1


def omega(aux_school: int) -> int:
    return aux_school // 2


def seat_type(aux_school: int) -> str:
    return RESERVED if aux_school % 2 else GENERAL


@dataclass(frozen=True)
class AuxInstance:
    base: Instance
    reserve: ReservationQuotas
    tag: Mechanism
    instance: Instance

    @property
    def omega(self) -> Tuple[int, ...]:
        return tuple(omega(c) for c in range(self.instance.n_schools))


def expand_preferences(prefs: Sequence[int], tag: Mechanism) -> Tuple[int, ...]:
    if tag is Mechanism.MR:
        return tuple(x for c in prefs for x in (reserved_part(c), general_part(c)))
    if tag is Mechanism.JSA:
        return tuple(x for c in prefs for x in (general_part(c), reserved_part(c)))
    if tag is Mechanism.DISC:
        return tuple(general_part(c) for c in prefs) + tuple(reserved_part(c) for c in prefs)
    raise ValueError(f"no auxiliary market for {tag}")


def reserved_priority(priority: PriorityOrder, groups) -> PriorityOrder:
    order = priority.order
    return PriorityOrder.from_order(
        [s for s in order if groups[s] is DISADVANTAGED]
        + [s for s in order if groups[s] is not DISADVANTAGED]
    )


def build_aux(instance: Instance, q_r, tag: Mechanism | str) -> AuxInstance:
    tag = Mechanism.parse(tag)
    q_r = as_reserve(q_r, instance.n_schools)
    schools: List[School] = []
    for c, school in enumerate(instance.schools):
        schools.append(School(school.quota - q_r[c], school.priority))
        schools.append(School(q_r[c], reserved_priority(school.priority, instance.groups)))
    aux = Instance(
        groups=instance.groups,
        preferences=tuple(expand_preferences(p, tag) for p in instance.preferences),
        schools=tuple(schools),
        universal_priority=False,
    )
    return AuxInstance(instance, q_r, tag, aux)


def solve_aux(aux: AuxInstance) -> Matching:
    return sda_rounds(aux.instance, make_profile(Mechanism.BASE, aux.instance))


def project(aux_matching: Matching, n_schools: int, base: Optional[Instance] = None) -> Matching:
    """Map each student's auxiliary school to its original school."""
    assignment = tuple(None if c is None else omega(c) for c in aux_matching.assignment)
    out = Matching(assignment, n_schools)
    if base is not None:
        for c, members in enumerate(out.by_school()):
            if len(members) > base.schools[c].quota:
                raise MatchingError(f"projection overfills school {c}")
    return out


def aux_route(instance: Instance, q_r, tag: Mechanism | str) -> Matching:
    aux = build_aux(instance, q_r, tag)
    return project(solve_aux(aux), instance.n_schools, instance)


def seat_types(instance: Instance, q_r, tag: Mechanism | str) -> Tuple[Optional[str], ...]:
    """general/reserved per student as given by the auxiliary market (None if
    unmatched). BASE has only general seats."""
    tag = Mechanism.parse(tag)
    if tag is Mechanism.BASE:
        return tuple(None if c is None else GENERAL for c in matching_of(tag, instance).assignment)
    aux = build_aux(instance, q_r, tag)
    return tuple(None if c is None else seat_type(c) for c in solve_aux(aux).assignment)


@dataclass(frozen=True)
class Equivalence:
    equal: bool
    direct: Matching
    auxiliary: Matching
    diff: Tuple[Tuple[int, Optional[int], Optional[int]], ...]

    def __bool__(self) -> bool:
        return self.equal


def check_equivalence(instance: Instance, q_r, tag: Mechanism | str) -> Equivalence:
    tag = Mechanism.parse(tag)
    direct = matching_of(tag, instance, q_r)
    via_aux = aux_route(instance, q_r, tag)
    diff = tuple(
        (s, a, b)
        for s, (a, b) in enumerate(zip(direct.assignment, via_aux.assignment))
        if a != b
    )
    return Equivalence(not diff, direct, via_aux, diff)


def run_disc_staged(instance: Instance, q_r) -> Matching:
    """DISC via the auxiliary market, proposing in three stages: general-seat
    applications first, then disadvantaged students, then everyone."""
    aux = build_aux(instance, q_r, Mechanism.DISC)
    groups = instance.groups
    stages = [
        lambda s, c: seat_type(c) == GENERAL,
        lambda s, c: groups[s] is DISADVANTAGED,
    ]
    profile = make_profile(Mechanism.BASE, aux.instance)
    return project(sda_sequential(aux.instance, profile, stages), instance.n_schools, instance)
