"""Markets, priorities, reservation quotas and matchings.

Students and schools are dense integer indices. External string ids only
exist at the I/O layer (see :mod:`reserved_seats.data`).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple


class Group(enum.Enum):
    ADVANTAGED = "M"
    DISADVANTAGED = "m"


ADVANTAGED = Group.ADVANTAGED
DISADVANTAGED = Group.DISADVANTAGED


class _Unmatched:
    """Rank of the outside option; compares worse (larger) than any list rank."""

    _instance: Optional["_Unmatched"] = None

    def __new__(cls) -> "_Unmatched":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNMATCHED"

    def __reduce__(self):
        return (_Unmatched, ())

    def __lt__(self, other) -> bool:
        return False

    def __le__(self, other) -> bool:
        return other is self

    def __gt__(self, other) -> bool:
        return other is not self

    def __ge__(self, other) -> bool:
        return True


UNMATCHED = _Unmatched()


class UnacceptableAssignment(ValueError):
    """A student was matched to (or queried at) a school missing from their list."""


class MatchingError(ValueError):
    """A matching breaks capacity, uniqueness or acceptability."""


@dataclass(frozen=True)
class PriorityOrder:
    """Strict order over students; ``rank[s] == 0`` is the top student."""

    rank: Tuple[int, ...]

    @classmethod
    def from_order(cls, order: Sequence[int]) -> "PriorityOrder":
        rank = [0] * len(order)
        for pos, s in enumerate(order):
            rank[s] = pos
        return cls(tuple(rank))

    @property
    def order(self) -> Tuple[int, ...]:
        out = [0] * len(self.rank)
        for s, pos in enumerate(self.rank):
            out[pos] = s
        return tuple(out)

    def __len__(self) -> int:
        return len(self.rank)

    def prefers(self, s1: int, s2: int) -> bool:
        return self.rank[s1] < self.rank[s2]

    def is_valid(self) -> bool:
        return sorted(self.rank) == list(range(len(self.rank)))

    def swapped(self, s1: int, s2: int) -> "PriorityOrder":
        rank = list(self.rank)
        rank[s1], rank[s2] = rank[s2], rank[s1]
        return PriorityOrder(tuple(rank))


@dataclass(frozen=True)
class School:
    quota: int
    priority: PriorityOrder


@dataclass(frozen=True)
class Instance:
    """A market: student groups and preference lists, school quotas and priorities."""

    groups: Tuple[Group, ...]
    preferences: Tuple[Tuple[int, ...], ...]
    schools: Tuple[School, ...]
    universal_priority: bool = False
    _pref_rank: Tuple[Dict[int, int], ...] = field(
        init=False, repr=False, compare=False, hash=False
    )

    def __post_init__(self):
        object.__setattr__(
            self,
            "_pref_rank",
            tuple({c: i for i, c in enumerate(p)} for p in self.preferences),
        )

    @classmethod
    def build(
        cls,
        groups: Sequence[Group],
        preferences: Sequence[Sequence[int]],
        quotas: Sequence[int],
        priority: Sequence[int] | Sequence[Sequence[int]],
    ) -> "Instance":
        """Build from plain lists.

        ``priority`` is either one order (most preferred student first) shared
        by every school, or one order per school.
        """
        if len(priority) and isinstance(priority[0], (list, tuple)):
            orders = [PriorityOrder.from_order(o) for o in priority]
            universal = len(set(orders)) <= 1
        else:
            orders = [PriorityOrder.from_order(priority)] * len(quotas)
            universal = True
        return cls(
            groups=tuple(groups),
            preferences=tuple(tuple(p) for p in preferences),
            schools=tuple(School(q, o) for q, o in zip(quotas, orders)),
            universal_priority=universal,
        )

    @property
    def n_students(self) -> int:
        return len(self.groups)

    @property
    def n_schools(self) -> int:
        return len(self.schools)

    @property
    def quotas(self) -> Tuple[int, ...]:
        return tuple(c.quota for c in self.schools)

    def students_in(self, group: Group) -> List[int]:
        return [s for s, g in enumerate(self.groups) if g is group]

    def is_acceptable(self, student: int, school: int) -> bool:
        return school in self._pref_rank[student]

    def pref_index(self, student: int, school: int) -> int:
        """0-based position of ``school`` in the student's list."""
        try:
            return self._pref_rank[student][school]
        except KeyError:
            raise UnacceptableAssignment(
                f"school {school} is not on student {student}'s list"
            ) from None

    def with_preferences(self, student: int, prefs: Sequence[int]) -> "Instance":
        new = list(self.preferences)
        new[student] = tuple(prefs)
        return Instance(self.groups, tuple(new), self.schools, self.universal_priority)

    def with_priorities(self, orders: Sequence[PriorityOrder]) -> "Instance":
        schools = tuple(School(c.quota, o) for c, o in zip(self.schools, orders))
        return Instance(
            self.groups, self.preferences, schools, len(set(orders)) <= 1
        )


@dataclass(frozen=True)
class ReservationQuotas:
    """Reserved seats per school. General seats are always ``q_c - q_c^R``."""

    reserved: Tuple[int, ...]

    @classmethod
    def zeros(cls, n_schools: int) -> "ReservationQuotas":
        return cls((0,) * n_schools)

    def __getitem__(self, school: int) -> int:
        return self.reserved[school]

    def __len__(self) -> int:
        return len(self.reserved)

    def general(self, instance: Instance) -> Tuple[int, ...]:
        return tuple(c.quota - r for c, r in zip(instance.schools, self.reserved))


def as_reserve(q_r: ReservationQuotas | Sequence[int] | None, n_schools: int) -> ReservationQuotas:
    if q_r is None:
        return ReservationQuotas.zeros(n_schools)
    if isinstance(q_r, ReservationQuotas):
        return q_r
    return ReservationQuotas(tuple(int(x) for x in q_r))


@dataclass(frozen=True)
class Matching:
    """Student -> school (or ``None``) with an inverse view."""

    assignment: Tuple[Optional[int], ...]
    n_schools: int

    @classmethod
    def empty(cls, n_students: int, n_schools: int) -> "Matching":
        return cls((None,) * n_students, n_schools)

    @classmethod
    def from_pairs(
        cls, pairs: Iterable[Tuple[int, int]], n_students: int, n_schools: int
    ) -> "Matching":
        assignment: List[Optional[int]] = [None] * n_students
        for s, c in pairs:
            if assignment[s] is not None:
                raise MatchingError(f"student {s} assigned twice")
            assignment[s] = c
        return cls(tuple(assignment), n_schools)

    def __getitem__(self, student: int) -> Optional[int]:
        return self.assignment[student]

    def students_of(self, school: int) -> FrozenSet[int]:
        return frozenset(s for s, c in enumerate(self.assignment) if c == school)

    def by_school(self) -> List[FrozenSet[int]]:
        out: List[set] = [set() for _ in range(self.n_schools)]
        for s, c in enumerate(self.assignment):
            if c is not None:
                out[c].add(s)
        return [frozenset(x) for x in out]

    def pairs(self) -> Iterator[Tuple[int, int]]:
        for s, c in enumerate(self.assignment):
            if c is not None:
                yield s, c

    def __len__(self) -> int:
        return sum(c is not None for c in self.assignment)


def rank_in_preferences(instance: Instance, student: int, school: Optional[int]):
    """1-based rank of ``school`` on the student's list, or ``UNMATCHED`` for None."""
    if not 0 <= student < instance.n_students:
        raise IndexError(f"no student {student}")
    if school is None:
        return UNMATCHED
    return instance.pref_index(student, school) + 1


def prefers(instance: Instance, student: int, a: Optional[int], b: Optional[int]) -> bool:
    """True iff the student strictly prefers option ``a`` to ``b``."""
    return rank_in_preferences(instance, student, a) < rank_in_preferences(instance, student, b)


def validate_instance(
    instance: Instance, reserve: ReservationQuotas | Sequence[int] | None = None
) -> List[str]:
    """Return one message per broken invariant; empty means valid."""
    problems: List[str] = []
    n, m = instance.n_students, instance.n_schools
    if len(instance.preferences) != n:
        problems.append(f"{len(instance.preferences)} preference lists for {n} students")
    for s, g in enumerate(instance.groups):
        if not isinstance(g, Group):
            problems.append(f"student {s}: group {g!r} is not a Group")
    for s, prefs in enumerate(instance.preferences):
        if len(set(prefs)) != len(prefs):
            problems.append(f"student {s}: duplicate school in preference list")
        for c in prefs:
            if not (isinstance(c, int) and 0 <= c < m):
                problems.append(f"student {s}: unknown school {c!r} in preference list")
    for c, school in enumerate(instance.schools):
        if school.quota < 0:
            problems.append(f"school {c}: negative quota {school.quota}")
        if len(school.priority) != n or not school.priority.is_valid():
            problems.append(f"school {c}: priority is not a strict order over {n} students")
    if instance.universal_priority and len({c.priority for c in instance.schools}) > 1:
        problems.append("universal_priority set but schools have different priorities")
    if reserve is not None:
        reserve = as_reserve(reserve, m)
        if len(reserve) != m:
            problems.append(f"{len(reserve)} reservation quotas for {m} schools")
        for c, (school, r) in enumerate(zip(instance.schools, reserve.reserved)):
            if r < 0:
                problems.append(f"school {c}: negative reserved quota {r}")
            elif r > school.quota:
                problems.append(f"school {c}: reserved quota {r} exceeds quota {school.quota}")
    return problems


def check_matching(instance: Instance, matching: Matching) -> None:
    """Raise if the matching breaks capacity, size or acceptability."""
    if len(matching.assignment) != instance.n_students:
        raise MatchingError("matching size differs from the number of students")
    load = [0] * instance.n_schools
    for s, c in matching.pairs():
        if not 0 <= c < instance.n_schools:
            raise MatchingError(f"student {s} matched to unknown school {c}")
        if not instance.is_acceptable(s, c):
            raise UnacceptableAssignment(f"student {s} matched to unlisted school {c}")
        load[c] += 1
    for c, (k, school) in enumerate(zip(load, instance.schools)):
        if k > school.quota:
            raise MatchingError(f"school {c} holds {k} students over quota {school.quota}")
