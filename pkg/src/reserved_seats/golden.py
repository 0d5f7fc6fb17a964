"""Hand-worked markets with their published outcomes.

Every market here uses one priority order shared by all schools. Expected
matchings are transcribed as written, not computed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Mapping, Sequence, Tuple

from .choice import Mechanism
from .model import ADVANTAGED, DISADVANTAGED, Instance, Matching, ReservationQuotas


@dataclass(frozen=True)
class GoldenExample:
    name: str
    students: Tuple[str, ...]
    schools: Tuple[str, ...]
    instance: Instance
    reserve: ReservationQuotas
    expected: Mapping[Mechanism, Matching]

    def student(self, name: str) -> int:
        return self.students.index(name)

    def school(self, name: str) -> int:
        return self.schools.index(name)

    def matching(self, pairs: Sequence[Tuple[str, str]]) -> Matching:
        return Matching.from_pairs(
            [(self.student(s), self.school(c)) for s, c in pairs],
            len(self.students),
            len(self.schools),
        )


def _example(
    name: str,
    prefs: Dict[str, List[str]],
    quotas: Dict[str, int],
    reserved: Dict[str, int],
    priority: str,
    expected: Dict[Mechanism, List[Tuple[str, str]]],
) -> GoldenExample:
    students = tuple(prefs)
    schools = tuple(quotas)
    groups = [DISADVANTAGED if s.startswith("sm") else ADVANTAGED for s in students]
    instance = Instance.build(
        groups,
        [[schools.index(c) for c in prefs[s]] for s in students],
        [quotas[c] for c in schools],
        [students.index(s) for s in priority.split()],
    )
    reserve = ReservationQuotas(tuple(reserved[c] for c in schools))
    ex = GoldenExample(name, students, schools, instance, reserve, {})
    object.__setattr__(ex, "expected", {m: ex.matching(p) for m, p in expected.items()})
    return ex


DISC_ALL_WORSE = _example(
    "disc_all_worse",
    prefs={"sM1": ["c1", "c2"], "sM2": ["c1", "c2"], "sm1": ["c2", "c1"]},
    quotas={"c1": 2, "c2": 1},
    reserved={"c1": 1, "c2": 0},
    priority="sM1 sM2 sm1",
    expected={
        Mechanism.BASE: [("sM1", "c1"), ("sM2", "c1"), ("sm1", "c2")],
        Mechanism.DISC: [("sM1", "c1"), ("sM2", "c2"), ("sm1", "c1")],
    },
)

DISC_SMART_RESERVE_HURTS = _example(
    "disc_smart_reserve_hurts",
    prefs={s: ["c1", "c2"] for s in ["sM1", "sM2", "sM3", "sm1", "sm2", "sm3"]},
    quotas={"c1": 3, "c2": 2},
    reserved={"c1": 1, "c2": 1},
    priority="sM1 sM2 sm1 sM3 sm2 sm3",
    expected={
        Mechanism.BASE: [("sM1", "c1"), ("sM2", "c1"), ("sm1", "c1"), ("sM3", "c2"), ("sm2", "c2")],
        Mechanism.DISC: [("sM1", "c1"), ("sM2", "c1"), ("sm2", "c1"), ("sm1", "c2"), ("sm3", "c2")],
    },
)

MR_JSA_INCOMPARABLE = _example(
    "mr_jsa_incomparable",
    prefs={
        "sM1": ["c2"],
        "sM2": ["c1", "c3"],
        "sM3": ["c4", "c3"],
        "sm1": ["c2", "c1"],
        "sm2": ["c4"],
        "sm3": ["c3"],
        "sm4": ["c4"],
    },
    quotas={"c1": 1, "c2": 1, "c3": 1, "c4": 2},
    reserved={"c1": 0, "c2": 1, "c3": 0, "c4": 1},
    priority="sM1 sm1 sM2 sm2 sM3 sm3 sm4",
    expected={
        Mechanism.BASE: [("sm1", "c1"), ("sM1", "c2"), ("sM2", "c3"), ("sm2", "c4"), ("sM3", "c4")],
        Mechanism.MR: [("sM2", "c1"), ("sm1", "c2"), ("sm3", "c3"), ("sm2", "c4"), ("sM3", "c4")],
        Mechanism.JSA: [("sM2", "c1"), ("sm1", "c2"), ("sM3", "c3"), ("sm2", "c4"), ("sm4", "c4")],
    },
)

RESERVES_HURT = _example(
    "reserves_hurt",
    prefs={"sM1": ["c1", "c3"], "sm1": ["c3", "c1"], "sm2": ["c1", "c2"]},
    quotas={"c1": 1, "c2": 1, "c3": 1},
    reserved={"c1": 1, "c2": 0, "c3": 0},
    priority="sM1 sm1 sm2",
    expected={
        Mechanism.BASE: [("sM1", "c1"), ("sm2", "c2"), ("sm1", "c3")],
        Mechanism.MR: [("sm1", "c1"), ("sm2", "c2"), ("sM1", "c3")],
        Mechanism.JSA: [("sm1", "c1"), ("sm2", "c2"), ("sM1", "c3")],
    },
)

RESERVES_HELP = _example(
    "reserves_help",
    prefs={s: ["c1", "c2"] for s in ["sM1", "sm1", "sm2"]},
    quotas={"c1": 1, "c2": 1},
    reserved={"c1": 1, "c2": 1},
    priority="sM1 sm1 sm2",
    expected={
        Mechanism.BASE: [("sM1", "c1"), ("sm1", "c2")],
        Mechanism.MR: [("sm1", "c1"), ("sm2", "c2")],
        Mechanism.DISC: [("sm1", "c1"), ("sm2", "c2")],
        Mechanism.JSA: [("sm1", "c1"), ("sm2", "c2")],
    },
)

_B3_SAME = [("sM1", "c1"), ("sm1", "c1"), ("sM2", "c2"), ("sm2", "c2")]
DISC_INCOMPARABLE = _example(
    "disc_incomparable",
    prefs={s: ["c1", "c2"] for s in ["sM1", "sM2", "sm1", "sm2"]},
    quotas={"c1": 2, "c2": 2},
    reserved={"c1": 1, "c2": 1},
    priority="sM1 sm1 sM2 sm2",
    expected={
        Mechanism.BASE: _B3_SAME,
        Mechanism.MR: _B3_SAME,
        Mechanism.JSA: _B3_SAME,
        Mechanism.DISC: [("sM1", "c1"), ("sm2", "c1"), ("sm1", "c2"), ("sM2", "c2")],
    },
)

ALL_EXAMPLES: Tuple[GoldenExample, ...] = (
    DISC_ALL_WORSE,
    DISC_SMART_RESERVE_HURTS,
    MR_JSA_INCOMPARABLE,
    RESERVES_HURT,
    RESERVES_HELP,
    DISC_INCOMPARABLE,
)
