"""School-side choice rules (baseline, minority reserve, joint seat allocation)
and checkers for substitutability, consistency and q-acceptance.

Each rule is a sequence of passes. A pass takes the best remaining
candidates passing a filter, up to a count; a count of ``None`` fills the
school up to its quota.
"""
from __future__ import annotations

import enum
import itertools
import random
from dataclasses import dataclass
from typing import Callable, Collection, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .model import DISADVANTAGED, Group, Instance, PriorityOrder, ReservationQuotas, as_reserve


class Mechanism(enum.Enum):
    BASE = "base"
    DISC = "disc"
    MR = "mr"
    JSA = "jsa"

    @classmethod
    def parse(cls, value: "str | Mechanism") -> "Mechanism":
        if isinstance(value, Mechanism):
            return value
        return cls(value.lower())


EXHAUSTIVE_LIMIT = 12

Pass = Tuple[Callable[[int], bool], Optional[int]]


def max_select(candidates: Iterable[int], priority: PriorityOrder, k: int) -> FrozenSet[int]:
    """The ``min(k, |candidates|)`` candidates with the best priority."""
    if k <= 0:
        return frozenset()
    rank = priority.rank
    return frozenset(sorted(candidates, key=rank.__getitem__)[:k])


@dataclass(frozen=True)
class ChoiceContext:
    mechanism: Mechanism
    priority: PriorityOrder
    quota: int
    reserved: int
    groups: Tuple[Group, ...]

    def __post_init__(self):
        if self.mechanism is Mechanism.DISC:
            raise ValueError("DISC is a three-stage mechanism, not a choice rule")
        if not 0 <= self.reserved <= self.quota:
            raise ValueError(f"reserved quota {self.reserved} outside [0, {self.quota}]")

    @property
    def general(self) -> int:
        return self.quota - self.reserved

    def passes(self) -> List[Pass]:
        groups = self.groups

        def anyone(s: int) -> bool:
            return True

        def disadvantaged(s: int) -> bool:
            return groups[s] is DISADVANTAGED

        if self.mechanism is Mechanism.BASE:
            return [(anyone, None)]
        if self.mechanism is Mechanism.MR:
            return [(disadvantaged, self.reserved), (anyone, None)]
        return [(anyone, self.general), (disadvantaged, self.reserved), (anyone, None)]

    def choose(self, applicants: Iterable[int]) -> FrozenSet[int]:
        return run_passes(self.passes(), applicants, self.priority, self.quota)


def run_passes(
    passes: Sequence[Pass], applicants: Iterable[int], priority: PriorityOrder, quota: int
) -> FrozenSet[int]:
    # Sorting once keeps every pass a single linear scan.
    remaining = sorted(set(applicants), key=priority.rank.__getitem__)
    chosen: List[int] = []
    for keep, count in passes:
        room = quota - len(chosen)
        if count is not None:
            room = min(room, count)
        if room <= 0:
            continue
        rest = []
        for s in remaining:
            if room > 0 and keep(s):
                chosen.append(s)
                room -= 1
            else:
                rest.append(s)
        remaining = rest
    return frozenset(chosen)


def choose(ctx: ChoiceContext, applicants: Iterable[int]) -> FrozenSet[int]:
    return ctx.choose(applicants)


def make_context(
    mechanism: Mechanism | str, instance: Instance, school: int, q_r: ReservationQuotas | Sequence[int] | None = None
) -> ChoiceContext:
    mechanism = Mechanism.parse(mechanism)
    q_r = as_reserve(q_r, instance.n_schools)
    c = instance.schools[school]
    reserved = 0 if mechanism is Mechanism.BASE else q_r[school]
    return ChoiceContext(mechanism, c.priority, c.quota, reserved, instance.groups)


def make_profile(
    mechanism: Mechanism | str, instance: Instance, q_r: ReservationQuotas | Sequence[int] | None = None
) -> Tuple[ChoiceContext, ...]:
    return tuple(make_context(mechanism, instance, c, q_r) for c in range(instance.n_schools))


# -- axiom checkers ----------------------------------------------------------
#
# Checkers accept anything with ``choose(set) -> set`` and ``quota``. Up to
# EXHAUSTIVE_LIMIT students every subset is evaluated once; removing one
# element at a time is enough, because any S2 within S1 is reached by a chain
# of single removals and both axioms compose along such chains.


def _table(ctx, universe: Sequence[int]) -> List[int]:
    """choose() of every subset of ``universe``, as bitmasks over its positions."""
    index = {s: i for i, s in enumerate(universe)}
    out = []
    for mask in range(1 << len(universe)):
        members = [s for i, s in enumerate(universe) if mask >> i & 1]
        picked = 0
        for s in ctx.choose(members):
            picked |= 1 << index[s]
        out.append(picked)
    return out


def _unmask(universe: Sequence[int], mask: int) -> FrozenSet[int]:
    return frozenset(s for i, s in enumerate(universe) if mask >> i & 1)


def _random_subset(rng: random.Random, pool: Sequence[int]) -> List[int]:
    return [s for s in pool if rng.random() < 0.5]


def _subst_exhaustive(universe: Sequence[int], table: List[int]):
    for mask, picked in enumerate(table):
        for j in range(len(universe)):
            bit = 1 << j
            if not mask & bit:
                continue
            # chosen from S1 but dropped once j leaves
            lost = picked & ~bit & ~table[mask & ~bit]
            if lost:
                i = (lost & -lost).bit_length() - 1
                s1 = _unmask(universe, mask)
                return s1, s1 - {universe[j], universe[i]}, universe[i]
    return None


def _cons_exhaustive(universe: Sequence[int], table: List[int]):
    for mask, picked in enumerate(table):
        for j in range(len(universe)):
            if mask >> j & 1 and not picked >> j & 1 and table[mask & ~(1 << j)] != picked:
                s1 = _unmask(universe, mask)
                return s1, s1 - {universe[j]}
    return None


def _accept_exhaustive(universe: Sequence[int], table: List[int], quota: int):
    for mask, picked in enumerate(table):
        if bin(picked).count("1") != min(quota, bin(mask).count("1")):
            return _unmask(universe, mask)
    return None


def check_substitutable(ctx, universe: Collection[int], budget: int = 10_000, rng_seed: int = 0):
    """Return ``(S1, S2, s)`` with s chosen from S1 but not from S2 + {s}, or None."""
    universe = sorted(universe)
    if len(universe) <= EXHAUSTIVE_LIMIT:
        return _subst_exhaustive(universe, _table(ctx, universe))
    rng = random.Random(rng_seed)
    for _ in range(budget):
        s1 = _random_subset(rng, universe)
        picked = ctx.choose(s1)
        if not picked:
            continue
        s = rng.choice(sorted(picked))
        s2 = _random_subset(rng, [t for t in s1 if t != s])
        if s not in ctx.choose(s2 + [s]):
            return frozenset(s1), frozenset(s2), s
    return None


def check_consistent(ctx, universe: Collection[int], budget: int = 10_000, rng_seed: int = 0):
    """Return ``(S1, S2)`` with choose(S1) within S2 within S1 but choose(S2) != choose(S1)."""
    universe = sorted(universe)
    if len(universe) <= EXHAUSTIVE_LIMIT:
        return _cons_exhaustive(universe, _table(ctx, universe))
    rng = random.Random(rng_seed)
    for _ in range(budget):
        s1 = _random_subset(rng, universe)
        picked = ctx.choose(s1)
        s2 = set(picked) | set(_random_subset(rng, [t for t in s1 if t not in picked]))
        if ctx.choose(s2) != picked:
            return frozenset(s1), frozenset(s2)
    return None


def check_q_acceptant(ctx, universe: Collection[int], budget: int = 10_000, rng_seed: int = 0):
    """Return a set S1 whose choice is not of size ``min(quota, |S1|)``, or None."""
    universe = sorted(universe)
    if len(universe) <= EXHAUSTIVE_LIMIT:
        return _accept_exhaustive(universe, _table(ctx, universe), ctx.quota)
    rng = random.Random(rng_seed)
    for _ in range(budget):
        s1 = _random_subset(rng, universe)
        if len(ctx.choose(s1)) != min(ctx.quota, len(s1)):
            return frozenset(s1)
    return None


@dataclass(frozen=True)
class AxiomReport:
    """Counterexamples per axiom (None where the axiom holds)."""

    substitutability: Optional[tuple]
    consistency: Optional[tuple]
    q_acceptance: Optional[frozenset]

    def __bool__(self) -> bool:
        return self.substitutability is None and self.consistency is None and self.q_acceptance is None


def check_axioms(ctx, universe: Collection[int], budget: int = 10_000, rng_seed: int = 0) -> AxiomReport:
    """All three checks; small universes share one table of choices."""
    universe = sorted(universe)
    if len(universe) > EXHAUSTIVE_LIMIT:
        return AxiomReport(
            check_substitutable(ctx, universe, budget, rng_seed),
            check_consistent(ctx, universe, budget, rng_seed),
            check_q_acceptant(ctx, universe, budget, rng_seed),
        )
    table = _table(ctx, universe)
    return AxiomReport(
        _subst_exhaustive(universe, table),
        _cons_exhaustive(universe, table),
        _accept_exhaustive(universe, table, ctx.quota),
    )


def definitional_violations(ctx, universe: Sequence[int]) -> Tuple[int, int, int]:
    """Count axiom violations straight from the definitions, over all subset pairs.

    Slow (3^n pairs); used as a test oracle for the fast checkers.
    """
    universe = sorted(universe)
    subsets = [
        frozenset(c) for r in range(len(universe) + 1) for c in itertools.combinations(universe, r)
    ]
    choice = {s1: frozenset(ctx.choose(s1)) for s1 in subsets}
    subst = cons = accept = 0
    for s1 in subsets:
        c1 = choice[s1]
        if len(c1) != min(ctx.quota, len(s1)):
            accept += 1
        for s2 in subsets:
            if not s2 <= s1:
                continue
            for s in c1:
                if s not in choice[s2 | {s}]:
                    subst += 1
            if c1 <= s2 and choice[s2] != c1:
                cons += 1
    return subst, cons, accept
