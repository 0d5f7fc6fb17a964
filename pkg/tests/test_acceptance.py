"""One test per acceptance criterion, each at its stated tolerance and time budget.

Every test records a PASS/FAIL line, printed at the end of the session.
"""
import math
import random
import time
from statistics import median

import numpy as np

from conftest import ACCEPTANCE, random_instance
from reserved_seats.audit import (
    Verdict,
    check_high_competitiveness,
    check_smart_reserve,
    compare_for_group,
    find_in_group_blocking_pairs,
    probe_respect_improvements,
    probe_strategyproofness,
    rank_deltas,
    verify_jsa_dominates_mr,
)
from reserved_seats.auxiliary import check_equivalence
from reserved_seats.choice import ChoiceContext, Mechanism, check_axioms
from reserved_seats.engine import matching_of
from reserved_seats.golden import ALL_EXAMPLES, DISC_SMART_RESERVE_HURTS, MR_JSA_INCOMPARABLE
from reserved_seats.market_gen import (
    balls_in_bins_stats,
    check_thm44_condition,
    erdos_renyi_cover_prediction,
    generate_market,
    nyc_config,
)
from reserved_seats.model import ADVANTAGED, DISADVANTAGED, PriorityOrder

BASE, DISC, MR, JSA = Mechanism.BASE, Mechanism.DISC, Mechanism.MR, Mechanism.JSA


def record(name, ok, detail):
    ACCEPTANCE.append((name, bool(ok), detail))
    print(f"{'PASS' if ok else 'FAIL'} criterion {name}: {detail}")
    assert ok, detail


def test_1_golden_examples():
    start = time.perf_counter()
    wrong = []
    for ex in ALL_EXAMPLES:
        for mech, expected in ex.expected.items():
            if matching_of(mech, ex.instance, ex.reserve) != expected:
                wrong.append(f"{ex.name}/{mech.value}")
    ex = DISC_SMART_RESERVE_HURTS
    pairs = find_in_group_blocking_pairs(ex.instance, matching_of(DISC, ex.instance, ex.reserve), DISADVANTAGED)
    if [(p.student, p.school) for p in pairs] != [(ex.student("sm1"), ex.school("c1"))]:
        wrong.append("disc_smart_reserve_hurts blocking pair")
    elapsed = time.perf_counter() - start
    record("1 golden", not wrong and elapsed < 1.0,
           f"{sum(len(e.expected) for e in ALL_EXAMPLES)} matchings + blocking pair, mismatches={wrong}, {elapsed:.3f}s")


def test_2_axioms():
    start = time.perf_counter()
    bad, checked = [], 0
    for seed in range(100):
        rng = random.Random(seed)
        n = rng.randint(1, 12)
        groups = tuple(rng.choice([ADVANTAGED, DISADVANTAGED]) for _ in range(n))
        priority = PriorityOrder.from_order(rng.sample(range(n), n))
        quota = rng.randint(0, n)
        reserved = rng.randint(0, quota)
        for mech in (BASE, MR, JSA):
            ctx = ChoiceContext(mech, priority, quota, 0 if mech is BASE else reserved, groups)
            checked += 1
            if not check_axioms(ctx, range(n)):
                bad.append((seed, mech.value))
    elapsed = time.perf_counter() - start
    record("2 axioms", not bad and elapsed < 60,
           f"{checked} exhaustive rule checks, counterexamples={bad}, {elapsed:.1f}s")


def test_3_equivalence():
    start = time.perf_counter()
    rng = random.Random(2024)
    mismatches = 0
    for _ in range(10_000):
        instance, q_r = random_instance(rng)
        for tag in (MR, JSA, DISC):
            mismatches += not check_equivalence(instance, q_r, tag)
    elapsed = time.perf_counter() - start
    record("3 equivalence", mismatches == 0 and elapsed < 60,
           f"10000 instances x 3 mechanisms, mismatches={mismatches}, {elapsed:.1f}s")


def test_4_jsa_dominates_mr():
    start = time.perf_counter()
    rng = random.Random(42)
    hc = violations = incomparable = 0
    for _ in range(10_000):
        instance, q_r = random_instance(rng)
        result = verify_jsa_dominates_mr(instance, q_r)
        hc += result.highly_competitive
        violations += result.violation
        incomparable += result.verdict.verdict is Verdict.INCOMPARABLE
    ex = MR_JSA_INCOMPARABLE
    ex_result = verify_jsa_dominates_mr(ex.instance, ex.reserve)
    example_ok = not ex_result.highly_competitive and ex_result.verdict.verdict is Verdict.INCOMPARABLE
    elapsed = time.perf_counter() - start
    record("4 jsa vs mr", violations == 0 and example_ok and elapsed < 120,
           f"{hc} highly competitive of 10000, violations={violations}, random incomparable={incomparable}, "
           f"mr_jsa_incomparable incomparable & not HC={example_ok}, {elapsed:.1f}s")


def test_5_smart_reserve():
    rng = random.Random(7)
    found = violations = drawn = 0
    while found < 5000:
        drawn += 1
        instance, q_r = random_instance(rng)
        base = matching_of(BASE, instance)
        if not check_smart_reserve(instance, q_r, base):
            continue
        found += 1
        for mech in (MR, JSA):
            v = compare_for_group(instance, matching_of(mech, instance, q_r), base, DISADVANTAGED)
            violations += not v.first_weakly_dominates
    record("5 smart reserve", violations == 0,
           f"5000 smart-reserve instances ({drawn} drawn), violations={violations}")


def test_6_disc_pathologies():
    start = time.perf_counter()
    ex = DISC_SMART_RESERVE_HURTS
    sm1, sM3, c1 = ex.student("sm1"), ex.student("sM3"), ex.school("c1")
    m = probe_strategyproofness(DISC, ex.instance, ex.reserve)
    w = probe_respect_improvements(DISC, ex.instance, ex.reserve)
    truncation = m is not None and (m.student, m.misreport, m.school) == (sm1, (c1,), c1)
    swap = w is not None and (w.student, w.displaced) == (sm1, sM3)
    rng = random.Random(6)
    found = 0
    for _ in range(1000):
        instance, q_r = random_instance(rng, max_students=5, max_schools=3)
        for mech in (MR, JSA):
            found += probe_strategyproofness(mech, instance, q_r) is not None
            found += probe_respect_improvements(mech, instance, q_r) is not None
    elapsed = time.perf_counter() - start
    record("6 disc pathologies", truncation and swap and found == 0,
           f"disc_smart_reserve_hurts truncation={truncation} swap={swap}; MR/JSA witnesses on 1000 instances={found}, {elapsed:.1f}s")


def test_7_normal_potential_arithmetic():
    holds, lhs, rhs = check_thm44_condition(408.76, 362.40, 92.53, 83.13, 0.18, 0.18)
    ok = holds and abs(lhs - 46.36) <= 0.01 and abs(rhs - 9.47) <= 0.02
    record("7 normal-potential arithmetic", ok,
           f"lhs={lhs:.4f} (target 46.36+-0.01), rhs={rhs:.4f} (target 9.47+-0.02), holds={holds}")


def test_8_nyc_tenth_scale():
    start = time.perf_counter()
    seeds = 200
    hc_count = exact = hc_seen = disc_bp = 0
    top, bottom = [], []
    for seed in range(seeds):
        market = generate_market(nyc_config(0.1, seed=seed))
        inst, q_r = market.instance, market.reserve
        comp = check_high_competitiveness(inst, q_r)
        if comp.highly_competitive:
            hc_count += 1
            hc_seen += 1
            exact += all(x == 0 for x in comp.slack)
        base = matching_of(BASE, inst)
        disc = matching_of(DISC, inst, q_r)
        disc_bp += bool(find_in_group_blocking_pairs(inst, disc, DISADVANTAGED))
        # rank change is only defined for students matched under both
        order = [
            s for s in inst.schools[0].priority.order
            if inst.groups[s] is DISADVANTAGED and base[s] is not None and disc[s] is not None
        ]
        decile = max(1, len(order) // 10)
        top.extend(rank_deltas(inst, base, disc, order[:decile]))
        bottom.extend(rank_deltas(inst, base, disc, order[-decile:]))
    elapsed = time.perf_counter() - start
    a = hc_count / seeds >= 0.95
    b = hc_seen > 0 and exact == hc_seen
    c = disc_bp / seeds >= 0.90
    d = np.mean(top) > np.mean(bottom)
    record("8 nyc 1/10 scale", a and b and c and d and elapsed < 600,
           f"(a) HC {hc_count}/{seeds}; (b) MR admits == q^R in {exact}/{hc_seen} HC seeds; "
           f"(c) DISC blocking pairs in {disc_bp}/{seeds}; (d) mean delta top decile {np.mean(top):.3f} "
           f"> bottom {np.mean(bottom):.3f}: {d}; {elapsed:.0f}s")


def test_9_balls_in_bins():
    start = time.perf_counter()
    cover = balls_in_bins_stats(1000, 3, 1000, seed=9)
    ratio = median(cover.cover_time) / erdos_renyi_cover_prediction(1000, 3)
    n = 100
    t = math.ceil(n * math.log(n))
    overflow = balls_in_bins_stats(n, t, 300, seed=9)
    fifth = float(np.percentile(overflow.first_overflow, 5)) / (t * n)
    elapsed = time.perf_counter() - start
    record("9 balls in bins", 0.8 <= ratio <= 1.3 and fifth >= 0.7,
           f"cover median / prediction = {ratio:.3f} in [0.8, 1.3]; "
           f"overflow 5th pct / (t n) = {fifth:.3f} >= 0.7 (n={n}, t={t}); {elapsed:.1f}s")
