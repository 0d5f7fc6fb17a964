"""Random small-market sweep over the structural claims: auxiliary-market
equivalence, JSA vs MR under high competitiveness, reserves vs BASE under
both smart-reserve readings, and DISC manipulation/improvement witnesses.

    python scripts/property_sweep.py --instances 10000
"""
import argparse
import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from conftest import random_instance  # noqa: E402
from reserved_seats.audit import (  # noqa: E402
    Verdict,
    check_smart_reserve,
    compare_for_group,
    probe_respect_improvements,
    probe_strategyproofness,
    verify_jsa_dominates_mr,
)
from reserved_seats.auxiliary import check_equivalence  # noqa: E402
from reserved_seats.choice import Mechanism  # noqa: E402
from reserved_seats.engine import matching_of  # noqa: E402
from reserved_seats.model import DISADVANTAGED  # noqa: E402


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--instances", type=int, default=10_000)
    parser.add_argument("--probes", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    rng = random.Random(args.seed)
    start = time.perf_counter()
    counts = dict(mismatch=0, hc=0, jsa_mr_violation=0, incomparable=0)
    smart = {False: [0, 0], True: [0, 0]}  # reading -> [smart instances, violations]
    for _ in range(args.instances):
        inst, q_r = random_instance(rng)
        counts["mismatch"] += sum(not check_equivalence(inst, q_r, t) for t in ("mr", "jsa", "disc"))
        r = verify_jsa_dominates_mr(inst, q_r)
        counts["hc"] += r.highly_competitive
        counts["jsa_mr_violation"] += r.violation
        counts["incomparable"] += r.verdict.verdict is Verdict.INCOMPARABLE
        base = matching_of("base", inst)
        for aggregate in (False, True):
            if check_smart_reserve(inst, q_r, base, aggregate=aggregate):
                smart[aggregate][0] += 1
                smart[aggregate][1] += any(
                    not compare_for_group(inst, matching_of(m, inst, q_r), base, DISADVANTAGED).first_weakly_dominates
                    for m in ("mr", "jsa")
                )
    print(counts)
    for aggregate, (n, bad) in smart.items():
        print(f"smart reserve ({'aggregate' if aggregate else 'per school'}): {n} instances, {bad} with a reserve hurting someone")
    witnesses = {m: [0, 0] for m in Mechanism if m is not Mechanism.BASE}
    for _ in range(args.probes):
        inst, q_r = random_instance(rng, max_students=5, max_schools=3)
        for m, w in witnesses.items():
            w[0] += probe_strategyproofness(m, inst, q_r) is not None
            w[1] += probe_respect_improvements(m, inst, q_r) is not None
    for m, (sp, ri) in witnesses.items():
        print(f"{m.value}: manipulation witnesses {sp}, improvement witnesses {ri} (of {args.probes})")
    print(f"{time.perf_counter() - start:.1f}s")


if __name__ == "__main__":
    main()
