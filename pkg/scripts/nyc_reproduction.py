"""Desk-scale NYC-shaped experiment: BASE, DISC, MR and JSA on synthetic
normal-potential markets, summarised over seeds.

    python scripts/nyc_reproduction.py --scale 0.1 --seeds 50
"""
import argparse
import time
from collections import Counter

import numpy as np

from reserved_seats.audit import (
    check_high_competitiveness,
    compare_for_group,
    disadvantaged_admits,
    find_in_group_blocking_pairs,
    rank_change_histogram,
)
from reserved_seats.choice import Mechanism
from reserved_seats.engine import matching_of
from reserved_seats.market_gen import generate_market, nyc_config
from reserved_seats.model import ADVANTAGED, DISADVANTAGED


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scale", type=float, default=0.1)
    parser.add_argument("--seeds", type=int, default=20)
    args = parser.parse_args()

    start = time.perf_counter()
    hc = 0
    blocking = Counter()
    admitted = {m: [] for m in Mechanism}
    hist = {m: Counter() for m in Mechanism}
    verdicts = Counter()
    for seed in range(args.seeds):
        market = generate_market(nyc_config(args.scale, seed))
        inst, q_r = market.instance, market.reserve
        runs = {m: matching_of(m, inst, q_r) for m in Mechanism}
        hc += check_high_competitiveness(inst, q_r, runs[Mechanism.MR]).highly_competitive
        for m, mu in runs.items():
            blocking[m] += len(find_in_group_blocking_pairs(inst, mu, DISADVANTAGED))
            admitted[m].append(np.mean(disadvantaged_admits(inst, mu)) / inst.schools[0].quota)
            hist[m].update(rank_change_histogram(inst, runs[Mechanism.BASE], mu, DISADVANTAGED))
        v = compare_for_group(inst, runs[Mechanism.JSA], runs[Mechanism.MR], DISADVANTAGED)
        verdicts[v.verdict.value] += 1
        verdicts["advantaged " + compare_for_group(inst, runs[Mechanism.MR], runs[Mechanism.JSA], ADVANTAGED).verdict.value] += 1

    cfg = nyc_config(args.scale)
    print(f"{args.seeds} markets: n={cfg.n} q={cfg.q} q_r={cfg.q_r} |S^M|={cfg.m_M} |S^m|={cfg.m_m}")
    print(f"highly competitive: {hc}/{args.seeds}")
    print("mechanism  blocking/seed  disadvantaged share")
    for m in Mechanism:
        print(f"{m.value:<10} {blocking[m] / args.seeds:>13.2f} {np.mean(admitted[m]):>20.3f}")
    print("disadvantaged rank change vs base (pooled):")
    for m in Mechanism:
        numeric = sorted(k for k in hist[m] if isinstance(k, int))
        other = sorted(k for k in hist[m] if not isinstance(k, int))
        print(f"  {m.value:<5} " + " ".join(f"{k}:{hist[m][k]}" for k in numeric + other))
    print("jsa vs mr:", dict(verdicts))
    print(f"{time.perf_counter() - start:.1f}s")


if __name__ == "__main__":
    main()
