"""Cover time and first overflow of the balls-in-bins process against the
Erdős–Rényi limit.

    python scripts/balls_in_bins.py --bins 1000 --threshold 3 --trials 1000
"""
import argparse
import math

import numpy as np

from reserved_seats.market_gen import balls_in_bins_stats, erdos_renyi_cover_prediction


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--bins", type=int, default=1000)
    parser.add_argument("--threshold", type=int, default=3)
    parser.add_argument("--trials", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    b = balls_in_bins_stats(args.bins, args.threshold, args.trials, args.seed)
    pred = erdos_renyi_cover_prediction(args.bins, args.threshold)
    q = np.percentile(b.cover_time, [5, 50, 95])
    print(f"cover time 5/50/95%: {q[0]:.0f} {q[1]:.0f} {q[2]:.0f}; prediction {pred:.0f}; median ratio {q[1] / pred:.3f}")
    f = np.percentile(b.first_overflow, [5, 50, 95])
    tn = args.threshold * args.bins
    print(f"first overflow 5/50/95% over threshold*bins: {f[0] / tn:.3f} {f[1] / tn:.3f} {f[2] / tn:.3f}")
    print(f"threshold >= bins ln bins: {args.threshold >= args.bins * math.log(args.bins)}")


if __name__ == "__main__":
    main()
