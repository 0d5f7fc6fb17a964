"""Command line entry point: ``python -m reserved_seats <command>``.

Exit codes: 0 ok, 1 bad input, 2 internal invariant or theorem violation.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from .audit import audit_matching, compare_for_group
from .choice import Mechanism
from .data import (
    InputError,
    RunConfig,
    TheoremViolation,
    _hist_json,
    _verdict_json,
    apply_quota_policy,
    derive_seed,
    load_market,
    market_records,
    parse_quota,
    read_matching,
    run_experiment,
    write_market,
)
from .engine import EngineError, matching_of
from .model import ADVANTAGED, DISADVANTAGED, MatchingError
from .market_gen import (
    NYC_POTENTIALS,
    HomogeneousMarketConfig,
    NormalPotentials,
    check_thm43_hypothesis,
    check_thm44_condition,
    generate_market,
    monte_carlo_hc_rate,
    nyc_config,
)

MECHANISMS = [m.value for m in Mechanism]


def _market_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--students", type=Path, required=True)
    p.add_argument("--schools", type=Path, required=True)
    p.add_argument("--quota", default="proportional", help="percent:F | proportional | file:PATH")
    p.add_argument("--seed", type=int, default=0)


def _synthetic_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scale", type=float, default=None, help="NYC-shaped market at this scale")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--m-adv", type=int, default=1872)
    p.add_argument("--m-dis", type=int, default=913)
    p.add_argument("--q", type=int, default=64)
    p.add_argument("--q-r", type=int, default=21)
    p.add_argument("--seed", type=int, default=0)


def _synthetic_config(args) -> HomogeneousMarketConfig:
    if args.scale is not None:
        return nyc_config(args.scale, args.seed)
    return HomogeneousMarketConfig(args.n, args.m_adv, args.m_dis, args.q, args.q_r, seed=args.seed)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reserved_seats", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run mechanisms on a market file")
    _market_args(p)
    p.add_argument("--mechanism", action="append", choices=MECHANISMS)
    p.add_argument("--out", type=Path, default=Path("out"))
    p.add_argument("--trace", action="store_true")
    p.add_argument("--trials", type=int, default=0)
    p.add_argument("--plots", action="store_true", help="write SVG rank-change histograms")

    p = sub.add_parser("audit", help="audit an existing matching")
    _market_args(p)
    p.add_argument("--matching", type=Path, required=True)

    p = sub.add_parser("compare", help="pairwise dominance of two matchings")
    _market_args(p)
    p.add_argument("first", type=Path)
    p.add_argument("second", type=Path)

    p = sub.add_parser("generate", help="write a synthetic market")
    _synthetic_args(p)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("theorems", help="high-competitiveness hypothesis checks and Monte Carlo")
    _synthetic_args(p)
    p.add_argument("--eps", type=float, default=0.18)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--potentials", type=float, nargs=4, default=list(NYC_POTENTIALS),
                   metavar=("MU_ADV", "MU_DIS", "SIGMA_ADV", "SIGMA_DIS"))
    p.add_argument("--p-adv", type=float, default=0.18)
    p.add_argument("--p-dis", type=float, default=0.18)

    sub.add_parser("selftest", help="run the worked-example golden suite")
    return parser


def cmd_run(args) -> int:
    config = RunConfig(
        students=args.students,
        schools=args.schools,
        mechanisms=args.mechanism or MECHANISMS,
        quota=args.quota,
        seed=args.seed,
        out=args.out,
        trace=args.trace,
        trials=args.trials,
        plots=args.plots,
    )
    report = run_experiment(config)
    print((Path(args.out) / "report.txt").read_text(), end="")
    return 0 if report is not None else 2


def _load(args):
    market = load_market(args.students, args.schools, derive_seed(args.seed, "market"))
    q_r = apply_quota_policy(parse_quota(args.quota, market.schools), market.instance)
    return market, q_r


def cmd_audit(args) -> int:
    market, q_r = _load(args)
    matching = read_matching(args.matching, market)
    report = audit_matching(market.instance, q_r, matching, args.matching.stem)
    print(json.dumps({
        "blocking_pairs": report.blocking_counts,
        "affected_students": report.affected_students,
        "rank_change_vs_base": {g: _hist_json(h) for g, h in report.rank_change.items()},
        "disadvantaged_admits": report.disadvantaged_admits,
        "highly_competitive": report.highly_competitive,
        "smart_reserve": report.smart_reserve,
    }, indent=2))
    return 0


def cmd_compare(args) -> int:
    market, _ = _load(args)
    first = read_matching(args.first, market)
    second = read_matching(args.second, market)
    out = {
        "disadvantaged": _verdict_json(compare_for_group(market.instance, first, second, DISADVANTAGED)),
        "advantaged": _verdict_json(compare_for_group(market.instance, first, second, ADVANTAGED)),
    }
    print(json.dumps(out, indent=2))
    return 0


def cmd_generate(args) -> int:
    market = generate_market(_synthetic_config(args))
    students, schools = market_records(market.instance, market.scores)
    write_market(args.out, students, schools, market.reserve.reserved)
    print(f"wrote {len(students)} students and {len(schools)} schools to {args.out}")
    return 0


def cmd_theorems(args) -> int:
    config = _synthetic_config(args)
    mu_M, mu_m, sigma_M, sigma_m = args.potentials
    holds44, lhs, rhs = check_thm44_condition(mu_M, mu_m, sigma_M, sigma_m, args.p_adv, args.p_dis)
    print(f"normal-potential condition: lhs={lhs:.2f} rhs={rhs:.2f} holds={holds44}")
    market = generate_market(config)
    cond = check_thm43_hypothesis(market.instance, config.q, config.q_r, args.eps)
    print(
        f"homogeneous rank condition (seed {config.seed}): holds={cond.holds} "
        f"r_M={cond.r_M} r_m={cond.r_m}"
    )
    config = HomogeneousMarketConfig(config.n, config.m_M, config.m_m, config.q, config.q_r,
                                     NormalPotentials(mu_M, mu_m, sigma_M, sigma_m), config.seed)
    rate = monte_carlo_hc_rate(config, args.trials, seed=args.seed)
    print(f"high competitiveness: {rate.hits}/{rate.trials} = {rate.rate:.3f} "
          f"(95% CI {rate.low:.3f}-{rate.high:.3f})")
    return 0


def cmd_selftest(args) -> int:
    from .audit import find_in_group_blocking_pairs
    from .golden import ALL_EXAMPLES, DISC_SMART_RESERVE_HURTS

    failures = 0
    for ex in ALL_EXAMPLES:
        for mech, expected in ex.expected.items():
            got = matching_of(mech, ex.instance, ex.reserve)
            ok = got == expected
            failures += not ok
            print(f"{'ok  ' if ok else 'FAIL'} {ex.name} {mech.value}")
    ex = DISC_SMART_RESERVE_HURTS
    pairs = find_in_group_blocking_pairs(ex.instance, ex.expected[Mechanism.DISC], DISADVANTAGED)
    ok = [(p.student, p.school) for p in pairs] == [(ex.student("sm1"), ex.school("c1"))]
    failures += not ok
    print(f"{'ok  ' if ok else 'FAIL'} {ex.name} disc blocking pair (sm1, c1)")
    return 2 if failures else 0


COMMANDS = {
    "run": cmd_run,
    "audit": cmd_audit,
    "compare": cmd_compare,
    "generate": cmd_generate,
    "theorems": cmd_theorems,
    "selftest": cmd_selftest,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        for line in exc.errors:
            print(f"  {line}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except (EngineError, MatchingError, TheoremViolation, AssertionError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
