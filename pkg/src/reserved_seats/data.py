"""Delimited-text input/output, quota policies, lottery tie-breaking and the
experiment runner behind the ``run`` subcommand.

Files:

* students: ``id,score,disadvantaged,lottery,prefs`` with ``prefs`` a
  pipe-separated list of school codes (``S|B|T``) and an optional lottery
* schools: ``code,name,quota``
* reserved quotas (for ``--quota file:PATH``): ``code,reserved``
* matching: ``id,school,seat_type``; ``-`` marks unmatched / undefined
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import random
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .audit import audit_matching, compare_for_group
from .auxiliary import seat_types
from .choice import Mechanism
from .engine import RoundLog, run_mechanism
from .model import (
    ADVANTAGED,
    DISADVANTAGED,
    Instance,
    Matching,
    PriorityOrder,
    ReservationQuotas,
    School,
    check_matching,
)

STUDENT_COLUMNS = ["id", "score", "disadvantaged", "lottery", "prefs"]
SCHOOL_COLUMNS = ["code", "name", "quota"]
MATCHING_COLUMNS = ["id", "school", "seat_type"]
NONE = "-"


class InputError(ValueError):
    """Bad input file; ``errors`` holds one message per offending line."""

    def __init__(self, message: str, errors: Sequence[str] = ()):
        super().__init__(message)
        self.errors = list(errors)


class TheoremViolation(RuntimeError):
    """A market met a theorem's hypothesis but not its conclusion."""


def derive_seed(seed: int, label: str) -> int:
    digest = hashlib.sha256(f"{seed}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class SchoolRecord:
    code: str
    name: str
    quota: int


@dataclass(frozen=True)
class StudentRecord:
    id: str
    score: Decimal
    prefs: Tuple[str, ...]
    disadvantaged: bool
    lottery: Optional[int] = None


@dataclass
class LoadResult:
    records: List[StudentRecord]
    errors: List[str] = field(default_factory=list)


def _reader(path: Path, columns: Sequence[str]):
    try:
        handle = open(path, newline="")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    reader = csv.DictReader(handle)
    if reader.fieldnames is None or [c.strip() for c in reader.fieldnames] != list(columns):
        handle.close()
        raise InputError(f"{path}: header must be {','.join(columns)}, got {reader.fieldnames}")
    return handle, reader


def load_schools(path: Union[str, Path]) -> List[SchoolRecord]:
    handle, reader = _reader(Path(path), SCHOOL_COLUMNS)
    out, errors = [], []
    with handle:
        for line, row in enumerate(reader, start=2):
            try:
                quota = int(row["quota"])
                if quota < 0:
                    raise ValueError
            except (TypeError, ValueError):
                errors.append(f"line {line}: bad quota {row['quota']!r}")
                continue
            out.append(SchoolRecord(row["code"].strip(), row["name"].strip(), quota))
    codes = [s.code for s in out]
    if len(set(codes)) != len(codes):
        errors.append("duplicate school code")
    if errors:
        raise InputError(f"{path}: invalid schools file", errors)
    return out


def _parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "y"):
        return True
    if value in ("0", "false", "no", "n"):
        return False
    raise ValueError(f"bad disadvantaged flag {text!r}")


def load_students(path: Union[str, Path], school_table: Sequence[SchoolRecord]) -> LoadResult:
    """Parse a students file. Malformed rows are skipped and reported with
    their line numbers; a duplicate id rejects the whole file."""
    codes = {s.code for s in school_table}
    handle, reader = _reader(Path(path), STUDENT_COLUMNS)
    result = LoadResult([])
    seen: Dict[str, int] = {}
    with handle:
        for line, row in enumerate(reader, start=2):
            sid = (row["id"] or "").strip()
            if sid in seen:
                raise InputError(f"{path}: duplicate student id {sid!r} on lines {seen[sid]} and {line}")
            seen[sid] = line
            try:
                if not sid:
                    raise ValueError("empty id")
                try:
                    score = Decimal(row["score"].strip())
                except (InvalidOperation, AttributeError):
                    raise ValueError(f"bad score {row['score']!r}") from None
                lottery_text = (row["lottery"] or "").strip()
                lottery = int(lottery_text) if lottery_text else None
                if lottery is not None and lottery < 0:
                    raise ValueError("negative lottery number")
                prefs = tuple(p.strip() for p in (row["prefs"] or "").split("|") if p.strip())
                unknown = [p for p in prefs if p not in codes]
                if unknown:
                    raise ValueError(f"unknown school code {unknown[0]!r}")
                if len(set(prefs)) != len(prefs):
                    raise ValueError("duplicate school in preference list")
                result.records.append(
                    StudentRecord(sid, score, prefs, _parse_bool(row["disadvantaged"] or ""), lottery)
                )
            except ValueError as exc:
                result.errors.append(f"line {line}: {exc}")
    return result


def build_priority(records: Sequence[StudentRecord], seed: int = 0) -> PriorityOrder:
    """Higher score first; equal scores by ascending lottery number.

    Missing lottery numbers are drawn from the seed, avoiding every number
    already present.
    """
    given = [r.lottery for r in records if r.lottery is not None]
    missing = [i for i, r in enumerate(records) if r.lottery is None]
    lottery = [r.lottery for r in records]
    if missing:
        taken = set(given)
        pool = [x for x in range(len(records) + len(taken)) if x not in taken]
        draws = random.Random(derive_seed(seed, "lottery")).sample(pool, len(missing))
        for i, x in zip(missing, draws):
            lottery[i] = x
    keys = [(-r.score, lottery[i]) for i, r in enumerate(records)]
    if len(set(keys)) != len(keys):
        raise RuntimeError("two students share both score and lottery number")
    return PriorityOrder.from_order(sorted(range(len(records)), key=keys.__getitem__))


@dataclass(frozen=True)
class Market:
    instance: Instance
    students: Tuple[StudentRecord, ...]
    schools: Tuple[SchoolRecord, ...]

    def student_index(self) -> Dict[str, int]:
        return {r.id: i for i, r in enumerate(self.students)}

    def school_index(self) -> Dict[str, int]:
        return {s.code: i for i, s in enumerate(self.schools)}


def build_market(records: Sequence[StudentRecord], schools: Sequence[SchoolRecord], seed: int = 0) -> Market:
    index = {s.code: i for i, s in enumerate(schools)}
    priority = build_priority(records, seed)
    instance = Instance(
        groups=tuple(DISADVANTAGED if r.disadvantaged else ADVANTAGED for r in records),
        preferences=tuple(tuple(index[c] for c in r.prefs) for r in records),
        schools=tuple(School(s.quota, priority) for s in schools),
        universal_priority=True,
    )
    return Market(instance, tuple(records), tuple(schools))


def load_market(students: Union[str, Path], schools: Union[str, Path], seed: int = 0) -> Market:
    table = load_schools(schools)
    loaded = load_students(students, table)
    if loaded.errors:
        raise InputError(f"{students}: {len(loaded.errors)} malformed rows", loaded.errors)
    return build_market(loaded.records, table, seed)


# -- quota policies -----------------------------------------------------------


@dataclass(frozen=True)
class QuotaPolicy:
    """``percent`` (value = fraction), ``proportional``, or ``explicit``
    (value = per-school counts)."""

    kind: str
    value: Union[Fraction, Tuple[int, ...], None] = None

    @classmethod
    def percent(cls, fraction) -> "QuotaPolicy":
        f = Fraction(str(fraction))
        if not 0 <= f <= 1:
            raise ValueError(f"percent fraction {fraction} outside [0, 1]")
        return cls("percent", f)

    @classmethod
    def proportional(cls) -> "QuotaPolicy":
        return cls("proportional")

    @classmethod
    def explicit(cls, counts: Sequence[int]) -> "QuotaPolicy":
        return cls("explicit", tuple(int(c) for c in counts))


def apply_quota_policy(policy: QuotaPolicy, instance: Instance) -> ReservationQuotas:
    quotas = instance.quotas
    if policy.kind == "percent":
        return ReservationQuotas(tuple(math.ceil(q * policy.value) for q in quotas))
    if policy.kind == "proportional":
        total = instance.n_students
        minority = len(instance.students_in(DISADVANTAGED))
        if total == 0:
            return ReservationQuotas.zeros(len(quotas))
        return ReservationQuotas(tuple(-(-q * minority // total) for q in quotas))
    if policy.kind == "explicit":
        counts = policy.value
        if len(counts) != len(quotas):
            raise InputError(f"{len(counts)} reserved quotas for {len(quotas)} schools")
        for c, (r, q) in enumerate(zip(counts, quotas)):
            if not 0 <= r <= q:
                raise InputError(f"school {c}: reserved quota {r} outside [0, {q}]")
        return ReservationQuotas(tuple(counts))
    raise ValueError(f"unknown quota policy {policy.kind!r}")


def load_reserved(path: Union[str, Path], schools: Sequence[SchoolRecord]) -> QuotaPolicy:
    handle, reader = _reader(Path(path), ["code", "reserved"])
    with handle:
        given = {row["code"].strip(): row["reserved"].strip() for row in reader}
    missing = [s.code for s in schools if s.code not in given]
    if missing:
        raise InputError(f"{path}: no reserved quota for {', '.join(missing)}")
    try:
        return QuotaPolicy.explicit([int(given[s.code]) for s in schools])
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


def parse_quota(spec: str, schools: Sequence[SchoolRecord] = ()) -> QuotaPolicy:
    """``percent:F`` | ``proportional`` | ``file:PATH``."""
    kind, _, arg = spec.partition(":")
    if kind == "percent":
        return QuotaPolicy.percent(arg)
    if kind == "proportional":
        return QuotaPolicy.proportional()
    if kind == "file":
        return load_reserved(arg, schools)
    raise InputError(f"unknown quota policy {spec!r}")


# -- matchings ------------------------------------------------------------------


def write_matching(
    path: Union[str, Path], market: Market, matching: Matching, seats: Optional[Sequence[Optional[str]]] = None
) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(MATCHING_COLUMNS)
        for s, record in enumerate(market.students):
            c = matching[s]
            seat = seats[s] if seats is not None and seats[s] is not None else NONE
            writer.writerow([record.id, NONE if c is None else market.schools[c].code, seat])


def read_matching(path: Union[str, Path], market: Market) -> Matching:
    students = market.student_index()
    schools = market.school_index()
    assignment: List[Optional[int]] = [None] * len(market.students)
    handle, reader = _reader(Path(path), MATCHING_COLUMNS)
    errors = []
    with handle:
        for line, row in enumerate(reader, start=2):
            sid, code = row["id"].strip(), row["school"].strip()
            if sid not in students:
                errors.append(f"line {line}: unknown student {sid!r}")
            elif code != NONE and code not in schools:
                errors.append(f"line {line}: unknown school {code!r}")
            else:
                assignment[students[sid]] = None if code == NONE else schools[code]
    if errors:
        raise InputError(f"{path}: invalid matching", errors)
    matching = Matching(tuple(assignment), len(market.schools))
    check_matching(market.instance, matching)
    return matching


def write_summary(path: Union[str, Path], market: Market, matching: Matching, q_r: ReservationQuotas) -> None:
    groups = market.instance.groups
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["code", "quota", "reserved", "admitted", "disadvantaged", "disadvantaged_share"])
        for c, members in enumerate(matching.by_school()):
            dis = sum(groups[s] is DISADVANTAGED for s in members)
            share = f"{dis / len(members):.6f}" if members else "0.000000"
            school = market.schools[c]
            writer.writerow([school.code, school.quota, q_r[c], len(members), dis, share])


# -- experiments ------------------------------------------------------------------


@dataclass
class RunConfig:
    students: Path
    schools: Path
    mechanisms: Sequence[Mechanism]
    quota: str = "proportional"
    seed: int = 0
    out: Path = Path("out")
    trace: bool = False
    trials: int = 0
    plots: bool = False

    def __post_init__(self):
        if not self.mechanisms:
            raise ValueError("at least one mechanism is required")
        self.mechanisms = [Mechanism.parse(m) for m in self.mechanisms]


def _hist_json(hist: Dict) -> Dict[str, int]:
    numeric = sorted(k for k in hist if isinstance(k, int))
    other = sorted(k for k in hist if not isinstance(k, int))
    return {str(k): hist[k] for k in numeric + other}


def _verdict_json(v) -> Dict:
    return {"verdict": v.verdict.value, "prefer_first": len(v.prefer_first), "prefer_second": len(v.prefer_second)}


def run_market(market: Market, q_r: ReservationQuotas, mechanisms: Sequence[Mechanism], trace: bool = False):
    """Run every mechanism and audit it against BASE. Returns (report, runs)."""
    instance = market.instance
    runs = {m: run_mechanism(m, instance, q_r, trace=trace) for m in mechanisms}
    baseline = runs[Mechanism.BASE].matching if Mechanism.BASE in runs else run_mechanism(Mechanism.BASE, instance).matching
    report: Dict = {
        "students": instance.n_students,
        "disadvantaged": len(instance.students_in(DISADVANTAGED)),
        "schools": [s.code for s in market.schools],
        "quotas": list(instance.quotas),
        "reserved": list(q_r.reserved),
        "mechanisms": {},
    }
    for m, run in runs.items():
        audit = audit_matching(instance, q_r, run.matching, m.value, baseline)
        report["mechanisms"][m.value] = {
            "matched": len(run.matching),
            "blocking_pairs": audit.blocking_counts,
            "affected_students": audit.affected_students,
            "rank_change_vs_base": {g: _hist_json(h) for g, h in audit.rank_change.items()},
            "disadvantaged_admits": audit.disadvantaged_admits,
            "disadvantaged_share": [round(x, 6) for x in audit.admitted_proportion],
        }
        report["highly_competitive"] = audit.highly_competitive
        report["smart_reserve"] = audit.smart_reserve
    if len(runs) > 1:
        comparisons = {}
        names = list(runs)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                comparisons[f"{a.value}_vs_{b.value}"] = {
                    "disadvantaged": _verdict_json(compare_for_group(instance, runs[a].matching, runs[b].matching, DISADVANTAGED)),
                    "advantaged": _verdict_json(compare_for_group(instance, runs[a].matching, runs[b].matching, ADVANTAGED)),
                }
        report["comparisons"] = comparisons
    if Mechanism.MR in runs and Mechanism.JSA in runs:
        v = compare_for_group(instance, runs[Mechanism.JSA].matching, runs[Mechanism.MR].matching, DISADVANTAGED)
        report["jsa_vs_mr"] = _verdict_json(v)
        report["theorem_violation"] = bool(report["highly_competitive"] and not v.first_weakly_dominates)
    return report, runs


def _trace_json(log: Sequence[RoundLog], market: Market) -> List[Dict]:
    sid = [r.id for r in market.students]
    code = [s.code for s in market.schools]
    return [
        {
            "round": r.round,
            "applications": [[sid[s], code[c]] for s, c in r.applications],
            "rejections": [[sid[s], code[c]] for s, c in r.rejections],
        }
        for r in log
    ]


def _text_report(report: Dict) -> str:
    lines = [f"students {report['students']}  disadvantaged {report['disadvantaged']}"]
    lines.append("school   quota reserved")
    for code, q, r in zip(report["schools"], report["quotas"], report["reserved"]):
        lines.append(f"{code:<8} {q:>5} {r:>8}")
    lines.append("")
    lines.append("mechanism matched bp_dis bp_adv affected")
    for m, r in report["mechanisms"].items():
        bp = r["blocking_pairs"]
        lines.append(f"{m:<9} {r['matched']:>7} {bp['disadvantaged']:>6} {bp['advantaged']:>6} {r['affected_students']:>8}")
    lines.append("")
    lines.append("disadvantaged rank change vs base")
    for m, r in report["mechanisms"].items():
        hist = r["rank_change_vs_base"]["disadvantaged"]
        lines.append(f"{m:<9} " + " ".join(f"{k}:{v}" for k, v in hist.items()))
    lines.append("")
    lines.append("disadvantaged share per school")
    for m, r in report["mechanisms"].items():
        lines.append(f"{m:<9} " + " ".join(f"{x:.3f}" for x in r["disadvantaged_share"]))
    if "comparisons" in report:
        lines.append("")
        lines.append("pairwise dominance (disadvantaged / advantaged)")
        for k, v in report["comparisons"].items():
            lines.append(f"{k:<12} {v['disadvantaged']['verdict']} / {v['advantaged']['verdict']}")
    lines.append("")
    lines.append(f"highly competitive: {report['highly_competitive']}")
    lines.append(f"smart reserve: {report['smart_reserve']}")
    if "jsa_vs_mr" in report:
        lines.append(f"jsa vs mr (disadvantaged): {report['jsa_vs_mr']['verdict']}")
    return "\n".join(lines) + "\n"


def _plot_histograms(report: Dict, out: Path) -> None:
    import matplotlib

    matplotlib.use("svg")
    matplotlib.rcParams["svg.hashsalt"] = "reserved-seats"
    import matplotlib.pyplot as plt

    for m, r in report["mechanisms"].items():
        hist = r["rank_change_vs_base"]["disadvantaged"]
        fig, ax = plt.subplots(figsize=(5, 3))
        ax.bar(list(hist), list(hist.values()))
        ax.set_xlabel("rank change vs base")
        ax.set_ylabel("disadvantaged students")
        ax.set_title(m)
        fig.tight_layout()
        fig.savefig(out / f"rank_change_{m}.svg", metadata={"Date": None})
        plt.close(fig)


def run_experiment(config: RunConfig) -> Dict:
    """Run the configured mechanisms on a market file and write the artifacts
    (matching, per-school summary, report.json, report.txt) to ``config.out``."""
    market = load_market(config.students, config.schools, derive_seed(config.seed, "market"))
    q_r = apply_quota_policy(parse_quota(config.quota, market.schools), market.instance)
    report, runs = run_market(market, q_r, config.mechanisms, config.trace)
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    for m, run in runs.items():
        seats = seat_types(market.instance, q_r, m) if m is not Mechanism.BASE else [
            None if c is None else "general" for c in run.matching.assignment
        ]
        write_matching(out / f"matching_{m.value}.csv", market, run.matching, seats)
        write_summary(out / f"summary_{m.value}.csv", market, run.matching, q_r)
        if config.trace and run.trace:
            (out / f"trace_{m.value}.json").write_text(json.dumps(_trace_json(run.trace, market), indent=1) + "\n")
    (out / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    (out / "report.txt").write_text(_text_report(report))
    if config.plots:
        _plot_histograms(report, out)
    if report.get("theorem_violation"):
        raise TheoremViolation("highly competitive market where JSA does not dominate MR")
    return report


def write_market(out: Union[str, Path], students: Sequence[StudentRecord], schools: Sequence[SchoolRecord],
                 reserved: Optional[Sequence[int]] = None) -> None:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "students.csv", "w", newline="") as handle:
        w = csv.writer(handle, lineterminator="\n")
        w.writerow(STUDENT_COLUMNS)
        for r in students:
            w.writerow([r.id, str(r.score), int(r.disadvantaged), "" if r.lottery is None else r.lottery, "|".join(r.prefs)])
    with open(out / "schools.csv", "w", newline="") as handle:
        w = csv.writer(handle, lineterminator="\n")
        w.writerow(SCHOOL_COLUMNS)
        for s in schools:
            w.writerow([s.code, s.name, s.quota])
    if reserved is not None:
        with open(out / "reserved.csv", "w", newline="") as handle:
            w = csv.writer(handle, lineterminator="\n")
            w.writerow(["code", "reserved"])
            for s, r in zip(schools, reserved):
                w.writerow([s.code, r])


def market_records(instance: Instance, scores: Sequence[float], school_codes: Optional[Sequence[str]] = None,
                   student_ids: Optional[Sequence[str]] = None):
    """Records reproducing ``instance``'s universal priority: lottery = rank."""
    codes = list(school_codes) if school_codes else [f"c{i + 1}" for i in range(instance.n_schools)]
    ids = list(student_ids) if student_ids else [f"s{i + 1}" for i in range(instance.n_students)]
    rank = instance.schools[0].priority.rank if instance.schools else range(instance.n_students)
    students = [
        StudentRecord(
            ids[s],
            Decimal(repr(float(scores[s]))),
            tuple(codes[c] for c in instance.preferences[s]),
            instance.groups[s] is DISADVANTAGED,
            rank[s],
        )
        for s in range(instance.n_students)
    ]
    schools = [SchoolRecord(codes[c], codes[c], instance.schools[c].quota) for c in range(instance.n_schools)]
    return students, schools
