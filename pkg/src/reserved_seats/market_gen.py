"""Synthetic homogeneously random markets and the high-competitiveness validators.

All logarithms are natural. Within-group ranks are 1-based.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple, Union

import numpy as np
from scipy import stats

from .audit import check_high_competitiveness
from .model import ADVANTAGED, DISADVANTAGED, Group, Instance, PriorityOrder, ReservationQuotas, School

# Published SHSAT score parameters.
NYC_POTENTIALS = (408.76, 362.40, 92.53, 83.13)
LOGISTIC_SCALE = 1.702


@dataclass(frozen=True)
class NormalPotentials:
    mu_M: float = NYC_POTENTIALS[0]
    mu_m: float = NYC_POTENTIALS[1]
    sigma_M: float = NYC_POTENTIALS[2]
    sigma_m: float = NYC_POTENTIALS[3]


@dataclass(frozen=True)
class MergedOrder:
    """Explicit top-to-bottom group sequence of the merged ranking."""

    groups: Tuple[Group, ...]


@dataclass(frozen=True)
class BiasedShuffle:
    """Each next rank goes to an advantaged student with this probability
    (while both groups have students left)."""

    p_advantaged: float = 0.5


Interleave = Union[NormalPotentials, MergedOrder, BiasedShuffle]


@dataclass(frozen=True)
class HomogeneousMarketConfig:
    n: int
    m_M: int
    m_m: int
    q: int
    q_r: int
    interleave: Interleave = field(default_factory=NormalPotentials)
    seed: int = 0
    list_length: Optional[int] = None

    def __post_init__(self):
        if not 0 <= self.q_r <= self.q:
            raise ValueError(f"q_r={self.q_r} outside [0, q={self.q}]")
        if self.n < 1:
            raise ValueError("need at least one school")
        if isinstance(self.interleave, NormalPotentials):
            if self.interleave.sigma_M <= 0 or self.interleave.sigma_m <= 0:
                raise ValueError("potential standard deviations must be positive")


def NormalPotentialConfig(
    mu_M: float, mu_m: float, sigma_M: float, sigma_m: float, n: int, m_M: int, m_m: int, q: int, q_r: int,
    seed: int = 0, list_length: Optional[int] = None,
) -> HomogeneousMarketConfig:
    return HomogeneousMarketConfig(
        n, m_M, m_m, q, q_r, NormalPotentials(mu_M, mu_m, sigma_M, sigma_m), seed, list_length
    )


def nyc_config(scale: float = 1.0, seed: int = 0) -> HomogeneousMarketConfig:
    """Eight schools with the published average quotas and group sizes, scaled."""
    return HomogeneousMarketConfig(
        n=8,
        m_M=round(18723 * scale),
        m_m=round(9132 * scale),
        q=round(635 * scale),
        q_r=round(208 * scale),
        seed=seed,
    )


@dataclass(frozen=True)
class GeneratedMarket:
    instance: Instance
    reserve: ReservationQuotas
    scores: Tuple[float, ...]
    config: HomogeneousMarketConfig


def _rng(seed: int, *labels: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, *labels]))


def generate_market(config: HomogeneousMarketConfig) -> GeneratedMarket:
    """Advantaged students get ids ``0..m_M-1``, disadvantaged the rest."""
    rng = _rng(config.seed)
    n_students = config.m_M + config.m_m
    groups = (ADVANTAGED,) * config.m_M + (DISADVANTAGED,) * config.m_m
    prefs = np.argsort(rng.random((n_students, config.n)), axis=1)
    if config.list_length is not None:
        prefs = prefs[:, : config.list_length]

    policy = config.interleave
    if isinstance(policy, NormalPotentials):
        scores = np.concatenate(
            [
                rng.normal(policy.mu_M, policy.sigma_M, config.m_M),
                rng.normal(policy.mu_m, policy.sigma_m, config.m_m),
            ]
        )
        lottery = rng.permutation(n_students)
        order = np.lexsort((lottery, -scores))
    else:
        if isinstance(policy, MergedOrder):
            merged = list(policy.groups)
            if merged.count(ADVANTAGED) != config.m_M or merged.count(DISADVANTAGED) != config.m_m:
                raise ValueError("merged order does not match group sizes")
        else:
            left = {ADVANTAGED: config.m_M, DISADVANTAGED: config.m_m}
            merged = []
            for _ in range(n_students):
                if left[ADVANTAGED] and (not left[DISADVANTAGED] or rng.random() < policy.p_advantaged):
                    g = ADVANTAGED
                else:
                    g = DISADVANTAGED
                left[g] -= 1
                merged.append(g)
        # Within a group, ids follow rank order.
        nxt = {ADVANTAGED: 0, DISADVANTAGED: config.m_M}
        order = []
        for g in merged:
            order.append(nxt[g])
            nxt[g] += 1
        order = np.array(order)
        scores = np.empty(n_students)
        scores[order] = np.arange(n_students, 0, -1, dtype=float)

    priority = PriorityOrder.from_order([int(s) for s in order])
    instance = Instance(
        groups=groups,
        preferences=tuple(tuple(int(c) for c in row) for row in prefs),
        schools=tuple(School(config.q, priority) for _ in range(config.n)),
        universal_priority=True,
    )
    reserve = ReservationQuotas((config.q_r,) * config.n)
    return GeneratedMarket(instance, reserve, tuple(float(x) for x in scores), config)


def gen_homogeneous(config: HomogeneousMarketConfig) -> Instance:
    return generate_market(config).instance


def gen_normal_potentials(config: HomogeneousMarketConfig) -> Instance:
    if not isinstance(config.interleave, NormalPotentials):
        raise ValueError("config does not carry normal potentials")
    return generate_market(config).instance


# -- theorem hypotheses ---------------------------------------------------------


@dataclass(frozen=True)
class RankCondition:
    holds: bool
    r_M: int
    r_m: int
    r_M_cover: int
    advantaged_exists: bool
    quota_gap: bool
    reserve_exceeds_nlogn: bool


def thm43_ranks(n: int, q: int, q_r: int, eps: float, drop_log_terms: bool = False) -> Tuple[int, int, int]:
    """(r_M, r_m, r_M with the cover-time coefficient q - q_r - 1).

    ``drop_log_terms`` replaces every log factor by 1 and drops epsilon, the
    desk approximation used for eight schools.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if drop_log_terms:
        return n + n * (q - q_r), q_r * n, n + n * (q - q_r - 1)
    if n < 2:
        raise ValueError("log log n needs n >= 2")
    lln = math.log(math.log(n))
    r_M = math.ceil(n * math.log(n) + (q - q_r) * n * lln)
    r_cover = math.ceil(n * math.log(n) + (q - q_r - 1) * n * lln)
    return r_M, math.ceil((1 - eps) * q_r * n), r_cover


def check_thm43_hypothesis(
    instance: Instance, q: int, q_r: int, eps: float, drop_log_terms: bool = False
) -> RankCondition:
    """Is the r_M-th advantaged student ranked above the r_m-th disadvantaged one?"""
    r_M, r_m, r_cover = thm43_ranks(instance.n_schools, q, q_r, eps, drop_log_terms)
    orders = {c.priority for c in instance.schools}
    if len(orders) != 1:
        raise ValueError("rank condition needs a universal priority order")
    order = next(iter(orders)).order
    adv = [s for s in order if instance.groups[s] is ADVANTAGED]
    dis = [s for s in order if instance.groups[s] is DISADVANTAGED]
    exists = 0 < r_M <= len(adv)
    if not exists:
        holds = False
    elif not 0 < r_m <= len(dis):
        holds = r_m > len(dis)
    else:
        rank = instance.schools[0].priority.rank
        holds = rank[adv[r_M - 1]] < rank[dis[r_m - 1]]
    n = instance.n_schools
    return RankCondition(
        holds, r_M, r_m, r_cover, exists, q - 1 > q_r, n >= 2 and q_r > n * math.log(n)
    )


def thm44_probabilities(n: int, q: int, q_r: int, m_M: int, m_m: int, eps: float) -> Tuple[float, float]:
    p_M = (n * math.log(n) + (q - q_r - 1) * n * math.log(math.log(n))) / m_M
    p_m = (1 + eps) * q_r * n / m_m
    return p_M, p_m


def check_thm44_condition(
    mu_M: float, mu_m: float, sigma_M: float, sigma_m: float, p_M: float, p_m: float
) -> Tuple[bool, float, float]:
    """Mean-gap condition for normal potentials; returns (holds, lhs, rhs).

    The right-hand side applies the logit to both groups, as the logistic
    quantile approximation gives.
    """
    if not (0 < p_M < 1 and 0 < p_m < 1):
        raise ValueError("p_M and p_m must lie in (0, 1)")
    lhs = mu_M - mu_m
    rhs = 0.008 * (sigma_M + sigma_m) + (
        sigma_M * math.log(1 / p_M - 1) - sigma_m * math.log(1 / p_m - 1)
    ) / LOGISTIC_SCALE
    return lhs > rhs, lhs, rhs


def normal_quantile_approx(alpha: float, mu: float = 0.0, sigma: float = 1.0) -> float:
    """Logistic approximation of the normal quantile function."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    return mu - sigma * math.log(1 / alpha - 1) / LOGISTIC_SCALE


# -- balls in bins ----------------------------------------------------------------


@dataclass(frozen=True)
class BallsInBins:
    """1-based ball indices per trial.

    ``first_overflow``: first ball landing in a bin that already holds
    ``threshold`` balls. ``cover_time``: first ball after which every bin
    holds at least ``threshold`` balls.
    """

    n_bins: int
    threshold: int
    first_overflow: np.ndarray
    cover_time: np.ndarray


def balls_in_bins_stats(n_bins: int, threshold: int, trial_count: int, seed: int = 0) -> BallsInBins:
    if n_bins < 1 or threshold < 1:
        raise ValueError("need n_bins >= 1 and threshold >= 1")
    overflow = np.empty(trial_count, dtype=np.int64)
    cover = np.empty(trial_count, dtype=np.int64)
    chunk = int(1.5 * (n_bins * (threshold + 1) + erdos_renyi_cover_prediction(n_bins, threshold))) + 16
    for t in range(trial_count):
        rng = _rng(seed, t)
        draws = rng.integers(n_bins, size=chunk)
        counts = np.bincount(draws, minlength=n_bins)
        while counts.min() < threshold or counts.max() <= threshold:
            draws = np.concatenate([draws, rng.integers(n_bins, size=chunk)])
            counts = np.bincount(draws, minlength=n_bins)
        # order[starts[b] + k] is the index of the (k+1)-th ball in bin b
        order = np.argsort(draws, kind="stable")
        starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
        cover[t] = order[starts + threshold - 1].max() + 1
        full = counts > threshold
        overflow[t] = order[starts[full] + threshold].min() + 1
    return BallsInBins(n_bins, threshold, overflow, cover)


def erdos_renyi_cover_prediction(n: int, threshold: int) -> float:
    """n log n + (threshold - 1) n log log n (0 for a single bin's log log term)."""
    if n < 2:
        return float(threshold)
    return n * math.log(n) + (threshold - 1) * n * math.log(math.log(n))


def erdos_renyi_cover_cdf(x: float, threshold: int) -> float:
    """Limit of P(cover - 1 < prediction + n x)."""
    return math.exp(-math.exp(-x) / math.factorial(threshold - 1))


# -- Monte Carlo -------------------------------------------------------------------


@dataclass(frozen=True)
class HCRate:
    hits: int
    trials: int
    low: float
    high: float

    @property
    def rate(self) -> float:
        return self.hits / self.trials


def wilson_interval(hits: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    ci = stats.binomtest(hits, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def monte_carlo_hc_rate(config: HomogeneousMarketConfig, trials: int, seed: int = 0) -> HCRate:
    """Share of generated markets that are highly competitive.

    Trial ``t`` uses the market generated from seed ``(seed, t)``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    hits = 0
    for t in range(trials):
        market = generate_market(replace(config, seed=_trial_seed(seed, t)))
        hits += check_high_competitiveness(market.instance, market.reserve).highly_competitive
    low, high = wilson_interval(hits, trials)
    return HCRate(hits, trials, low, high)


def _trial_seed(seed: int, trial: int) -> int:
    return int(np.random.SeedSequence([seed, trial]).generate_state(1)[0])
