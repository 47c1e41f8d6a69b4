"""Exact solver for the last-success problem and its two variants.

Indices exposed to callers (thresholds, error positions) are 1-based, matching
the usual statement of the odds theorem. Internally every per-index sequence
is a 0-based tuple; ``SuffixStats.R(k)`` / ``SuffixStats.Q(k)`` translate.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .exceptions import (
    DegenerateConditioning,
    EmptyInstance,
    OutOfRange,
    TailContainsCertainty,
    ThresholdMismatch,
)

# Q_1 is carried in log space; the linear product is only trusted up to this n.
LINEAR_SURVIVAL_MAX_N = 1000
# Smallest P(at least one success) Variant I is willing to condition on.
MIN_CONDITIONING_MASS = 1e-12
# |R_1 - 1| at or below this is reported as the Variant II indifference point.
INDIFFERENCE_TOL = 1e-12
# Relative distance of 1/p from an integer below which 1/p is taken as that integer.
_INTEGRAL_SNAP = 1e-12


class Decision(str, enum.Enum):
    PLAY_STANDARD = "PlayStandard"
    PREDICT_NO_ONES = "PredictNoOnes"
    INDIFFERENT = "Indifferent"


@dataclass(frozen=True)
class ProblemInstance:
    """Success probabilities ``p_1..p_n`` of independent Bernoulli trials."""

    probs: tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.probs)

    @property
    def has_certainty(self) -> bool:
        return any(p == 1.0 for p in self.probs)

    def __len__(self) -> int:
        return len(self.probs)


@dataclass(frozen=True)
class SuffixStats:
    """Odds and suffix aggregates of an instance.

    ``suffix_odds_sum`` and ``suffix_survival`` have ``n + 1`` entries; the
    last one is the empty suffix (R_{n+1} = 0, Q_{n+1} = 1).
    """

    probs: tuple[float, ...]
    odds: tuple[float, ...]
    suffix_odds_sum: tuple[float, ...]
    suffix_survival: tuple[float, ...]
    log_suffix_survival: tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.probs)

    def R(self, k: int) -> float:
        return self.suffix_odds_sum[k - 1]

    def Q(self, k: int) -> float:
        return self.suffix_survival[k - 1]

    def log_Q(self, k: int) -> float:
        return self.log_suffix_survival[k - 1]

    def tail_is_certain(self, k: int) -> bool:
        """True when some p_i = 1 with i >= k, i.e. R_k is infinite."""
        return math.isinf(self.suffix_odds_sum[k - 1])


@dataclass(frozen=True)
class Solution:
    threshold: int
    value: float
    threshold_prob_is_one: bool
    variant1_value: float
    variant2_value: float
    variant2_decision: Decision
    r1: float
    rs: float
    q1: float
    log_q1: float

    @property
    def r1_near_one(self) -> bool:
        return abs(self.r1 - 1.0) <= INDIFFERENCE_TOL


@dataclass(frozen=True)
class HomogeneousSpec:
    """``n`` trials sharing one success probability ``p`` in (0, 1)."""

    p: float
    n: int

    def __post_init__(self):
        if not (0.0 < self.p < 1.0) or not math.isfinite(self.p):
            raise OutOfRange(1, self.p)
        if int(self.n) != self.n or self.n < 1:
            raise EmptyInstance(f"homogeneous instance needs n >= 1, got {self.n!r}")

    @property
    def m(self) -> int:
        return ceil_inverse(self.p)

    def expand(self) -> ProblemInstance:
        return ProblemInstance((float(self.p),) * int(self.n))


class MalCounterexample(NamedTuple):
    p: float
    n: int
    s: int
    s_star: int
    s_star_clamped: int
    value_s: float
    value_s_star: float


def ceil_inverse(p: float) -> int:
    """Return ceil(1/p), reading 1/p as an integer when it is one up to rounding.

    ``1 / (1/49)`` evaluates to ``49.00000000000001`` in binary floating point,
    so a bare ``math.ceil`` would return 50 for the double nearest 1/49.
    """
    q = 1.0 / p
    nearest = round(q)
    if nearest >= 1 and abs(q - nearest) <= _INTEGRAL_SNAP * nearest:
        return int(nearest)
    return math.ceil(q)


def validate_instance(raw_probs: Iterable[float]) -> ProblemInstance:
    if isinstance(raw_probs, ProblemInstance):
        return raw_probs
    probs = []
    for i, value in enumerate(raw_probs, start=1):
        if isinstance(value, bool):
            raise OutOfRange(i, value)
        try:
            p = float(value)
        except (TypeError, ValueError):
            raise OutOfRange(i, value) from None
        if not math.isfinite(p) or p <= 0.0 or p > 1.0:
            raise OutOfRange(i, value)
        probs.append(p)
    if not probs:
        raise EmptyInstance("an instance needs at least one probability")
    return ProblemInstance(tuple(probs))


def suffix_stats(inst: ProblemInstance) -> SuffixStats:
    probs = inst.probs
    n = len(probs)
    odds = tuple(math.inf if p == 1.0 else p / (1.0 - p) for p in probs)

    R = [0.0] * (n + 1)
    Q = [1.0] * (n + 1)
    logQ = [0.0] * (n + 1)
    # Descending accumulation; keeps R bit-reproducible for identical input.
    for k in range(n - 1, -1, -1):
        R[k] = R[k + 1] + odds[k]
        Q[k] = Q[k + 1] * (1.0 - probs[k])
        logQ[k] = -math.inf if probs[k] == 1.0 else logQ[k + 1] + math.log1p(-probs[k])
    if n > LINEAR_SURVIVAL_MAX_N:
        Q = [math.exp(v) for v in logQ]
    return SuffixStats(probs, odds, tuple(R), tuple(Q), tuple(logQ))


def optimal_threshold(stats: SuffixStats) -> int:
    """Largest k with R_k >= 1, or 1 when R_1 < 1.

    The comparison is exact: R_k == 1 selects k.
    """
    for k in range(stats.n, 0, -1):
        if stats.R(k) >= 1.0:
            return k
    return 1


def win_probability(stats: SuffixStats, s: int) -> float:
    """Value of the rule "stop on the first success at index >= s".

    ``s`` must be the optimal threshold. When p_s = 1 the value is Q_{s+1}
    (the stop at s is certain and wins iff nothing follows).
    """
    if not 1 <= s <= stats.n:
        raise ThresholdMismatch(f"threshold {s} outside [1, {stats.n}]")
    if stats.probs[s - 1] == 1.0:
        return stats.Q(s + 1)
    if stats.tail_is_certain(s):
        raise ThresholdMismatch(f"threshold {s} precedes a certain success; it cannot be optimal")
    return min(stats.Q(s) * stats.R(s), 1.0)


def survival_complement(stats: SuffixStats) -> float:
    """1 - Q_1, accurate even when Q_1 is close to 1."""
    return -math.expm1(stats.log_Q(1))


def variant1_value(inst: ProblemInstance, stats: SuffixStats, value: float) -> float:
    """Win probability when all-zero rounds are replayed (conditioning on a success)."""
    if inst.has_certainty:
        return value
    mass = survival_complement(stats)
    if mass < MIN_CONDITIONING_MASS:
        raise DegenerateConditioning(
            f"P(at least one success) = {mass:.3e} is below {MIN_CONDITIONING_MASS:g}"
        )
    return min(value / mass, 1.0)


def variant2_decide(
    inst: ProblemInstance, stats: SuffixStats | None = None, value: float | None = None
) -> tuple[Decision, float]:
    """Choose between playing and predicting that no success occurs."""
    if stats is None:
        stats = suffix_stats(inst)
    if value is None:
        value = win_probability(stats, optimal_threshold(stats))
    r1 = stats.R(1)
    q1 = stats.Q(1)
    if abs(r1 - 1.0) <= INDIFFERENCE_TOL:
        decision = Decision.INDIFFERENT
    elif r1 > 1.0:
        decision = Decision.PLAY_STANDARD
    else:
        decision = Decision.PREDICT_NO_ONES
    return decision, max(q1, value)


def solve(inst: ProblemInstance | Sequence[float]) -> Solution:
    inst = validate_instance(inst)
    stats = suffix_stats(inst)
    s = optimal_threshold(stats)
    value = win_probability(stats, s)
    v1 = variant1_value(inst, stats, value)
    decision, v2 = variant2_decide(inst, stats, value)
    return Solution(
        threshold=s,
        value=value,
        threshold_prob_is_one=inst.probs[s - 1] == 1.0,
        variant1_value=v1,
        variant2_value=v2,
        variant2_decision=decision,
        r1=stats.R(1),
        rs=stats.R(s),
        q1=stats.Q(1),
        log_q1=stats.log_Q(1),
    )


def homogeneous_solve(spec: HomogeneousSpec) -> Solution:
    """Closed-form solution for ``n`` copies of the same ``p``.

    With m = ceil(1/p): if n >= m - 1 the threshold is n - m + 2 and the value
    p (m-1) (1-p)^(m-2); otherwise every trial is inside the window and the
    value is n p (1-p)^(n-1).
    """
    p, n, m = float(spec.p), int(spec.n), spec.m
    odds = p / (1.0 - p)
    if n >= m - 1:
        s = n - m + 2
        value = p * (m - 1) * (1.0 - p) ** (m - 2)
        rs = (m - 1) * odds
    else:
        s = 1
        value = n * p * (1.0 - p) ** (n - 1)
        rs = n * odds
    log_q1 = n * math.log1p(-p)
    q1 = math.exp(log_q1)
    mass = -math.expm1(log_q1)
    if mass < MIN_CONDITIONING_MASS:
        raise DegenerateConditioning(f"P(at least one success) = {mass:.3e}")
    r1 = n * odds
    if abs(r1 - 1.0) <= INDIFFERENCE_TOL:
        decision = Decision.INDIFFERENT
    elif r1 > 1.0:
        decision = Decision.PLAY_STANDARD
    else:
        decision = Decision.PREDICT_NO_ONES
    return Solution(
        threshold=s,
        value=value,
        threshold_prob_is_one=False,
        variant1_value=min(value / mass, 1.0),
        variant2_value=max(q1, value),
        variant2_decision=decision,
        r1=r1,
        rs=rs,
        q1=q1,
        log_q1=log_q1,
    )


def mal_threshold(spec: HomogeneousSpec) -> int:
    """Floor-formula threshold estimate floor(n + 1 + 1/ln(1-p) + 1/2), unclamped."""
    return math.floor(spec.n + 1 + 1.0 / math.log1p(-spec.p) + 0.5)


def clamp_threshold(k: int, n: int) -> int:
    return min(max(k, 1), n)


def find_mal_counterexamples(
    p_grid: Iterable[float], n_grid: Iterable[int]
) -> list[MalCounterexample]:
    """Grid points where the floor-formula estimate differs from the true threshold.

    Each hit carries the threshold-rule values at both indices, taken from the
    oracle sweep; ``value_s >= value_s_star`` must always hold.
    """
    from .oracle import threshold_sweep

    p_grid, n_grid = list(p_grid), list(n_grid)
    if not p_grid or not n_grid:
        raise ValueError("both grids must be non-empty")
    hits = []
    for p in p_grid:
        for n in n_grid:
            spec = HomogeneousSpec(p, n)
            s = homogeneous_solve(spec).threshold
            s_star = mal_threshold(spec)
            if s_star == s:
                continue
            sweep = threshold_sweep(spec.expand())
            clamped = clamp_threshold(s_star, spec.n)
            hits.append(
                MalCounterexample(
                    p, spec.n, s, s_star, clamped,
                    sweep.values[s - 1], sweep.values[clamped - 1],
                )
            )
    return hits


def extend_game(inst: ProblemInstance, s: int | None = None) -> ProblemInstance:
    """Append one trial with probability 1/ceil(1/min(p_s..p_n)).

    The appended probability never exceeds the tail minimum, and the optimal
    value of the extended game never exceeds that of the original.
    """
    inst = validate_instance(inst)
    if s is None:
        s = optimal_threshold(suffix_stats(inst))
    if not 1 <= s <= inst.n:
        raise ThresholdMismatch(f"threshold {s} outside [1, {inst.n}]")
    tail_min = min(inst.probs[s - 1:])
    if tail_min == 1.0:
        raise TailContainsCertainty("every trial from the threshold on is certain")
    return ProblemInstance(inst.probs + (1.0 / ceil_inverse(tail_min),))
