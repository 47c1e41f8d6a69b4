"""Ground-truth engines used to check the odds-theorem solver.

None of these reuse the solver's suffix aggregates: enumeration walks all
2^n outcomes, the dynamic program optimises over every adapted stopping rule,
and the sweep evaluates each threshold rule separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import ProblemInstance, solve, validate_instance
from .exceptions import Mismatch, TooLarge

MAX_ENUMERATE_N = 24
SOLVER_RTOL = 1e-12
_CHUNK_BITS = 16


@dataclass(frozen=True)
class SweepResult:
    values: tuple[float, ...]
    argmax_set: tuple[int, ...]
    best_value: float


@dataclass(frozen=True)
class DPResult:
    value: float
    stop_set: tuple[int, ...]
    ties: tuple[int, ...]
    continuation: tuple[float, ...] = field(repr=False)

    @property
    def min_strict_stop(self) -> int | None:
        """Smallest index where stopping on a success is strictly better."""
        strict = [i for i in self.stop_set if i not in self.ties]
        return min(strict) if strict else None


@dataclass
class Verdict:
    ok: bool
    value: float
    dp_value: float
    threshold: int
    sweep_argmax: tuple[int, ...]
    enumeration_value: float | None
    deltas: dict[str, float]

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "value": self.value,
            "dp_value": self.dp_value,
            "threshold": self.threshold,
            "sweep_argmax": list(self.sweep_argmax),
            "enumeration_value": self.enumeration_value,
            "deltas": dict(self.deltas),
        }


def _outcome_chunks(n: int):
    """Yield boolean outcome matrices covering all 2^n vectors, row = outcome."""
    total = 1 << n
    step = min(total, 1 << _CHUNK_BITS)
    shifts = np.arange(n, dtype=np.int64)
    for start in range(0, total, step):
        codes = np.arange(start, start + step, dtype=np.int64)
        yield ((codes[:, None] >> shifts) & 1).astype(bool)


def enumerate_value(inst: ProblemInstance, k: int, max_n: int = MAX_ENUMERATE_N) -> float:
    """Exact value of "stop on the first success at index >= k" by full enumeration."""
    inst = validate_instance(inst)
    n = inst.n
    if n > max_n:
        raise TooLarge(f"enumeration capped at n = {max_n}, got n = {n}")
    if not 1 <= k <= n:
        raise ValueError(f"k = {k} outside [1, {n}]")
    p = np.asarray(inst.probs)
    idx = np.arange(n)
    parts = []
    for outcomes in _outcome_chunks(n):
        prob = np.prod(np.where(outcomes, p, 1.0 - p), axis=1)
        window = outcomes & (idx >= k - 1)
        stopped = window.any(axis=1)
        stop_at = np.argmax(window, axis=1)
        last_one = n - 1 - np.argmax(outcomes[:, ::-1], axis=1)
        win = stopped & (stop_at == last_one)
        parts.append(math.fsum(prob[win]))
    return math.fsum(parts)


def dp_optimal(inst: ProblemInstance) -> DPResult:
    """Backward induction over all adapted stopping rules.

    ``w[i]`` is the best win probability from index i on without having
    stopped; stopping on a success at i wins with probability Q_{i+1}.
    Ties (stop and continue equally good) count as stop.
    """
    inst = validate_instance(inst)
    n = inst.n
    w = [0.0] * (n + 2)
    survive = 1.0  # Q_{i+1}
    stop, ties = [], []
    for i in range(n, 0, -1):
        p = inst.probs[i - 1]
        nxt = w[i + 1]
        if survive >= nxt:
            stop.append(i)
            if survive == nxt:
                ties.append(i)
        w[i] = p * max(survive, nxt) + (1.0 - p) * nxt
        survive *= 1.0 - p
    return DPResult(w[1], tuple(sorted(stop)), tuple(sorted(ties)), tuple(w[1 : n + 1]))


def _threshold_value(probs: tuple[float, ...], k: int) -> float:
    """Closed form (prod q_j)(sum r_j) over j >= k, valid when the tail has no p = 1."""
    q = 1.0
    r = 0.0
    for p in probs[k - 1 :]:
        q *= 1.0 - p
        r += p / (1.0 - p)
    return q * r


def threshold_sweep(
    inst: ProblemInstance, rtol: float = SOLVER_RTOL, max_n: int = MAX_ENUMERATE_N
) -> SweepResult:
    inst = validate_instance(inst)
    values = []
    for k in range(1, inst.n + 1):
        if any(p == 1.0 for p in inst.probs[k - 1 :]):
            values.append(enumerate_value(inst, k, max_n=max_n))
        else:
            values.append(_threshold_value(inst.probs, k))
    best = max(values)
    cut = best - rtol * max(1.0, best)
    argmax = tuple(k for k, v in enumerate(values, start=1) if v >= cut)
    return SweepResult(tuple(values), argmax, best)


def cross_validate(
    inst: ProblemInstance, max_n_enumerate: int = MAX_ENUMERATE_N, raise_on_mismatch: bool = True
) -> Verdict:
    """Check the solver against the DP, the threshold sweep and enumeration."""
    inst = validate_instance(inst)
    sol = solve(inst)
    scale = max(1.0, sol.value)
    dp = dp_optimal(inst)
    deltas = {"dp": abs(sol.value - dp.value)}
    ok = deltas["dp"] <= SOLVER_RTOL * scale

    enumerable = inst.n <= max_n_enumerate
    sweep_argmax: tuple[int, ...] = ()
    enum_value = None
    if enumerable:
        sweep = threshold_sweep(inst, max_n=max_n_enumerate)
        sweep_argmax = sweep.argmax_set
        deltas["sweep_best"] = abs(sweep.best_value - sol.value)
        ok &= sol.threshold in sweep_argmax
        ok &= deltas["sweep_best"] <= SOLVER_RTOL * scale
        enum_value = enumerate_value(inst, sol.threshold, max_n=max_n_enumerate)
        deltas["enumeration"] = abs(enum_value - sol.value)
        ok &= deltas["enumeration"] <= SOLVER_RTOL * scale

    verdict = Verdict(bool(ok), sol.value, dp.value, sol.threshold, sweep_argmax, enum_value, deltas)
    if not verdict.ok and raise_on_mismatch:
        payload = verdict.as_dict()
        payload["p"] = list(inst.probs)
        raise Mismatch("engines disagree", payload)
    return verdict
