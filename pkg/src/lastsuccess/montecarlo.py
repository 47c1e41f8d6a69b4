"""Seeded simulation of the standard game and both variants.

Replicates are grouped in fixed blocks of ``BLOCK_SIZE``; block ``b`` draws from
``SeedSequence(master_seed, spawn_key=(b,))``. A replicate's randomness is
therefore a pure function of ``(master_seed, replicate_index)``, and any split
of the block range across workers reproduces the serial tallies exactly.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .core import (
    MIN_CONDITIONING_MASS,
    Decision,
    ProblemInstance,
    solve,
    suffix_stats,
    survival_complement,
    validate_instance,
)
from .exceptions import DegenerateConditioning, RejectionCapExceeded

BLOCK_SIZE = 1 << 16
DEFAULT_MAX_REJECTION_ATTEMPTS = 10**6


class Game(str, enum.Enum):
    STANDARD = "standard"
    VARIANT_I = "variant1"
    VARIANT_II = "variant2"


@dataclass(frozen=True)
class SimulationConfig:
    replicates: int
    master_seed: int = 0
    game: Game = Game.STANDARD
    threshold_override: int | None = None
    max_rejection_attempts: int = DEFAULT_MAX_REJECTION_ATTEMPTS
    workers: int = 1

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")
        if self.max_rejection_attempts < 1:
            raise ValueError("max_rejection_attempts must be positive")
        object.__setattr__(self, "game", Game(self.game))


@dataclass(frozen=True)
class SimulationResult:
    wins: int
    replicates: int
    frequency: float
    std_error: float
    exact: float
    z_score: float
    seed_echo: int
    game: str
    threshold: int
    decision: str | None = None

    def within(self, n_sigma: float = 4.0) -> bool:
        return abs(self.frequency - self.exact) <= n_sigma * self.std_error

    def as_dict(self) -> dict:
        return asdict(self)


def _result(wins, reps, exact, seed, game, threshold, decision=None) -> SimulationResult:
    f = wins / reps
    se = math.sqrt(f * (1.0 - f) / reps)
    diff = f - exact
    if se > 0:
        z = diff / se
    else:
        z = 0.0 if diff == 0 else math.copysign(math.inf, diff)
    return SimulationResult(int(wins), reps, f, se, exact, z, seed, game, threshold, decision)


def _block_rng(master_seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master_seed, spawn_key=(block,))))


def _blocks(replicates: int):
    for b, start in enumerate(range(0, replicates, BLOCK_SIZE)):
        yield b, min(BLOCK_SIZE, replicates - start)


def _draw(rng, size, p):
    return rng.random((size, p.size)) < p


def _standard_wins(outcomes: np.ndarray, k: int) -> np.ndarray:
    """Stop on the first success at index >= k (1-based); win iff nothing follows."""
    n = outcomes.shape[1]
    window = outcomes[:, k - 1 :]
    stopped = window.any(axis=1)
    stop_at = k - 1 + np.argmax(window, axis=1)
    last_one = n - 1 - np.argmax(outcomes[:, ::-1], axis=1)
    return stopped & (stop_at == last_one)


def _rejection_resample(rng, outcomes, p, cap):
    """Redraw every all-zero row until it has a success; ``cap`` attempts per row."""
    empty = ~outcomes.any(axis=1)
    attempts = 1
    while empty.any():
        if attempts >= cap:
            raise RejectionCapExceeded(
                f"{int(empty.sum())} replicate(s) still without a success after {cap} attempts"
            )
        rows = np.flatnonzero(empty)
        outcomes[rows] = _draw(rng, rows.size, p)
        empty[rows] = ~outcomes[rows].any(axis=1)
        attempts += 1
    return outcomes


def _block_wins(args) -> int:
    master_seed, block, size, p, game, k, play_standard, cap = args
    rng = _block_rng(master_seed, block)
    outcomes = _draw(rng, size, p)
    if game is Game.VARIANT_I:
        outcomes = _rejection_resample(rng, outcomes, p, cap)
    if game is Game.VARIANT_II and not play_standard:
        return int((~outcomes.any(axis=1)).sum())
    return int(_standard_wins(outcomes, k).sum())


def _map(fn, jobs, workers):
    if workers <= 1:
        return [fn(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def simulate(inst: ProblemInstance, cfg: SimulationConfig) -> SimulationResult:
    inst = validate_instance(inst)
    sol = solve(inst)
    k = sol.threshold if cfg.threshold_override is None else cfg.threshold_override
    if not 1 <= k <= inst.n:
        raise ValueError(f"threshold_override {k} outside [1, {inst.n}]")
    p = np.asarray(inst.probs)

    decision = None
    play_standard = True
    if cfg.game is Game.STANDARD:
        exact = _exact_standard(inst, sol, k)
    elif cfg.game is Game.VARIANT_I:
        stats = suffix_stats(inst)
        if not inst.has_certainty and survival_complement(stats) < MIN_CONDITIONING_MASS:
            raise DegenerateConditioning("P(at least one success) too small to simulate Variant I")
        exact = _exact_standard(inst, sol, k)
        if not inst.has_certainty:
            exact = min(exact / survival_complement(stats), 1.0)
    else:
        decision = sol.variant2_decision.value
        play_standard = sol.variant2_decision is not Decision.PREDICT_NO_ONES
        exact = _exact_standard(inst, sol, k) if play_standard else sol.q1

    jobs = [
        (cfg.master_seed, b, size, p, cfg.game, k, play_standard, cfg.max_rejection_attempts)
        for b, size in _blocks(cfg.replicates)
    ]
    wins = sum(_map(_block_wins, jobs, cfg.workers))
    return _result(wins, cfg.replicates, exact, cfg.master_seed, cfg.game.value, k, decision)


def _exact_standard(inst: ProblemInstance, sol, k: int) -> float:
    if k == sol.threshold:
        return sol.value
    from .oracle import threshold_sweep

    return threshold_sweep(inst).values[k - 1]


def _sweep_block(args) -> np.ndarray:
    master_seed, block, size, p = args
    outcomes = _draw(_block_rng(master_seed, block), size, p)
    # ones_from[:, k] = successes at 0-based indices >= k; the threshold-k rule
    # wins exactly when that count is one.
    ones_from = np.cumsum(outcomes[:, ::-1], axis=1, dtype=np.int32)[:, ::-1]
    return (ones_from == 1).sum(axis=0)


def simulate_sweep(inst: ProblemInstance, cfg: SimulationConfig) -> list[SimulationResult]:
    """Standard-game simulation of every threshold k = 1..n on common random numbers."""
    inst = validate_instance(inst)
    p = np.asarray(inst.probs)
    from .oracle import threshold_sweep

    exact = threshold_sweep(inst).values
    jobs = [(cfg.master_seed, b, size, p) for b, size in _blocks(cfg.replicates)]
    wins = np.sum(_map(_sweep_block, jobs, cfg.workers), axis=0)
    return [
        _result(int(w), cfg.replicates, exact[k - 1], cfg.master_seed, Game.STANDARD.value, k)
        for k, w in enumerate(wins, start=1)
    ]


def empirical_argmax(results: list[SimulationResult]) -> int:
    return max(results, key=lambda r: r.wins).threshold
