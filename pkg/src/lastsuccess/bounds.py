"""Lower bounds on the win probability, their case analysis, and extremal instances."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .core import ProblemInstance, Solution, SuffixStats, ceil_inverse, solve, suffix_stats
from .exceptions import BoundViolation, DomainViolation

SOLVER_SLACK = 1e-12
IDENTITY_SLACK = 1e-15

STANDARD_BOUNDS = ("bruss_exp", "one_over_e", "inf_case", "mas1", "menos1_finite", "menos1_exp")
VARIANT1_BOUNDS = ("v1_low_finite", "v1_low_exp", "v1_floor", "v1_high")


class BoundCase(str, enum.Enum):
    RS_INFINITE = "Rs_Infinite"
    RS_AT_LEAST_ONE_FINITE = "Rs_AtLeastOne_Finite"
    R1_BELOW_ONE = "R1_BelowOne"


@dataclass
class BoundReport:
    """Every applicable bound with its gap ``target - bound``.

    Standard-game bounds target V, Variant I bounds target V*.
    """

    case_label: BoundCase
    value: float
    variant1_value: float
    tail_min: float
    standard_bounds: dict[str, float] = field(default_factory=dict)
    variant1_bounds: dict[str, float] = field(default_factory=dict)
    gaps: dict[str, float] = field(default_factory=dict)

    def violations(self, slack: float = SOLVER_SLACK) -> dict[str, float]:
        return {name: gap for name, gap in self.gaps.items() if gap < -slack}

    def as_dict(self) -> dict:
        bounds = {**self.standard_bounds, **self.variant1_bounds}
        return {
            "case": self.case_label.value,
            "tail_min": self.tail_min,
            "bounds": {name: {"value": v, "gap": self.gaps[name]} for name, v in bounds.items()},
        }


@dataclass(frozen=True)
class LemmaDomain:
    p: float
    X: float
    P: float | None = None


def _pow_ratio(n: int, R: float) -> float:
    """(n / (n + R))^n, computed through log1p."""
    return math.exp(n * math.log1p(-R / (n + R)))


def _one_minus_pow_ratio(n: int, R: float) -> float:
    return -math.expm1(n * math.log1p(-R / (n + R)))


def mas1_bound(tail_min: float) -> float:
    m = ceil_inverse(tail_min)
    return (1.0 - 1.0 / m) ** (m - 1)


def inf_case_bound(n: int, s: int, rs_next: float) -> float:
    k = n - s
    if k == 0:
        return 1.0
    return (k / (k + rs_next)) ** k


def menos1_finite_bound(r1: float, n: int) -> float:
    return r1 * _pow_ratio(n, r1)


def v1_low_finite_bound(r1: float, n: int) -> float:
    return r1 * _pow_ratio(n, r1) / _one_minus_pow_ratio(n, r1)


def v1_low_exp_bound(r1: float) -> float:
    return r1 / math.expm1(r1)


def v1_high_bound(rs: float) -> float:
    return 1.0 / (math.e * -math.expm1(-rs))


def _raise_worst(report: BoundReport, names) -> None:
    bad = {k: report.gaps[k] for k in names if report.gaps[k] < -SOLVER_SLACK}
    if bad:
        name = min(bad, key=bad.get)
        raise BoundViolation(name, bad[name], report)


def classify_and_bound(sol: Solution, stats: SuffixStats, check: bool = True) -> BoundReport:
    """Classify the instance and evaluate the standard-game lower bounds.

    Raises :class:`BoundViolation` (when ``check``) if any bound exceeds V by
    more than the solver slack.
    """
    n, s = stats.n, sol.threshold
    tail_min = min(stats.probs[s - 1 :])
    if sol.threshold_prob_is_one:
        case = BoundCase.RS_INFINITE
    elif sol.r1 >= 1.0:
        case = BoundCase.RS_AT_LEAST_ONE_FINITE
    else:
        case = BoundCase.R1_BELOW_ONE

    bounds: dict[str, float] = {}
    if case is BoundCase.RS_INFINITE:
        bounds["inf_case"] = inf_case_bound(n, s, stats.R(s + 1))
        bounds["one_over_e"] = 1.0 / math.e
    elif case is BoundCase.RS_AT_LEAST_ONE_FINITE:
        bounds["mas1"] = mas1_bound(tail_min)
        bounds["bruss_exp"] = sol.rs * math.exp(-sol.rs)
        bounds["one_over_e"] = 1.0 / math.e
    else:
        bounds["menos1_finite"] = menos1_finite_bound(sol.r1, n)
        bounds["menos1_exp"] = sol.r1 * math.exp(-sol.r1)

    report = BoundReport(case, sol.value, sol.variant1_value, tail_min, standard_bounds=bounds)
    report.gaps.update({name: sol.value - v for name, v in bounds.items()})
    if check:
        _raise_worst(report, bounds)
    return report


def variant1_bound(
    sol: Solution, stats: SuffixStats, report: BoundReport | None = None, check: bool = True
) -> BoundReport:
    """Fill the Variant I section of ``report``.

    Only meaningful when every p_i < 1; with a certain trial V* = V and the
    section stays empty.
    """
    if report is None:
        report = classify_and_bound(sol, stats, check=check)
    if any(p == 1.0 for p in stats.probs):
        return report
    n = stats.n
    bounds: dict[str, float] = {}
    if sol.r1 < 1.0:
        bounds["v1_low_finite"] = v1_low_finite_bound(sol.r1, n)
        bounds["v1_low_exp"] = v1_low_exp_bound(sol.r1)
        bounds["v1_floor"] = 1.0 / (math.e - 1.0)
    else:
        bounds["v1_high"] = v1_high_bound(sol.rs)
    report.variant1_bounds.update(bounds)
    report.gaps.update({name: sol.variant1_value - v for name, v in bounds.items()})
    if check:
        _raise_worst(report, bounds)
    return report


def bound_report(inst: ProblemInstance, check: bool = True) -> BoundReport:
    """Standard and Variant I bounds for ``inst`` in one report."""
    stats = suffix_stats(inst)
    sol = solve(inst)
    report = classify_and_bound(sol, stats, check=False)
    variant1_bound(sol, stats, report, check=False)
    if check:
        _raise_worst(report, report.gaps)
    return report


def minimizer_instance(R: float, n: int, s_offset: int = 0, prefix: float = 1.0) -> ProblemInstance:
    """Equal-parameter instance x_i = R/(R+n) on n trials, after ``s_offset`` prefix trials.

    With ``s_offset=0`` this is the minimiser of the R_1 < 1 bounds; with a
    certain prefix trial (``prefix=1``) it is the extremal case where the
    threshold lands on a certain success.
    """
    if not R > 0:
        raise DomainViolation(f"R must be positive, got {R!r}")
    if n < 1 or s_offset < 0:
        raise DomainViolation(f"need n >= 1 and s_offset >= 0, got n={n}, s_offset={s_offset}")
    x = R / (R + n)
    return ProblemInstance((float(prefix),) * s_offset + (x,) * n)


def eme_instance(m: int, prefix: tuple[float, ...] = ()) -> ProblemInstance:
    """m - 1 trials with probability 1/m, optionally after arbitrary ``prefix`` trials.

    The tail odds sum to exactly 1, so the optimal value is (1 - 1/m)^(m-1).
    """
    if m < 2:
        raise DomainViolation(f"m must be at least 2, got {m}")
    return ProblemInstance(tuple(prefix) + (1.0 / m,) * (m - 1))


def menor2_x_max(P: float) -> float:
    """Largest double X with X (1 - P) <= 1 exactly; ``1/(1-P)`` can round past it."""
    X = 1.0 / (1.0 - P)
    while Fraction(X) * (1 - Fraction(P)) > 1:
        X = math.nextafter(X, 0.0)
    return X


def menor1_lhs(p, X):
    return (1 - p) * ((p / (1 - p)) + X) / X


def menor2_lhs(p, P, X):
    return ((1 - p) / (1 - P)) * ((p / (1 - p)) + X - P / (1 - P)) / X


def lemma_menor1_holds(d: LemmaDomain) -> bool:
    """(1-p)(p/(1-p) + X)/X <= 1 for p in (0,1), X >= 1.

    A float result above 1 + 1e-15 is re-evaluated exactly on the same
    (double) inputs before being reported as a failure.
    """
    if not (0.0 < d.p < 1.0) or not d.X >= 1.0:
        raise DomainViolation(f"menor1 needs p in (0,1) and X >= 1, got {d}")
    if menor1_lhs(d.p, d.X) <= 1.0 + IDENTITY_SLACK:
        return True
    return menor1_lhs(Fraction(d.p), Fraction(d.X)) <= 1


def lemma_menor2_holds(d: LemmaDomain) -> bool:
    """((1-p)/(1-P)) (p/(1-p) + X - P/(1-P)) / X <= 1 for p < P, 1 <= X <= 1/(1-P)."""
    P = d.P
    if P is None or not (0.0 < d.p < P < 1.0):
        raise DomainViolation(f"menor2 needs 0 < p < P < 1, got {d}")
    # Domain membership decided exactly: X (1 - P) <= 1.
    if not (d.X >= 1.0 and Fraction(d.X) * (1 - Fraction(P)) <= 1):
        raise DomainViolation(f"menor2 needs 1 <= X <= 1/(1-P), got {d}")
    if menor2_lhs(d.p, P, d.X) <= 1.0 + IDENTITY_SLACK:
        return True
    return menor2_lhs(Fraction(d.p), Fraction(P), Fraction(d.X)) <= 1
