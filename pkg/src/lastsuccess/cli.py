"""Command-line interface.

Usage:
    lastsuccess solve instance.json
    lastsuccess solve 0.5,0.5 --csv
    lastsuccess bounds 0.1,0.1
    lastsuccess check instance.json --max-n-enumerate 20
    lastsuccess simulate 0.5,0.5 --game variant1 --reps 1000000 --seed 7
    lastsuccess sweep --what mal --p-grid 0.20:0.49:0.01 --n-grid 10

Exit codes: 0 ok, 1 I/O, 2 validation or parse error, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import __version__
from .bounds import bound_report
from .core import (
    HomogeneousSpec,
    ProblemInstance,
    find_mal_counterexamples,
    homogeneous_solve,
    mal_threshold,
    solve,
    validate_instance,
)
from .exceptions import DegenerateConditioning, LastSuccessError, Mismatch, RejectionCapExceeded
from .montecarlo import Game, SimulationConfig, simulate
from .oracle import MAX_ENUMERATE_N, cross_validate, dp_optimal, threshold_sweep

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_INTERNAL = 0, 1, 2, 3


class CLIError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def format_real(x: float) -> str:
    """17 significant digits; JSON-compatible apart from +/-Infinity and NaN."""
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    text = f"{x:.17g}"
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return format_real(obj)
    if isinstance(obj, (int, str)):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if rows:
        writer.writerow(rows[0].keys())
        for row in rows:
            writer.writerow([_csv_cell(v) for v in row.values()])
    return buf.getvalue()


def _csv_cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_real(v)
    if isinstance(v, (list, tuple)):
        return ";".join(str(x) for x in v)
    return "" if v is None else v


# ---------------------------------------------------------------------------
# input
# ---------------------------------------------------------------------------

def _parse_inline(text: str) -> list[float] | None:
    parts = [t.strip() for t in text.split(",")]
    try:
        return [float(t) for t in parts if t]
    except ValueError:
        return None


def load_instance(source: str) -> tuple[ProblemInstance, str | None, HomogeneousSpec | None]:
    """Read an instance file, or parse an inline comma-separated list."""
    path = Path(source)
    if not path.exists():
        inline = _parse_inline(source)
        if inline is None:
            raise CLIError(f"cannot read {source!r}: no such file", EXIT_IO)
        return _validated(inline), None, None
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CLIError(f"cannot read {source}: {exc}", EXIT_IO) from exc
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CLIError(f"{source}: invalid JSON ({exc})", EXIT_INVALID) from exc
    if not isinstance(data, dict) or ("p" in data) == ("homogeneous" in data):
        raise CLIError(f'{source}: expected an object with exactly one of "p" or "homogeneous"', EXIT_INVALID)
    label = data.get("label")
    if "p" in data:
        if not isinstance(data["p"], list):
            raise CLIError(f'{source}: "p" must be a list', EXIT_INVALID)
        return _validated(data["p"]), label, None
    h = data["homogeneous"]
    try:
        spec = HomogeneousSpec(float(h["p"]), int(h["n"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise CLIError(f"{source}: bad homogeneous block ({exc})", EXIT_INVALID) from exc
    return spec.expand(), label, spec


def _validated(values) -> ProblemInstance:
    try:
        return validate_instance(values)
    except LastSuccessError as exc:
        raise CLIError(f"invalid instance: {exc}", EXIT_INVALID) from exc


def parse_grid(text: str, kind=float) -> list:
    """``a,b,c`` or inclusive ``start:stop:step``."""
    try:
        if ":" in text:
            start, stop, step = (float(t) for t in text.split(":"))
            if step <= 0:
                raise ValueError("step must be positive")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            values = [round(start + i * step, 12) for i in range(count)]
        else:
            values = [float(t) for t in text.split(",") if t.strip()]
        if kind is int:
            if any(v != int(v) for v in values):
                raise ValueError("integer grid expected")
            values = [int(v) for v in values]
    except ValueError as exc:
        raise CLIError(f"cannot parse grid {text!r}: {exc}", EXIT_INVALID) from exc
    if not values:
        raise CLIError(f"empty grid {text!r}", EXIT_INVALID)
    return values


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

def solution_report(inst: ProblemInstance, label=None, spec=None) -> dict:
    try:
        sol = solve(inst)
    except DegenerateConditioning as exc:
        raise CLIError(str(exc), EXIT_INVALID) from exc
    report = {
        "label": label,
        "n": inst.n,
        "p": list(inst.probs),
        "s": sol.threshold,
        "V": sol.value,
        "V_star": sol.variant1_value,
        "V_double_star": sol.variant2_value,
        "decision": sol.variant2_decision.value,
        "R1": sol.r1,
        "Rs": sol.rs,
        "R1_near_one": sol.r1_near_one,
        "R1_minus_1": sol.r1 - 1.0,
        "log_Q1": sol.log_q1,
    }
    oracle = {"dp_value": dp_optimal(inst).value}
    if inst.n <= MAX_ENUMERATE_N:
        oracle["sweep_argmax"] = list(threshold_sweep(inst).argmax_set)
    report["oracle"] = oracle
    if spec is not None:
        closed = homogeneous_solve(spec)
        report["homogeneous"] = {
            "p": spec.p,
            "n": spec.n,
            "m": spec.m,
            "s": closed.threshold,
            "V": closed.value,
            "s_star": mal_threshold(spec),
        }
    report["meta"] = {"version": __version__}
    return report


def _emit(report: dict, as_csv: bool) -> str:
    if not as_csv:
        return dumps(report) + "\n"
    flat = {k: v for k, v in report.items() if not isinstance(v, dict)}
    flat["p"] = report["p"]
    for name, entry in report.get("bounds", {}).items():
        flat[f"{name}"] = entry["value"]
        flat[f"{name}_gap"] = entry["gap"]
    return _csv_text([flat])


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_solve(args) -> int:
    inst, label, spec = load_instance(args.instance)
    sys.stdout.write(_emit(solution_report(inst, label, spec), args.csv))
    return EXIT_OK


def cmd_bounds(args) -> int:
    inst, label, spec = load_instance(args.instance)
    report = solution_report(inst, label, spec)
    bounds = bound_report(inst, check=False)
    report["case"] = bounds.case_label.value
    report["tail_min"] = bounds.tail_min
    report["bounds"] = bounds.as_dict()["bounds"]
    violations = bounds.violations()
    report["violations"] = sorted(violations)
    sys.stdout.write(_emit(report, args.csv))
    if violations:
        worst = min(violations, key=violations.get)
        print(f"bound violation: {worst} exceeds its target by {-violations[worst]:.3e}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


def cmd_check(args) -> int:
    inst, label, _ = load_instance(args.instance)
    try:
        verdict = cross_validate(inst, max_n_enumerate=args.max_n_enumerate, raise_on_mismatch=False)
    except DegenerateConditioning as exc:
        raise CLIError(str(exc), EXIT_INVALID) from exc
    out = {"label": label, "n": inst.n, **verdict.as_dict(), "meta": {"version": __version__}}
    sys.stdout.write(dumps(out) + "\n")
    return EXIT_OK if verdict.ok else EXIT_INTERNAL


def cmd_simulate(args) -> int:
    inst, label, _ = load_instance(args.instance)
    try:
        cfg = SimulationConfig(
            replicates=args.reps,
            master_seed=args.seed,
            game=Game(args.game),
            threshold_override=args.threshold,
            max_rejection_attempts=args.max_attempts,
            workers=args.workers,
        )
        result = simulate(inst, cfg)
    except (DegenerateConditioning, RejectionCapExceeded, ValueError) as exc:
        raise CLIError(str(exc), EXIT_INVALID) from exc
    out = {"label": label, **result.as_dict(), "within_4_sigma": result.within(4.0)}
    out["meta"] = {"version": __version__, "seed": args.seed}
    sys.stdout.write(dumps(out) + "\n")
    return EXIT_OK


def _grid_instances(args):
    for x in parse_grid(args.p_grid):
        for n in parse_grid(args.n_grid, int):
            if n < 1:
                raise CLIError(f"n must be positive, got {n}", EXIT_INVALID)
            if args.grid_kind == "minimizer":
                if x <= 0:
                    raise CLIError(f"R must be positive, got {x}", EXIT_INVALID)
                yield x, n, ProblemInstance((x / (x + n),) * n)
            else:
                if not 0.0 < x < 1.0:
                    raise CLIError(f"p must lie in (0, 1), got {x}", EXIT_INVALID)
                yield x, n, ProblemInstance((x,) * n)


def cmd_sweep(args) -> int:
    rows = []
    if args.what == "mal":
        p_grid, n_grid = parse_grid(args.p_grid), parse_grid(args.n_grid, int)
        if any(not 0.0 < p < 1.0 for p in p_grid) or any(n < 1 for n in n_grid):
            raise CLIError("mal sweep needs p in (0, 1) and n >= 1", EXIT_INVALID)
        hits = {(h.p, h.n): h for h in find_mal_counterexamples(p_grid, n_grid)}
        for p in p_grid:
            for n in n_grid:
                spec = HomogeneousSpec(p, n)
                hit = hits.get((p, n))
                if hit is None:
                    s = homogeneous_solve(spec).threshold
                    v = threshold_sweep(spec.expand()).values[s - 1]
                    row = dict(p=p, n=n, s=s, s_star=s, V_s=v, V_sstar=v, mismatch=False)
                else:
                    row = dict(p=p, n=n, s=hit.s, s_star=hit.s_star, V_s=hit.value_s,
                               V_sstar=hit.value_s_star, mismatch=True)
                rows.append(row)
    elif args.what == "bounds":
        key = "R" if args.grid_kind == "minimizer" else "p"
        for x, n, inst in _grid_instances(args):
            report = bound_report(inst, check=False)
            for name, entry in report.as_dict()["bounds"].items():
                rows.append({key: x, "n": n, "case": report.case_label.value, "bound": name,
                             "value": entry["value"], "gap": entry["gap"]})
    else:
        for x, n, inst in _grid_instances(args):
            sol = solve(inst)
            argmax = threshold_sweep(inst).argmax_set if n <= MAX_ENUMERATE_N else ()
            rows.append({"p" if args.grid_kind == "homogeneous" else "R": x, "n": n,
                         "s": sol.threshold, "V": sol.value, "argmax": argmax,
                         "s_in_argmax": sol.threshold in argmax})
    sys.stdout.write(_csv_text(rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lastsuccess", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_instance(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("instance", help="JSON instance file or inline list such as 0.5,0.5")
        return p

    for name, fn, help_ in (("solve", cmd_solve, "optimal threshold and values"),
                            ("bounds", cmd_bounds, "lower bounds and their gaps")):
        p = with_instance(name, help_)
        fmt = p.add_mutually_exclusive_group()
        fmt.add_argument("--json", action="store_true", help="JSON report (default)")
        fmt.add_argument("--csv", action="store_true", help="single CSV row")
        p.set_defaults(func=fn)

    p = with_instance("check", "cross-validate the solver against the oracles")
    p.add_argument("--max-n-enumerate", type=int, default=MAX_ENUMERATE_N)
    p.set_defaults(func=cmd_check)

    p = with_instance("simulate", "Monte Carlo estimate of a game's win probability")
    p.add_argument("--game", choices=[g.value for g in Game], default="standard")
    p.add_argument("--reps", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=int, default=None)
    p.add_argument("--max-attempts", type=int, default=10**6)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="CSV sweep over homogeneous or minimizer grids")
    p.add_argument("--p-grid", required=True, help="a,b,c or start:stop:step")
    p.add_argument("--n-grid", required=True)
    p.add_argument("--what", choices=["threshold", "bounds", "mal"], default="threshold")
    p.add_argument("--grid-kind", choices=["homogeneous", "minimizer"], default="homogeneous",
                   help="minimizer reads the p grid as odds sums R, instance R/(R+n) repeated n times")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CLIError as exc:
        print(f"lastsuccess: {exc}", file=sys.stderr)
        return exc.code
    except Mismatch as exc:
        print(f"lastsuccess: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
