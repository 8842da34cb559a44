"""Command-line interface: ``cvnetwork {state,curve,teleport,scan}``.

Stations are numbered from 1 on the command line.  Exit codes: 0 success,
2 usage error, 3 a homodyne conditioning hit a degenerate (zero-variance)
quadrature.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import secrets
import sys
from typing import Sequence

import numpy as np

from .network import (
    ALL_EQUAL,
    CUSTOM,
    ONE_SQUEEZED,
    SCENARIOS,
    NetworkConfig,
    build_ghz_state,
    momentum_correlation_variance,
    position_difference_variance,
)
from .teleport import (
    DB_PER_NEPER,
    GainSchedule,
    closed_form_fidelity,
    db_to_r,
    fidelity_curve,
    optimal_gain,
    r_to_db,
    run_protocol,
    threshold_scan,
)

SCHEMA = "1"
CURVE_HEADER = ("N", "squeezing_dB", "r", "gain", "F_opt")
EXIT_USAGE = 2
EXIT_DEGENERATE = 3


class UsageError(Exception):
    pass


def fmt(value) -> str:
    """CSV cell: 12 significant digits for floats, blank for missing values."""
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return f"{float(value):.12g}"


def _csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([c if isinstance(c, str) else fmt(c) for c in row])
    return buf.getvalue()


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _grid(lo: float, hi: float, step: float) -> list[float]:
    if step <= 0 or hi < lo:
        raise UsageError(f"empty grid: min={lo}, max={hi}, step={step}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + i * step for i in range(count)]


def _add_squeezing(p: argparse.ArgumentParser, grid: bool = False) -> None:
    p.add_argument("--scenario", choices=SCENARIOS, help="squeezing pattern (default all-equal)")
    g = p.add_mutually_exclusive_group()
    if grid:
        g.add_argument("--db-grid", nargs=3, type=float, metavar=("MIN", "MAX", "STEP"),
                       help="squeezing grid in dB (default 0 20 0.5)")
        g.add_argument("--r-grid", nargs=3, type=float, metavar=("MIN", "MAX", "STEP"),
                       help="squeezing grid in natural units r")
        return
    g.add_argument("--r", type=float, help="squeezing parameter r (all-equal) or r_1 (one-squeezed)")
    g.add_argument("--r1", type=float, help="squeezing of mode 1; implies --scenario one-squeezed")
    g.add_argument("--db", type=float, help="squeezing in dB, converted as r = dB / %.7f" % DB_PER_NEPER)
    g.add_argument("--r-values", type=_float_list, help="comma-separated per-mode r; implies --scenario custom")


def _add_common(p: argparse.ArgumentParser, default_format: str = "json") -> None:
    p.add_argument("--format", choices=("csv", "json"), default=default_format)
    p.add_argument("--out", default="-", help="output path (default standard output)")
    p.add_argument("--seed", type=int, help="64-bit seed; generated and reported if omitted")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cvnetwork",
        description="Continuous-variable teleportation network simulator.",
        epilog=f"Squeezing in dB = 10 log10(e^(2r)) = {DB_PER_NEPER:.7f} * r.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("state", help="build the N-party resource state and its diagnostics")
    p.add_argument("--n", type=int, required=True)
    _add_squeezing(p)
    p.add_argument("--gain", default="optimal", help="assisting gain for the momentum correlation (float or 'optimal')")
    _add_common(p)

    p = sub.add_parser("curve", help="optimal fidelity versus squeezing")
    p.add_argument("--n", type=int, nargs="+", required=True)
    _add_squeezing(p, grid=True)
    _add_common(p, default_format="csv")

    p = sub.add_parser("teleport", help="run the teleportation protocol")
    p.add_argument("--n", type=int, required=True)
    _add_squeezing(p)
    p.add_argument("--k", type=int, default=1, help="sender station (1-based)")
    p.add_argument("--l", type=int, default=2, help="receiver station (1-based)")
    p.add_argument("--g", type=float, default=1.0, help="gain on the Bell-detection results")
    p.add_argument("--gains", default="optimal",
                   help="assisting gains: 'optimal', one value, or one comma-separated value per station")
    p.add_argument("--alpha", nargs=2, type=float, default=(0.0, 0.0), metavar=("X", "P"))
    p.add_argument("--trials", type=int, default=1)
    _add_common(p)

    p = sub.add_parser("scan", help="classify N by whether the optimal fidelity becomes classical")
    p.add_argument("--n", type=int, nargs="+", help="values of N")
    p.add_argument("--n-range", type=int, nargs=2, metavar=("MIN", "MAX"))
    p.add_argument("--scenario", choices=(ALL_EQUAL, ONE_SQUEEZED), default=ALL_EQUAL)
    p.add_argument("--r-max", type=float, default=6.0)
    p.add_argument("--r-step", type=float, default=1e-3)
    _add_common(p)
    return parser


def _squeezing(args) -> tuple[str, float | list[float], dict]:
    """Resolve scenario and squeezing flags into ``(scenario, r, echo)``."""
    scenario = args.scenario
    if args.r_values is not None:
        if scenario not in (None, CUSTOM):
            raise UsageError("--r-values requires --scenario custom")
        scenario, r = CUSTOM, args.r_values
    elif args.r1 is not None:
        if scenario not in (None, ONE_SQUEEZED):
            raise UsageError("--r1 requires --scenario one-squeezed")
        scenario, r = ONE_SQUEEZED, args.r1
    else:
        scenario = scenario or ALL_EQUAL
        if scenario == CUSTOM:
            raise UsageError("--scenario custom needs --r-values")
        r = db_to_r(args.db) if args.db is not None else (args.r if args.r is not None else 0.0)
    echo = {"scenario": scenario, "r": r}
    if args.db is not None:
        echo["squeezing_dB"] = args.db
    return scenario, r, echo


def _config(args) -> tuple[NetworkConfig, dict]:
    scenario, r, echo = _squeezing(args)
    try:
        config = NetworkConfig.from_scenario(args.n, scenario, r)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return config, echo


def _matrix(a: np.ndarray) -> list[list[float]]:
    return [[float(v) for v in row] for row in a]


def cmd_state(args) -> tuple[str, bool]:
    config, echo = _config(args)
    n = config.n
    state = build_ghz_state(config)
    if args.gain == "optimal":
        gn = 0.0 if n == 2 else (
            optimal_gain(n, config.scenario, config.r[0]) if config.scenario != CUSTOM
            else GainSchedule.optimal(config).gn
        )
    else:
        gn = _parse_float(args.gain, "--gain")
    pairs = []
    for k in range(n):
        for l in range(k + 1, n):
            pairs.append({
                "k": k + 1,
                "l": l + 1,
                "var_x_diff": position_difference_variance(state, k, l),
                "momentum_correlation": momentum_correlation_variance(state, k, l, gn),
            })
    if args.format == "csv":
        rows = [[fmt(v) for v in row] for row in state.cov]
        header = [f"{q}{m + 1}" for m in range(n) for q in ("x", "p")]
        return _csv_text(header, rows), False
    doc = {
        "schema": SCHEMA,
        "command": "state",
        "request": {"n": n, **echo, "gain": gn, "seed": args.seed},
        "results": [{
            "mean": [float(v) for v in state.mean],
            "cov": _matrix(state.cov),
            "pairs": pairs,
        }],
    }
    return _json(doc), False


def cmd_curve(args) -> tuple[str, bool]:
    scenario = args.scenario or ALL_EQUAL
    if scenario == CUSTOM:
        raise UsageError("curves need --scenario all-equal or one-squeezed")
    if args.r_grid is not None:
        db = [r_to_db(r) for r in _grid(*args.r_grid)]
    else:
        db = _grid(*(args.db_grid or (0.0, 20.0, 0.5)))
    try:
        rows = fidelity_curve(args.n, scenario, db)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    table = [(row.n, row.squeezing_db, row.r, row.gain, row.fidelity) for row in rows]
    if args.format == "csv":
        return _csv_text(CURVE_HEADER, table), False
    doc = {
        "schema": SCHEMA,
        "command": "curve",
        "request": {"n": sorted(set(args.n)), "scenario": scenario, "seed": args.seed},
        "results": [dict(zip(CURVE_HEADER, row)) for row in table],
    }
    return _json(doc), False


def _parse_float(text: str, flag: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"{flag}: expected a number, got {text!r}") from None


def cmd_teleport(args) -> tuple[str, bool]:
    config, echo = _config(args)
    n = config.n
    k, l = args.k - 1, args.l - 1
    if k == l:
        raise UsageError("sender and receiver must differ")
    if not (0 <= k < n and 0 <= l < n):
        raise UsageError(f"stations must lie in 1..{n}")
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    if args.gains == "optimal":
        gains = GainSchedule.optimal(config, k, l)
        gains = GainSchedule(args.g, gains.gn)
    else:
        vals = [_parse_float(v, "--gains") for v in args.gains.split(",")]
        if len(vals) == 1:
            gains = GainSchedule(args.g, vals[0])
        elif len(vals) == n - 2:
            gains = GainSchedule(args.g, 0.0, tuple(vals))
        else:
            raise UsageError(f"--gains needs 1 or {n - 2} values, got {len(vals)}")
    alpha = tuple(args.alpha)
    streams = np.random.SeedSequence(args.seed).spawn(args.trials)
    trials = []
    degenerate = False
    for i, ss in enumerate(streams):
        out = run_protocol(config, k, l, alpha, gains, rng=np.random.Generator(np.random.Philox(ss)))
        degenerate |= out.degenerate
        trials.append({
            "trial": i,
            "x_u": out.x_u,
            "p_v": out.p_v,
            "assisting": list(out.assisting),
            "fidelity": out.fidelity,
            "shot_fidelity": out.shot_fidelity,
            "degenerate": out.degenerate,
        })
    closed = closed_form_fidelity(n, config.scenario, config.r if config.scenario == CUSTOM else config.r[0],
                                  gains, alpha, k, l)
    fids = [t["fidelity"] for t in trials]
    summary = {
        "fidelity": fids[0],
        "fidelity_spread": max(fids) - min(fids),
        "closed_form_fidelity": closed,
        "closed_form_delta": abs(fids[0] - closed),
        "mean_shot_fidelity": float(np.mean([t["shot_fidelity"] for t in trials])),
        "degenerate": degenerate,
    }
    if args.format == "csv":
        rows = [(t["trial"], t["x_u"], t["p_v"], ";".join(fmt(v) for v in t["assisting"]),
                 t["fidelity"], t["shot_fidelity"]) for t in trials]
        return _csv_text(("trial", "x_u", "p_v", "assisting", "fidelity", "shot_fidelity"), rows), degenerate
    doc = {
        "schema": SCHEMA,
        "command": "teleport",
        "request": {
            "n": n, **echo, "k": args.k, "l": args.l, "g": gains.g, "gn": gains.gn,
            "per_station": None if gains.per_station is None else list(gains.per_station),
            "alpha": list(alpha), "trials": args.trials, "seed": args.seed,
        },
        "results": trials,
        "summary": summary,
    }
    return _json(doc), degenerate


def cmd_scan(args) -> tuple[str, bool]:
    if args.n_range is not None:
        ns = list(range(args.n_range[0], args.n_range[1] + 1))
    elif args.n:
        ns = args.n
    else:
        raise UsageError("scan needs --n or --n-range")
    if any(n < 2 for n in ns):
        raise UsageError("N must be at least 2")
    try:
        results = threshold_scan(ns, args.r_max, args.r_step, args.scenario)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.format == "csv":
        rows = []
        for s in results:
            (rmax, fmax) = s.maxima[0] if s.maxima else (None, None)
            (rmin, fmin) = s.minima[0] if s.minima else (None, None)
            rows.append((s.n, s.classification, rmax, fmax, rmin, fmin, s.min_fidelity))
        header = ("N", "classification", "r_max", "F_max", "r_min", "F_min", "min_F")
        return _csv_text(header, rows), False

    def points(ps):
        return [{"r": r, "squeezing_dB": r_to_db(r), "F": f} for r, f in ps]

    doc = {
        "schema": SCHEMA,
        "command": "scan",
        "request": {"n": ns, "scenario": args.scenario, "r_max": args.r_max, "r_step": args.r_step, "seed": args.seed},
        "results": [
            {"N": s.n, "classification": s.classification, "maxima": points(s.maxima),
             "minima": points(s.minima), "min_fidelity": s.min_fidelity}
            for s in results
        ],
    }
    return _json(doc), False


def _json(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


COMMANDS = {"state": cmd_state, "curve": cmd_curve, "teleport": cmd_teleport, "scan": cmd_scan}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed is None:
        args.seed = secrets.randbits(64)
        print(f"seed: {args.seed}", file=sys.stderr)
    elif not 0 <= args.seed < 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_USAGE
    try:
        text, degenerate = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
    if degenerate:
        print("warning: degenerate homodyne conditioning encountered", file=sys.stderr)
        return EXIT_DEGENERATE
    return 0


if __name__ == "__main__":
    sys.exit(main())
