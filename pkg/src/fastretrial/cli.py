"""Command-line entry point.

    fastretrial simulate --config scenario.json --out results/
    fastretrial experiment fig3a --out results/ [--seed 7] [--figures]
    fastretrial analyze --n1 30 --l1 20 --lambda 0.2 [--lambda-max 0.2]
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from fastretrial.config import SEED_MAX, ConfigError, ScenarioConfig
from fastretrial.engine import run
from fastretrial.experiments import PRESETS, run_preset, write_preset
from fastretrial.report import jsonable, write_summary, write_trace
from fastretrial.stability import check_stability, max_stable_n1, min_stable_l1, optimal_l1, optimal_z

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2

log = logging.getLogger("fastretrial")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_INVALID)


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v <= SEED_MAX:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _prepare_out(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    try:
        cfg = ScenarioConfig.load(args.config)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    metrics = run(cfg)
    try:
        out = _prepare_out(args.out)
        write_trace(metrics, out / "trace.csv")
        doc = write_summary(metrics, out / "summary.json")
    except OSError as exc:
        print(f"cannot write results: {exc}", file=sys.stderr)
        return EXIT_IO
    log.info("final L1 %s, mean queue %.4g", doc["final_l1"], doc["time_avg_mean_queue"])
    return EXIT_OK


def cmd_experiment(args) -> int:
    table = run_preset(args.preset, seed=args.seed, horizon=args.horizon, workers=args.workers)
    try:
        out = _prepare_out(args.out)
        path = write_preset(table, out)
        if args.figures:
            from fastretrial.plotting import render

            render(table, out)
    except OSError as exc:
        print(f"cannot write results: {exc}", file=sys.stderr)
        return EXIT_IO
    log.info("wrote %s", path)
    return EXIT_OK


def analyze(n1: int, l1: int, lam: float, lambda_max: float | None = None) -> dict:
    if n1 < 1 or l1 < 1:
        raise ValueError("n1 and l1 must be >= 1")
    if not (math.isfinite(lam) and lam >= 0):
        raise ValueError("lambda must be finite and >= 0")
    rep = check_stability(lam, l1, n1)
    out = {
        "n1": n1,
        "l1": l1,
        "lambda": lam,
        "stable": rep.stable,
        "margin": rep.margin,
        "full_load_success": rep.full_load_success,
        "min_l1": min_stable_l1(lam, n1) if lam < 1 else None,
        "z_star": None,
        "l1_star": None,
    }
    total = n1 * lam
    if n1 >= 2 and total < n1:
        out["z_star"] = optimal_z(total, n1)
        out["l1_star"] = optimal_l1(total, n1)
    lmax = lam if lambda_max is None else lambda_max
    out["lambda_max"] = lmax
    if 0 < lmax <= 1 and l1 >= 2:
        exact, approx = max_stable_n1(lmax, l1)
        out["n1_bound_exact"] = exact
        out["n1_bound_exp"] = approx
    elif lambda_max is not None:
        raise ValueError("lambda-max must be in (0, 1] and l1 >= 2 for the device bound")
    else:
        out["n1_bound_exact"] = out["n1_bound_exp"] = None
    return out


def cmd_analyze(args) -> int:
    try:
        report = analyze(args.n1, args.l1, args.lam, args.lambda_max)
    except ValueError as exc:
        print(f"invalid arguments: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(json.dumps(jsonable(report), indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fastretrial", description="Fast-retrial random access simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="run one scenario from a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("experiment", help="reproduce a figure preset as CSV")
    e.add_argument("preset", choices=PRESETS)
    e.add_argument("--out", required=True, help="output directory")
    e.add_argument("--seed", type=_seed, default=1)
    e.add_argument("--horizon", type=int, default=None, help="override the preset horizon")
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--figures", action="store_true", help="also render a PNG next to the CSV")
    e.set_defaults(func=cmd_experiment)

    a = sub.add_parser("analyze", help="closed-form stability report")
    a.add_argument("--n1", type=int, required=True)
    a.add_argument("--l1", type=int, required=True)
    a.add_argument("--lambda", dest="lam", type=float, required=True)
    a.add_argument("--lambda-max", type=float, default=None)
    a.set_defaults(func=cmd_analyze)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if getattr(args, "horizon", None) is not None and args.horizon <= 0:
        print("horizon must be > 0", file=sys.stderr)
        return EXIT_INVALID
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
