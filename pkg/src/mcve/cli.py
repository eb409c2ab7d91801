"""Command-line front end.

    mcve run --scenario generic --engine mc-ve --n 1000000 --seed 42 --y0 -100
    mcve compare --a a.txt --b b.txt
    mcve scenarios list | show <id>

Exit codes: 0 ok, 1 compare found a difference, 2 bad flags,
3 scenario or input file error, 4 engine error.
Machine output goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import exprlang
from .engines import EngineConfig, EngineError, run_jcgm101, run_mc_ve
from .model import ModelError
from .scenarios import BUILTINS, ScenarioError, get_scenario, serialize
from .stats import StatsError, compare_samples, summarize

EXIT_OK = 0
EXIT_DIFFERENT = 1
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_ENGINE = 4

ENGINES = {"jcgm101": run_jcgm101, "mc-ve": run_mc_ve}


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _probability(text: str) -> float:
    value = float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"must be in (0, 1), got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mcve", description="Monte Carlo uncertainty evaluation with virtual experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an engine on a scenario")
    run.add_argument("--scenario", required=True, help="built-in id or path to a scenario JSON file")
    run.add_argument("--engine", required=True, choices=sorted(ENGINES))
    run.add_argument("--n", type=_positive_int, required=True, help="number of Monte Carlo runs")
    run.add_argument("--seed", type=int, required=True, help="master seed")
    run.add_argument("--y0", type=float, default=None, help="hypothetical measurand for mc-ve (default: scenario's)")
    run.add_argument("--coverage", type=_probability, default=0.95)
    run.add_argument("--bins", type=_positive_int, default=200)
    run.add_argument("--out", type=Path, default=None, help="JSON report path (default: stdout)")
    run.add_argument("--hist", type=Path, default=None, help="histogram CSV path")
    run.add_argument("--samples", type=Path, default=None, help="raw samples path, one value per line")
    run.add_argument("--workers", type=_positive_int, default=1)
    run.add_argument(
        "--fast-inner-loop",
        action="store_true",
        help="mc-ve: draw the noise mean directly instead of m noise values",
    )

    cmp_ = sub.add_parser("compare", help="equivalence check of two sample files")
    cmp_.add_argument("--a", type=Path, required=True)
    cmp_.add_argument("--b", type=Path, required=True)
    cmp_.add_argument("--alpha", type=_probability, default=0.001)

    sc = sub.add_parser("scenarios", help="list or show built-in scenarios")
    sc_sub = sc.add_subparsers(dest="action", required=True)
    sc_sub.add_parser("list")
    show = sc_sub.add_parser("show")
    show.add_argument("id")
    return parser


def _emit(text: str, path: Optional[Path]) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text, encoding="utf-8")


def cmd_run(args: argparse.Namespace) -> int:
    try:
        scenario = get_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"mcve: {exc}", file=sys.stderr)
        return EXIT_INPUT
    y0 = scenario.default_y0 if args.y0 is None else args.y0
    cfg = EngineConfig(
        n=args.n,
        master_seed=args.seed,
        y0=y0,
        literal_inner_loop=not args.fast_inner_loop,
        workers=args.workers,
    )
    t0 = time.perf_counter()
    try:
        samples = ENGINES[args.engine](scenario.ve, scenario.data, scenario.typeb, cfg, scenario.id)
        summary = summarize(samples, args.coverage, args.bins) if args.n >= 2 else None
    except (ModelError, EngineError, exprlang.EvalError, StatsError) as exc:
        print(f"mcve: engine error: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    wall = time.perf_counter() - t0

    result = {
        "scenario_id": scenario.id,
        "engine": samples.engine,
        "n": samples.n,
        "master_seed": samples.master_seed,
    }
    if samples.y0 is not None:
        result["y0"] = samples.y0
    result["summary"] = None if summary is None else summary.to_dict()
    result["wall_time_seconds"] = wall
    _emit(json.dumps(result, indent=2) + "\n", args.out)

    if args.hist is not None and summary is not None:
        lines = ["bin_low,bin_high,count"] + [f"{lo!r},{hi!r},{c}" for lo, hi, c in summary.histogram]
        args.hist.write_text("\n".join(lines) + "\n", encoding="utf-8")
    if args.samples is not None:
        args.samples.write_text("".join(f"{v:.17g}\n" for v in samples.values), encoding="utf-8")
    return EXIT_OK


def read_samples(path: Path) -> np.ndarray:
    """Newline-delimited decimal values; blank lines are ignored."""
    text = path.read_text(encoding="utf-8")
    values = np.array([float(line) for line in text.split() if line], dtype=np.float64)
    if values.size == 0:
        raise ValueError(f"{path}: no samples")
    return values


def cmd_compare(args: argparse.Namespace) -> int:
    try:
        a = read_samples(args.a)
        b = read_samples(args.b)
        report = compare_samples(a, b, alpha=args.alpha)
    except (OSError, ValueError) as exc:
        print(f"mcve: cannot compare: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(json.dumps(report.to_dict(), indent=2) + "\n")
    return EXIT_OK if report.pass_ else EXIT_DIFFERENT


def cmd_scenarios(args: argparse.Namespace) -> int:
    if args.action == "list":
        for sid, factory in BUILTINS.items():
            sys.stdout.write(f"{sid}\t{factory().description}\n")
        return EXIT_OK
    if args.id not in BUILTINS:
        print(f"mcve: unknown scenario {args.id!r}; try 'mcve scenarios list'", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(json.dumps(serialize(BUILTINS[args.id]()), indent=2) + "\n")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handler = {"run": cmd_run, "compare": cmd_compare, "scenarios": cmd_scenarios}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
