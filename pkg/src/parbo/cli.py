"""Command-line entry point.

Subcommands: ``run`` (execute an experiment config and write its bundle),
``theory`` (run the validation suite and emit a JSON report),
``plot-data`` (re-emit per-arm curve CSVs from a bundle), and
``list-benchmarks``. Exit codes: 0 success, 1 config error, 2 runtime
failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import benchmarks
from .config import ConfigError, loads as config_loads
from .harness import TheoryOptions, emit_plot_data, load_bundle, run_experiment, run_theory_suite

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parbo",
        description="Parallel Thompson-sampling Bayesian optimisation, simulated.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config and write its bundle")
    run.add_argument("--config", required=True, help="path to a JSON config")
    run.add_argument("--seed", type=int, default=None, help="override base_seed")
    run.add_argument("--runs", type=int, default=None, help="override run count")
    run.add_argument("--out", default=None, help="override the output directory")
    run.add_argument(
        "--save-traces", action="store_true", help="also write per-run trace CSVs"
    )

    th = sub.add_parser("theory", help="run the theory-validation suite")
    th.add_argument("--out", default=None, help="directory for theory.json (default: stdout)")
    th.add_argument("--seed", type=int, default=0)
    th.add_argument("--trials", type=int, default=1_000_000,
                    help="Monte Carlo trials for closed-form checks")
    th.add_argument("--renyi-trials", type=int, default=100_000)
    th.add_argument("--coverage-runs", type=int, default=500)
    th.add_argument("--ordering-runs", type=int, default=200)
    th.add_argument("--mc-tolerance", type=float, default=0.01,
                    help="relative tolerance for Monte Carlo vs closed form")

    plot = sub.add_parser("plot-data", help="emit per-arm plotting CSVs from a bundle")
    plot.add_argument("--bundle", required=True, help="bundle directory written by run")
    plot.add_argument("--which", required=True, choices=["count", "time"])
    plot.add_argument("--out", default=None, help="output directory (default: <bundle>/plots)")

    sub.add_parser("list-benchmarks", help="list the benchmark registry")
    return parser


def _cmd_run(args) -> int:
    try:
        cfg = config_loads(Path(args.config).read_text())
    except FileNotFoundError:
        print(f"config file not found: {args.config}", file=sys.stderr)
        return EXIT_CONFIG
    overrides = {}
    if args.seed is not None:
        overrides["base_seed"] = args.seed
    if args.runs is not None:
        overrides["runs"] = args.runs
    if args.out is not None:
        overrides["out_dir"] = args.out
    if args.save_traces:
        overrides["save_traces"] = True
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    if cfg.out_dir is None:
        print("no output directory: set out_dir in the config or pass --out", file=sys.stderr)
        return EXIT_CONFIG
    bundle = run_experiment(cfg, cfg.out_dir)
    print(f"wrote bundle with {len(bundle.results)} arm(s) to {cfg.out_dir}")
    return EXIT_OK


def _cmd_theory(args) -> int:
    options = TheoryOptions(
        trials=args.trials,
        renyi_trials=args.renyi_trials,
        coverage_runs=args.coverage_runs,
        ordering_runs=args.ordering_runs,
        mc_tolerance=args.mc_tolerance,
        seed=args.seed,
    )
    report = run_theory_suite(options)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "theory.json").write_text(text, encoding="utf-8")
        passed = sum(c["pass"] for c in report["checks"])
        print(f"{passed}/{len(report['checks'])} checks passed; report in {out / 'theory.json'}")
    return EXIT_OK


def _cmd_plot_data(args) -> int:
    bundle = load_bundle(args.bundle)
    out = Path(args.out) if args.out is not None else Path(args.bundle) / "plots"
    paths = emit_plot_data(bundle, args.which, out)
    for p in paths:
        print(p)
    return EXIT_OK


def _cmd_list_benchmarks() -> int:
    print(f"{'name':<14} {'dim':>3} {'noise_sd':>9} {'optimum':>20}")
    for name in benchmarks.names():
        b = benchmarks.get(name)
        print(f"{b.name:<14} {b.dim:>3} {b.noise_sd:>9.3g} {b.opt_value:>20.12g}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "theory":
            return _cmd_theory(args)
        if args.command == "plot-data":
            return _cmd_plot_data(args)
        return _cmd_list_benchmarks()
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
