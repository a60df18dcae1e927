"""Command-line entry point for the Monte Carlo experiments."""

from __future__ import annotations

import argparse
import json
import sys

from .config import load_scenario
from .harness import DEFAULT_SWEEPS, EXPERIMENT_KINDS, ExperimentSpec, run_experiment, write_csv
from .optimizer import InfeasibleError

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_NUMERICAL = 3

FAILURE_THRESHOLD = 0.5


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simulate",
        description="Run a link-level Monte Carlo experiment and write a CSV of averaged metrics.",
    )
    parser.add_argument("config", help="flat key=value scenario file")
    parser.add_argument("--experiment", required=True, choices=EXPERIMENT_KINDS,
                        help="experiment kind")
    parser.add_argument("--out", required=True, help="output CSV path")
    parser.add_argument("--trials", type=int, default=200, help="Monte Carlo trials per sweep point")
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--sweep", default=None,
                        help="comma-separated sweep values (default depends on the experiment)")
    parser.add_argument("--trace", default=None, help="optional JSON dump of per-trial values")
    return parser


def _parse_sweep(text: str | None, kind: str) -> list:
    if text is None:
        return list(DEFAULT_SWEEPS[kind])
    values = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        values.append(float(tok))
    return values


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = load_scenario(args.config)
        spec = ExperimentSpec(
            kind=args.experiment,
            sweep=_parse_sweep(args.sweep, args.experiment),
            scenario=settings.scenario,
            array_config=settings.array_config,
            trials=args.trials,
            num_pilots=settings.num_pilots,
            master_seed=args.seed,
        )
    except (OSError, ValueError) as exc:
        print(f"simulate: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    try:
        result = run_experiment(spec, collect_traces=args.trace is not None)
    except InfeasibleError as exc:
        print(f"simulate: infeasible scenario: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    write_csv(result.rows, args.out)
    if args.trace is not None:
        with open(args.trace, "w") as fh:
            json.dump({"experiment": spec.kind, "seed": spec.master_seed,
                       "trials": spec.trials, "per_trial": result.traces}, fh, indent=2)
    if result.fully_infeasible:
        print("simulate: no feasible trials at some sweep point", file=sys.stderr)
        return EXIT_INFEASIBLE
    if result.max_failure_fraction > FAILURE_THRESHOLD:
        print("simulate: numerical failure rate above threshold", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
