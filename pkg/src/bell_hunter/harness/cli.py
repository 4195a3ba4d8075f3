"""``bell-hunter`` command line.

Exit codes: 0 success, 2 invalid configuration, 1 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import EXPERIMENTS, InvalidConfigError, build_config, load_config_file
from .experiments import run_experiment

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", help="comma-separated grid values (lambda, C, or N for mse-curve)")
    p.add_argument("--shots", type=int, help="ensemble size N per correlator")
    p.add_argument("--iters", type=int, help="iterations k_max")
    p.add_argument("--trajectories", type=int, help="trajectories K per state")
    p.add_argument("--states", type=int, help="states M per grid point")
    p.add_argument("--seed", type=int)
    p.add_argument("--gains", help="gain schedule a,A,s,b,r")
    p.add_argument("--out", help="output directory")
    p.add_argument("--workers", type=int, help="worker processes")
    p.add_argument("--config", help="key = value configuration file")


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bell-hunter",
                     description="Adaptive CHSH maximization experiments.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="experiment", required=True, parser_class=_Parser)
    for name in EXPERIMENTS:
        p = sub.add_parser(name.replace("_", "-"), aliases=[name])
        _add_common(p)
        if name == "seesaw_oracle":
            p.add_argument("input", help="JSON density matrix or pure state ([re, im] pairs)")
            p.add_argument("--restarts", type=int)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    experiment = args.experiment.replace("-", "_")
    overrides = {
        "grid": args.grid,
        "n_shots": args.shots,
        "k_max": args.iters,
        "trajectories": args.trajectories,
        "states_per_point": args.states,
        "seed": args.seed,
        "gains": args.gains,
        "output_path": args.out,
        "workers": args.workers,
        "input_path": getattr(args, "input", None),
        "seesaw_restarts": getattr(args, "restarts", None),
    }
    try:
        file_values = load_config_file(args.config) if args.config else {}
        if experiment == "seesaw_oracle" and args.out is None:
            file_values.setdefault("output_path", "-")
        config = build_config(experiment, file_values, overrides)
    except InvalidConfigError as exc:
        print(f"bell-hunter: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        result = run_experiment(config)
    except InvalidConfigError as exc:
        print(f"bell-hunter: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        logging.getLogger(__name__).debug("run failed", exc_info=True)
        print(f"bell-hunter: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    if isinstance(result, dict):
        print(json.dumps(result, indent=2))
    else:
        summary = {
            "experiment": config.experiment,
            "output": config.output_path,
            "points": result.manifest["points"],
        }
        print(json.dumps(summary, indent=2, default=float))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
