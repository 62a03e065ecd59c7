"""Command line interface: ``h3wave <command> [options]``."""

from __future__ import annotations

import argparse
import logging
import pathlib
import sys
import typing as t

from . import config, runner, selftest, types

logger = logging.getLogger(__name__)


EXIT_SUCCESS = 0
EXIT_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_ABORT = 3

COMMANDS = (
    "evolve",
    "truncate",
    "sweep",
    "morawetz",
    "strichartz",
    "scatter",
    "threshold",
    "selftest",
)


def build_parser() -> argparse.ArgumentParser:
    """Create the argument parser."""
    parser = argparse.ArgumentParser(
        prog="h3wave",
        description="Radial cubic wave equation on hyperbolic 3-space: solver and checks.",
    )
    parser.add_argument("command", choices=COMMANDS, help="Experiment to run")
    parser.add_argument("--config", type=pathlib.Path, default=None, help="Config file")
    parser.add_argument("--out", type=pathlib.Path, default=None, help="Output directory")
    parser.add_argument("--workers", type=int, default=None, help="Worker processes for sweeps")
    parser.add_argument("--seed", type=int, default=None, help="Data seed; overrides the config")
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        help="Logging level",
    )
    parser.add_argument(
        "--warn-unknown-settings",
        action="store_true",
        help="Log a warning for unknown settings in the config file",
    )
    return parser


def load_config(args: argparse.Namespace) -> config.RunConfig:
    """Load the config file, if any, and apply the command line overrides.

    :raises FileNotFoundError: If the config file does not exist
    :raises ValueError: If a setting is invalid
    """
    base = (
        config.load_config_file(args.config, warn_unknown_settings=args.warn_unknown_settings)
        if args.config is not None
        else config.RunConfig()
    )
    overrides = config.ConfigOverrides(seed=args.seed, out_dir=args.out)
    return config.merge_configs(base, overrides)


def dispatch(command: str, experiment: runner.ExperimentRunner) -> None:
    """Run one experiment command."""
    actions: dict[str, t.Callable[[], object]] = {
        "evolve": experiment.run_evolution,
        "truncate": experiment.truncate,
        "sweep": experiment.sweep_s0,
        "morawetz": experiment.run_morawetz,
        "strichartz": experiment.strichartz_suite,
        "scatter": experiment.scatter,
        "threshold": experiment.threshold,
    }
    actions[command]()


def main(argv: t.Sequence[str] | None = None) -> int:
    """Run the command line interface.

    :param argv: Arguments; defaults to ``sys.argv[1:]``
    :return: Exit code
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(levelname)s:%(name)s: %(message)s")

    if args.command == "selftest":
        return selftest.print_result(selftest.run_selftest())

    try:
        run_config = load_config(args)
    except (FileNotFoundError, ValueError, ModuleNotFoundError) as exc:
        # pydantic.ValidationError is a ValueError
        print(f"Config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    experiment = runner.ExperimentRunner(run_config, workers=args.workers)
    try:
        dispatch(args.command, experiment)
    except types.NumericalAbortError as exc:
        print(f"Numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL_ABORT
    except ValueError as exc:
        print(f"Config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    return experiment.print_result()


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
