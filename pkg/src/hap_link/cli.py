# cli.py
# Command-line entry point. Argument wiring and exit codes only; the work
# happens in scenario.py and all terminal output in display.py.
#
# Exit codes: 0 success, 1 invalid input (arguments or scenario), 2 runtime
# failure. Result CSV goes to --output or standard output; the optional
# --trajectory file is the only other CSV written.

import argparse
from pathlib import Path

from hap_link import display
from hap_link.models import Scenario
from hap_link.scenario import (
    SWEEP_COLUMN,
    ScenarioError,
    Simulator,
    eirp_check,
    load_scenario_file,
    snr_vs_ground_distance,
    write_csv,
)
from hap_link.tables import load_tables, write_tables

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 2

RUNTIME_ERRORS = (ValueError, LookupError, OSError)


# ---------------------------------------------------------------------------
# Exceptions
# ---------------------------------------------------------------------------


class UsageError(Exception):
    """Raised instead of argparse's own exit when the command line is malformed."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--scenario", type=Path, required=True, help="Scenario JSON file")
    common.add_argument("--output", type=Path, default=None, help="CSV path (default: stdout)")
    common.add_argument("--seed", type=int, default=None, help="Override the scenario seed")
    common.add_argument("--workers", type=int, default=1, help="Threads for mission chunks")

    parser = _Parser(prog="hap-link", description="GEO satellite to HAP link simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="Simulate the mission, one row per update")
    distance = sub.add_parser("snr-distance", parents=[common], help="SNR against ground distance")
    for mission in (run, distance):
        mission.add_argument(
            "--trajectory", type=Path, default=None, help="Also write the timed HAP path as CSV"
        )
    sub.add_parser("validate", parents=[common], help="Check the scenario and exit")

    sweep = sub.add_parser("sweep-freq", parents=[common], help="SNR against carrier frequency")
    sweep.add_argument("--fstart", type=float, default=20.0, help="First frequency, GHz")
    sweep.add_argument("--fstop", type=float, default=100.0, help="Last frequency, GHz")
    sweep.add_argument("--fstep", type=float, default=1.0, help="Frequency step, GHz")

    tables = sub.add_parser("tables", help="Export the effective loss tables as CSV")
    tables.add_argument("--output-dir", type=Path, required=True, help="Destination directory")
    tables.add_argument("--scenario", type=Path, default=None, help="Scenario with tablePaths")
    return parser


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _emit(frame, output: Path | None) -> None:
    write_csv(frame, output)
    if output is not None:
        display.output_written(output, len(frame))


def _run(scenario: Scenario, args: argparse.Namespace) -> None:
    with display.progress("mission") as update:
        simulator = Simulator(scenario, workers=args.workers, on_progress=update)
        trajectory = simulator.timeline()
        display.mission_planned(trajectory.total_duration, len(trajectory))
        frame = simulator.evaluate(trajectory)
    display.mission_summary(frame, simulator.poi_arrivals(frame))
    if args.trajectory is not None:
        trajectory.write_csv(args.trajectory)
        display.output_written(args.trajectory, len(trajectory))
    if args.command == "snr-distance":
        frame = snr_vs_ground_distance(frame)
    _emit(frame, args.output)


def _sweep(scenario: Scenario, args: argparse.Namespace) -> None:
    with display.progress("sweep") as update:
        simulator = Simulator(scenario, workers=args.workers, on_progress=update)
        frame = simulator.sweep_frequency(args.fstart, args.fstop, args.fstep)
    display.sweep_summary(frame, SWEEP_COLUMN)
    _emit(frame, args.output)


def _tables(args: argparse.Namespace) -> int:
    paths = None
    if args.scenario is not None:
        paths = load_scenario_file(args.scenario).table_paths
    display.tables_written(write_tables(load_tables(paths), args.output_dir))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        display.validation_failed(str(exc))
        return EXIT_INVALID

    try:
        if args.command == "tables":
            return _tables(args)

        if args.workers < 1:
            display.validation_failed("--workers must be at least 1")
            return EXIT_INVALID

        display.banner(args.command, args.scenario)
        scenario = load_scenario_file(args.scenario, seed=args.seed)
        display.scenario_loaded(scenario)
        gap = eirp_check(scenario)
        if gap is not None:
            display.eirp_mismatch(gap)
    except ScenarioError as exc:
        display.validation_failed(str(exc))
        return EXIT_INVALID
    except RUNTIME_ERRORS as exc:
        display.halt(str(exc))
        return EXIT_RUNTIME

    if args.command == "validate":
        try:
            Simulator(scenario)
        except RUNTIME_ERRORS as exc:
            display.validation_failed(str(exc))
            return EXIT_INVALID
        display.validation_ok(args.scenario)
        return EXIT_OK

    try:
        if args.command == "sweep-freq":
            _sweep(scenario, args)
        else:
            _run(scenario, args)
    except RUNTIME_ERRORS as exc:
        display.halt(str(exc))
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
