"""Command-line entry point."""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from rhlab import __version__
from rhlab.config import get_settings
from rhlab.exceptions import ConfigError, RicciHessianError
from rhlab.schemas.report import RunReport
from rhlab.schemas.scenario import OdeInstance, Scenario
from rhlab.services import catalog, checks, emit, instances, odelab, runner

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1


def _tolerance(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    try:
        number = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{value!r} is not a number") from None
    if not number > 0.0:
        raise argparse.ArgumentTypeError(f"tolerance for {name!r} must be positive")
    return name, number


def build_parser() -> argparse.ArgumentParser:
    """Return the ``rhlab`` argument parser."""
    parser = argparse.ArgumentParser(
        prog="rhlab",
        description="Verify the Ricci-Hessian equation and its consequences.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "--log-level", default=None, help="override RHLAB_LOG_LEVEL for this run"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run a scenario file")
    run.add_argument("scenario", type=Path)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--samples", type=int, default=None)
    run.add_argument(
        "--tol",
        type=_tolerance,
        action="append",
        default=[],
        metavar="NAME=VALUE",
        help="tolerance override keyed by check or check.value",
    )
    run.add_argument(
        "--out",
        type=Path,
        action="append",
        default=[],
        help="report path; format follows the suffix (.json, .csv, .md)",
    )

    listing = commands.add_parser("list-catalog", help="list catalog entries")
    listing.add_argument("--tag", default=None)

    commands.add_parser("list-checks", help="list check names")

    profile = commands.add_parser(
        "export-profiles", help="write ODE profiles of a scenario as CSV"
    )
    profile.add_argument("scenario", type=Path)
    profile.add_argument("--dir", type=Path, default=Path("."))
    return parser


def _configure_logging(level: str | None) -> None:
    name = (level or get_settings().log_level).upper()
    logging.basicConfig(
        level=getattr(logging, name, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
        stream=sys.stderr,
    )


def _outputs(scenario: Scenario, extra: Sequence[Path]) -> list[tuple[str, Path]]:
    outputs = [(spec.format, Path(spec.path)) for spec in scenario.outputs]
    outputs += [(emit.format_for(path), path) for path in extra]
    return outputs


def _summary(report: RunReport) -> str:
    matched = sum(check.matched for check in report.checks)
    return (
        f"{report.scenario.get('name')}: {report.verdict} "
        f"({matched}/{len(report.checks)} checks as expected, "
        f"{report.meta.timing.wall_time:.2f}s)"
    )


def _run(args: argparse.Namespace) -> int:
    scenario = runner.load_scenario(args.scenario)
    outputs = _outputs(scenario, args.out)
    scenario = runner.apply_overrides(
        scenario, seed=args.seed, samples=args.samples, tolerances=dict(args.tol)
    )
    report = runner.run_scenario(scenario)
    for fmt, path in outputs:
        emit.write_report(report, fmt, path)
    for check in report.checks:
        if not check.matched:
            print(
                f"  {check.key}: {check.verdict}, expected {check.expected}"
                + (f" ({check.error})" if check.error else ""),
                file=sys.stderr,
            )
    print(_summary(report))
    return EXIT_PASS if report.verdict == "pass" else EXIT_FAIL


def _list_catalog(args: argparse.Namespace) -> int:
    for entry in catalog.list_catalog(args.tag):
        tags = ",".join(entry.tags)
        print(f"{entry.name}\t{entry.space}\t{entry.solution}\t{tags}")
    return EXIT_PASS


def _list_checks(args: argparse.Namespace) -> int:
    for check in checks.list_checks():
        kinds = ",".join(sorted(check.kinds))
        print(f"{check.name}\t{kinds}\t{check.description}")
    return EXIT_PASS


def _export_profiles(args: argparse.Namespace) -> int:
    scenario = runner.load_scenario(args.scenario)
    written = 0
    for index, spec in enumerate(scenario.instances):
        if not isinstance(spec, OdeInstance):
            continue
        built = instances.build_instance(spec, index)
        if built.profile is None:
            continue
        target = emit.resolve_path(args.dir / f"{built.label}.csv")
        odelab.write_profile_csv(built.profile, target)
        print(target)
        written += 1
    if not written:
        raise ConfigError("scenario has no ode instances", field="instances")
    return EXIT_PASS


_COMMANDS = {
    "run": _run,
    "list-catalog": _list_catalog,
    "list-checks": _list_checks,
    "export-profiles": _export_profiles,
}


def main(argv: Sequence[str] | None = None) -> int:
    """Run the CLI and return its exit code.

    Exit codes are 0 when every check matched its expectation, 1 when one
    did not, 2 for configuration errors and 3 for runtime failures.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else ConfigError.exit_code
    _configure_logging(args.log_level)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        where = "".join(
            part
            for part in (
                f" field={exc.field}" if exc.field else "",
                f" line={exc.line}" if exc.line else "",
            )
        )
        print(f"config error:{where} {exc}", file=sys.stderr)
        return exc.exit_code
    except RicciHessianError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
