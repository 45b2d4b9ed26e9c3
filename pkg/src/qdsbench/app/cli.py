"""Command-line entry point: ``qdsbench bounds|solve|optimize|simulate|verify``."""

import argparse
import json
import logging
import sys
from typing import Any, Callable, Dict, List, Optional

from pydantic import ValidationError

from qdsbench.app.core.analysis import bound_report, min_length, optimize_thresholds
from qdsbench.app.core.checks import CHECKS, run_checks
from qdsbench.app.core.models import Protocol, Role
from qdsbench.app.core.params import AdversaryConfig, ProtocolParams, Scenario
from qdsbench.app.core.simulation import run_trials
from qdsbench.app.infra.config import ConfigError, load_config
from qdsbench.app.infra.reports import ReportError, SimulationReport, emit_report

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _flag(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {value!r}")


# Keys accepted in a config file, with the converter for their raw value
OPTION_TYPES: Dict[str, Callable[[str], Any]] = {
    "protocol": str,
    "adversary": str,
    "length": int,
    "sa": float,
    "sv": float,
    "r": float,
    "epsilon": float,
    "trials": int,
    "seed": int,
    "target-fraction": float,
    "realistic": _flag,
    "workers": int,
    "level": float,
    "format": str,
    "out": str,
    "check": str,
    "log-level": str,
}

DEFAULTS: Dict[str, Any] = {
    "adversary": "honest",
    "r": 0.0,
    "trials": 1000,
    "seed": 0,
    "realistic": False,
    "workers": 1,
    "level": 0.99,
    "format": "json",
    "log-level": "WARNING",
}

REQUIRED: Dict[str, List[str]] = {
    "bounds": ["protocol", "length", "sv"],
    "solve": ["protocol", "epsilon", "sv"],
    "optimize": ["protocol", "length"],
    "simulate": ["protocol", "length", "sv"],
    "verify": ["check"],
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdsbench",
        description="Simulate quantum digital signature protocols and evaluate their bounds.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="file of 'key = value' defaults; flags override it")
    common.add_argument(
        "--log-level", dest="log_level", choices=["DEBUG", "INFO", "WARNING", "ERROR"]
    )

    commands = parser.add_subparsers(dest="command", required=True)

    bounds = commands.add_parser("bounds", parents=[common], help="closed-form security bounds")
    _protocol(bounds, ["p1", "p2"])
    _thresholds(bounds)
    _output(bounds)

    solve = commands.add_parser("solve", parents=[common], help="smallest L reaching epsilon")
    _protocol(solve, ["p1", "p2"])
    solve.add_argument("--epsilon", type=float)
    solve.add_argument("--sa", type=float)
    solve.add_argument("--sv", type=float)
    solve.add_argument("--r", type=float)

    optimize = commands.add_parser(
        "optimize", parents=[common], help="thresholds equalising the bounds"
    )
    _protocol(optimize, ["p1", "p2"])
    optimize.add_argument("--length", type=int)
    optimize.add_argument("--r", type=float)
    optimize.add_argument("--sa", type=float, help="fix s_a; omit to leave it free")

    simulate = commands.add_parser("simulate", parents=[common], help="Monte Carlo protocol runs")
    _protocol(simulate, ["p1", "p1prime", "p2"])
    simulate.add_argument("--adversary", choices=[role.value for role in Role])
    _thresholds(simulate)
    simulate.add_argument("--trials", type=int)
    simulate.add_argument("--seed", type=int)
    simulate.add_argument("--target-fraction", dest="target_fraction", type=float)
    simulate.add_argument(
        "--realistic", action="store_const", const=True,
        help="forger does not know which elements Charlie kept",
    )
    simulate.add_argument("--workers", type=int, help="worker processes for the trials")
    simulate.add_argument("--level", type=float, help="confidence level of the interval")
    _output(simulate)

    verify = commands.add_parser("verify", parents=[common], help="analytic measurement checks")
    verify.add_argument("--check", choices=[*CHECKS, "all"])
    return parser


def _protocol(parser: argparse.ArgumentParser, choices: List[str]) -> None:
    parser.add_argument("--protocol", choices=choices)


def _thresholds(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--length", type=int)
    parser.add_argument("--sa", type=float)
    parser.add_argument("--sv", type=float)
    parser.add_argument("--r", type=float)


def _output(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=["json", "csv"])
    parser.add_argument("--out", help="output path; standard output when omitted")


def resolve_options(args: argparse.Namespace) -> Dict[str, Any]:
    """Merge flags over config-file values over defaults, keyed by long flag name."""
    settings: Dict[str, Any] = dict(DEFAULTS)
    if args.config:
        for key, raw in load_config(args.config, OPTION_TYPES).items():
            try:
                settings[key] = OPTION_TYPES[key](raw)
            except ValueError as e:
                raise ConfigError(f"{args.config}: bad value for {key!r}: {e}") from e
    for key in OPTION_TYPES:
        value = getattr(args, key.replace("-", "_"), None)
        if value is not None:
            settings[key] = value
    missing = [key for key in REQUIRED[args.command] if settings.get(key) is None]
    if missing:
        raise ConfigError(f"missing required option(s): {', '.join('--' + m for m in missing)}")
    return settings


def _params(options: Dict[str, Any]) -> ProtocolParams:
    s_a = options.get("sa")
    return ProtocolParams(
        length=options["length"], s_a=0.0 if s_a is None else s_a, s_v=options["sv"], r=options["r"]
    )


def cmd_bounds(options: Dict[str, Any]) -> int:
    report = bound_report(Protocol(options["protocol"]), _params(options))
    emit_report(report, options["format"], options.get("out"))
    return EXIT_OK


def cmd_solve(options: Dict[str, Any]) -> int:
    length = min_length(
        Protocol(options["protocol"]),
        options["epsilon"],
        options.get("sa") or 0.0,
        options["sv"],
        options["r"],
    )
    print(length)
    return EXIT_OK


def cmd_optimize(options: Dict[str, Any]) -> int:
    choice = optimize_thresholds(
        Protocol(options["protocol"]), options["length"], options["r"], options.get("sa")
    )
    print(json.dumps(choice._asdict(), indent=2))
    return EXIT_OK


def cmd_simulate(options: Dict[str, Any]) -> int:
    scenario = Scenario(
        protocol=Protocol(options["protocol"]),
        params=_params(options),
        adversary=AdversaryConfig(
            role=Role(options["adversary"]),
            target_fraction=options.get("target-fraction"),
            knows_kept_set=not options["realistic"],
        ),
        trials=options["trials"],
        master_seed=options["seed"],
    )
    stats = run_trials(scenario, workers=options["workers"], level=options["level"])
    emit_report(SimulationReport(scenario, stats), options["format"], options.get("out"))
    return EXIT_OK


def cmd_verify(options: Dict[str, Any]) -> int:
    reports = run_checks([options["check"]])
    for report in reports:
        status = "pass" if report.passed else "FAIL"
        print(f"{report.name}: {status} value={report.value:.12g} ({report.detail})")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED


COMMANDS: Dict[str, Callable[[Dict[str, Any]], int]] = {
    "bounds": cmd_bounds,
    "solve": cmd_solve,
    "optimize": cmd_optimize,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        options = resolve_options(args)
        logging.basicConfig(
            level=str(options["log-level"]).upper(),
            stream=sys.stderr,
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        )
        logger.debug("%s options: %s", args.command, options)
        return COMMANDS[args.command](options)
    except (ValidationError, ConfigError) as e:
        print(f"qdsbench: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ReportError as e:
        print(f"qdsbench: error: {e}", file=sys.stderr)
        return EXIT_FAILED
    except ValueError as e:
        print(f"qdsbench: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
