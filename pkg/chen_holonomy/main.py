from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from dynaconf import Dynaconf

from chen_holonomy.cli.codec import load_scenario
from chen_holonomy.cli.model import Mode, Profile, Scenario, ScenarioSchemaError, Suite
from chen_holonomy.cli.runner import SuiteRunner
from chen_holonomy.cli.scenario import generate_scenario, nilpotent_example
from chen_holonomy.config import settings as dynaconf_settings
from chen_holonomy.locsys.model import GeneratorExhaustedError

_LOGLEVEL = os.environ.get("LOGLEVEL", "INFO").upper()
_HANDLER = logging.StreamHandler(stream=sys.stderr)
_HANDLER.setLevel(_LOGLEVEL)
_FORMATTER = logging.Formatter("%(asctime)s - %(levelname)s - %(name)s - %(message)s")
_HANDLER.setFormatter(_FORMATTER)
logging.basicConfig(level=_LOGLEVEL, handlers=[_HANDLER])
LOGGER = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INPUT_ERROR = 2

NILPOTENT_EXAMPLE = "nilpotent-example"


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):
        raise ValueError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="verify", description="exact checks of transport, holonomy and naturality identities"
    )
    parser.add_argument("--suite", required=True, help="suite name, or `all`")
    parser.add_argument(
        "--scenario",
        help=f"scenario JSON file, or `{NILPOTENT_EXAMPLE}` for the built-in example",
    )
    parser.add_argument("--seed", type=int, help="generate a scenario from this seed")
    parser.add_argument("--profile", default="", help="m=..,n=..,nu=..,deg=..")
    parser.add_argument("--max-order", type=int, dest="max_order")
    parser.add_argument("--mode", choices=[str(mode) for mode in Mode])
    parser.add_argument("--tolerance", type=float)
    parser.add_argument("--report", type=Path, help="JSON report path")
    return parser


def resolve_scenario(args: argparse.Namespace, settings: Dynaconf) -> Scenario:
    if args.scenario is not None and args.seed is not None:
        raise ValueError("give either --scenario or --seed, not both")
    if args.scenario == NILPOTENT_EXAMPLE:
        return nilpotent_example()
    if args.scenario is not None:
        return load_scenario(Path(args.scenario))
    if args.seed is not None:
        retries = settings.get("generator_retries", 20)
        return generate_scenario(args.seed, Profile.parse(args.profile), retries)
    raise ValueError("one of --scenario or --seed is required")


def verify(argv: Optional[Sequence[str]], settings: Dynaconf) -> int:
    try:
        args = build_parser().parse_args(argv)
        suite = Suite.from_str(args.suite)
        mode = Mode.from_str(args.mode) if args.mode else None
        scenario = resolve_scenario(args, settings)
    except (ScenarioSchemaError, ValueError, GeneratorExhaustedError) as e:
        LOGGER.error("invalid input: %s", e)
        return EXIT_INPUT_ERROR

    runner = SuiteRunner(settings, mode, args.tolerance, args.max_order)
    report = runner.run_suite(suite, scenario)
    print(report.to_text())
    runner.write_report(report, args.report)
    if not report.passed:
        LOGGER.info("suite %s failed on %s", suite, scenario.name)
        return EXIT_FAIL
    return EXIT_PASS


def run():
    sys.exit(verify(sys.argv[1:], dynaconf_settings))


if __name__ == "__main__":
    run()
