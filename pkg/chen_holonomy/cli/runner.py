from __future__ import annotations

import asyncio
import json
import logging
from pathlib import Path
from typing import Optional

from dynaconf import Dynaconf

from chen_holonomy.asynchronous.check_guard import CheckGuard
from chen_holonomy.cli.checks import CheckOptions, build_checks
from chen_holonomy.cli.model import Mode, Scenario, Suite, SuiteReport

LOGGER = logging.getLogger(__name__)


class SuiteRunner:
    def __init__(
        self,
        settings: Dynaconf,
        mode: Optional[Mode] = None,
        tolerance: Optional[float] = None,
        max_order: Optional[int] = None,
    ):
        self.settings = settings
        self.options = CheckOptions(
            mode=mode or Mode.from_str(settings.get("mode", "exact")),
            tolerance=tolerance if tolerance is not None else settings.get("ode_tolerance", 1e-6),
            step=settings.get("ode_step", 1e-3),
            sample_points=settings.get("ode_sample_points", 5),
            max_order=max_order if max_order is not None else settings.get("max_order", 12),
        )
        self.parallel = settings.get("parallel_checks", True)
        self.timings = settings.get("report_timings", False)

    def checks(self, suite: Suite, scenario: Scenario):
        return build_checks(suite, scenario, self.options)

    async def run_suite_async(self, suite: Suite, scenario: Scenario) -> SuiteReport:
        checks = self.checks(suite, scenario)
        LOGGER.info("running %s checks of suite %s on %s", len(checks), suite, scenario.name)
        guard = CheckGuard()
        results = await guard.run_all(checks, parallel=self.parallel)
        if guard.raised:
            LOGGER.warning("%s checks raised instead of reporting", guard.raised)
        return SuiteReport(
            str(suite),
            scenario.name,
            self.options.mode,
            tuple(sorted(results, key=lambda result: result.name)),
        )

    def run_suite(self, suite: Suite, scenario: Scenario) -> SuiteReport:
        return asyncio.run(self.run_suite_async(suite, scenario))

    def report_path(self, report: SuiteReport, explicit: Optional[Path] = None) -> Path:
        if explicit is not None:
            return Path(explicit)
        return Path(self.settings.get("report_dir", "reports")) / (
            f"{report.suite}-{report.scenario}.json"
        )

    def write_report(self, report: SuiteReport, explicit: Optional[Path] = None) -> Path:
        path = self.report_path(report, explicit)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(report.to_json(self.timings), indent=2, sort_keys=True))
        LOGGER.info("wrote report to %s", path)
        return path
