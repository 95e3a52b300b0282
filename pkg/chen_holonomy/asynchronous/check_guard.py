import asyncio
import logging
import time
from typing import Callable

from chen_holonomy.cli.model import CheckResult
from chen_holonomy.locsys.model import ResidualReport

LOGGER = logging.getLogger(__name__)

Check = Callable[[], ResidualReport]


class CheckGuard:
    """runs blocking checks off the event loop; a check that raises becomes a failed result"""

    def __init__(self):
        self._raised = 0

    @property
    def raised(self) -> int:
        return self._raised

    async def guard(self, name: str, check: Check) -> CheckResult:
        started = time.perf_counter()
        try:
            report = await asyncio.to_thread(check)
            return CheckResult(name, report, elapsed=time.perf_counter() - started)
        except Exception as e:
            LOGGER.error("check %s raised: %s. recording it as failed.", name, e, exc_info=True)
            self._raised += 1
            return CheckResult(
                name, error=f"{type(e).__name__}: {e}", elapsed=time.perf_counter() - started
            )

    async def run_all(
        self, checks: list[tuple[str, Check]], parallel: bool = True
    ) -> list[CheckResult]:
        if not parallel:
            return [await self.guard(name, check) for name, check in checks]
        async with asyncio.TaskGroup() as task_group:
            tasks = [task_group.create_task(self.guard(name, check)) for name, check in checks]
        return [task.result() for task in tasks]
