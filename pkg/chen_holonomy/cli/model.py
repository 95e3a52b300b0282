from __future__ import annotations

from dataclasses import dataclass, field
from enum import StrEnum
from fractions import Fraction
from typing import Optional

from chen_holonomy.ainfty.model import TensorChain
from chen_holonomy.forms.model import HomForm, PolyMap
from chen_holonomy.locsys.model import ResidualReport, Superconnection


class ScenarioSchemaError(Exception):
    """Raised when a scenario document does not describe a valid scenario"""

    pass


class Suite(StrEnum):
    FORMS = "forms"
    CHEN = "chen"
    MC = "mc"
    LEMMA35 = "lemma35"
    PROP34 = "prop34"
    PROP36 = "prop36"
    PROP32ODE = "prop32ode"
    PROP33 = "prop33"
    LEMMA41 = "lemma41"
    LEMMA42 = "lemma42"
    BINFTY = "binfty"
    LAMBDA = "lambda"
    APPENDIXA = "appendixA"
    POINCARE = "poincare"
    COMPOSE = "compose"
    ALL = "all"

    @classmethod
    def from_str(cls, str_literal: str) -> Suite:
        by_value = {member.value.lower(): member for member in cls}
        try:
            return by_value[str_literal.lower()]
        except KeyError:
            raise ValueError(f"unknown suite {str_literal!r}") from None

    def expanded(self) -> list[Suite]:
        if self == Suite.ALL:
            return [suite for suite in Suite if suite != Suite.ALL]
        return [self]


class Mode(StrEnum):
    EXACT = "exact"
    FLOAT = "float"

    @classmethod
    def from_str(cls, str_literal: str) -> Mode:
        return cls[str_literal.upper()]


@dataclass(frozen=True)
class Profile:
    """
    bounds for a generated scenario: chart dimension, chain length, flag layers, degree.

    With nu <= 2 the space has at most one vector of each degree, so there is no room for a
    degree-0 lowering map: every gauge is the identity and every generated alpha is a constant
    0-form. The default of four layers always leaves such room.
    """

    m: int = 1
    n: int = 1
    nu: int = 4
    deg: int = 1

    def __post_init__(self):
        if not 1 <= self.m <= 3:
            raise ValueError(f"chart dimension {self.m} outside 1..3")
        if not 0 <= self.n <= 3:
            raise ValueError(f"chain length {self.n} outside 0..3")
        if not 1 <= self.nu <= 4:
            raise ValueError(f"{self.nu} flag layers outside 1..4")
        if not 0 <= self.deg <= 3:
            raise ValueError(f"polynomial degree {self.deg} outside 0..3")

    @classmethod
    def trivial(cls) -> Profile:
        """one layer and no chain entries, so every generated form vanishes"""
        return cls(m=1, n=0, nu=1, deg=0)

    @classmethod
    def parse(cls, text: str) -> Profile:
        """m=..,n=..,nu=..,deg=.. with any subset of the keys"""
        values: dict[str, int] = {}
        for piece in filter(None, (p.strip() for p in text.split(","))):
            key, sep, value = piece.partition("=")
            if not sep or key.strip() not in ("m", "n", "nu", "deg"):
                raise ValueError(f"malformed profile entry {piece!r}")
            try:
                values[key.strip()] = int(value)
            except ValueError:
                raise ValueError(f"profile entry {piece!r} is not an integer") from None
        return cls(**values)

    def __str__(self) -> str:
        return f"m={self.m},n={self.n},nu={self.nu},deg={self.deg}"


@dataclass(frozen=True)
class ChainSpec:
    """a chain given by indices into a list of systems and its entries"""

    systems: tuple[int, ...]
    xis: tuple[HomForm, ...]
    degrees: tuple[int, ...]

    def resolve(self, systems: list[Superconnection]) -> TensorChain:
        try:
            chosen = tuple(systems[i] for i in self.systems)
        except IndexError:
            raise ScenarioSchemaError(f"chain refers to missing systems {self.systems}") from None
        return TensorChain(chosen, self.xis, self.degrees)


@dataclass(frozen=True)
class GaugeSpec:
    """systems[system] is related to `beta` by alpha = g^-1 beta g - g^-1 dg"""

    system: int
    beta: Superconnection
    g: HomForm


@dataclass(frozen=True)
class Scenario:
    name: str
    m: int
    systems: list[Superconnection] = field(default_factory=list)
    chains: list[ChainSpec] = field(default_factory=list)
    gauges: list[GaugeSpec] = field(default_factory=list)
    base_systems: list[Superconnection] = field(default_factory=list)
    base_chains: list[ChainSpec] = field(default_factory=list)
    homotopies: list[PolyMap] = field(default_factory=list)
    point: Optional[tuple[Fraction, ...]] = None
    seed: Optional[int] = None

    def tensor_chains(self) -> list[TensorChain]:
        return [spec.resolve(self.systems) for spec in self.chains]

    def base_tensor_chains(self) -> list[TensorChain]:
        return [spec.resolve(self.base_systems) for spec in self.base_chains]

    def gauge_for(self, system: int) -> Optional[GaugeSpec]:
        return next((gauge for gauge in self.gauges if gauge.system == system), None)


@dataclass(frozen=True)
class CheckResult:
    name: str
    report: Optional[ResidualReport] = None
    error: Optional[str] = None
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return self.error is None and self.report is not None and self.report.passed

    def to_json(self, timings: bool = False) -> dict:
        data: dict = {"name": self.name, "passed": self.passed}
        if self.report is not None:
            data.update(self.report.to_json())
            data["passed"] = self.passed
        if self.error is not None:
            data["error"] = self.error
        if timings:
            data["elapsed_seconds"] = round(self.elapsed, 6)
        return data


@dataclass(frozen=True)
class SuiteReport:
    suite: str
    scenario: str
    mode: Mode
    results: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results)

    def to_json(self, timings: bool = False) -> dict:
        return {
            "suite": self.suite,
            "scenario": self.scenario,
            "mode": str(self.mode),
            "passed": self.passed,
            "checks": [result.to_json(timings) for result in self.results],
        }

    def to_text(self) -> str:
        lines = [f"suite {self.suite} on {self.scenario} ({self.mode})"]
        for result in self.results:
            status = "PASS" if result.passed else "FAIL"
            if result.error is not None:
                detail = f"error: {result.error}"
            elif result.report is not None:
                detail = f"{result.report.magnitude()}  [{result.report.anchor}]"
            else:
                detail = "no report"
            lines.append(f"  {status}  {result.name}  {detail}")
        verdict = "PASS" if self.passed else "FAIL"
        lines.append(f"{verdict}: {sum(r.passed for r in self.results)}/{len(self.results)} checks")
        return "\n".join(lines)
