from __future__ import annotations

from dataclasses import dataclass
from enum import StrEnum
from fractions import Fraction
from typing import Iterable, Optional, Union

from chen_holonomy.forms.model import HomForm, InhomogeneousFormError
from chen_holonomy.graded.model import Flag, FlagMismatchError, GradedSpace


class NonFlatError(Exception):
    """Raised when an operation needs a flat superconnection and it is not flat"""

    pass


class GaugeRelationError(Exception):
    """Raised when two trivializations are not related by the claimed gauge transformation"""

    pass


class GeneratorExhaustedError(Exception):
    """Raised when the seeded generator keeps drawing data that fails its own checks"""

    pass


class Regime(StrEnum):
    EXACT = "exact"
    FLOAT = "float"

    @classmethod
    def from_str(cls, value: str) -> Regime:
        return {member.value: member for member in cls}[value.lower()]


@dataclass(frozen=True)
class ResidualReport:
    """
    outcome of checking one identity. exact reports carry the largest rational
    coefficient of the residual; float reports carry an error and a tolerance.
    """

    identity: str
    anchor: str
    exact: bool
    max_abs: Union[Fraction, float]
    witness: Optional[str] = None
    regime: Regime = Regime.EXACT
    tolerance: Optional[float] = None

    @classmethod
    def from_form(cls, identity: str, anchor: str, residual: HomForm) -> ResidualReport:
        return cls.from_forms(identity, anchor, [residual])

    @classmethod
    def from_forms(
        cls, identity: str, anchor: str, residuals: Iterable[HomForm]
    ) -> ResidualReport:
        max_abs, witness = Fraction(0), None
        for residual in residuals:
            if residual.is_zero():
                continue
            size = residual.max_abs_coefficient()
            if witness is None or size > max_abs:
                max_abs, witness = size, residual.first_term()
        return cls(identity, anchor, witness is None, max_abs, witness)

    @classmethod
    def from_float(
        cls,
        identity: str,
        anchor: str,
        error: float,
        tolerance: float,
        witness: Optional[str] = None,
    ) -> ResidualReport:
        return cls(
            identity, anchor, False, float(error), witness, Regime.FLOAT, float(tolerance)
        )

    @property
    def passed(self) -> bool:
        if self.regime == Regime.EXACT:
            return self.exact
        return self.tolerance is not None and self.max_abs <= self.tolerance

    def magnitude(self) -> str:
        if self.regime == Regime.EXACT:
            return "0 exact" if self.exact else str(self.max_abs)
        return f"{float(self.max_abs):.3e}"

    def to_json(self) -> dict:
        data = {
            "identity": self.identity,
            "anchor": self.anchor,
            "regime": str(self.regime),
            "exact": self.exact,
            "residual": self.magnitude(),
            "passed": self.passed,
        }
        if self.tolerance is not None:
            data["tolerance"] = self.tolerance
        if self.witness is not None:
            data["witness"] = self.witness
        return data


def combine_reports(
    identity: str, anchor: str, reports: Iterable[ResidualReport]
) -> ResidualReport:
    """a single exact report that passes only if every part does"""
    max_abs, witness, exact = Fraction(0), None, True
    for report in reports:
        if not report.exact:
            exact = False
            if witness is None or report.max_abs > max_abs:
                max_abs, witness = report.max_abs, f"{report.identity}: {report.witness}"
    return ResidualReport(identity, anchor, exact, max_abs, witness)


@dataclass(frozen=True)
class Superconnection:
    """
    a trivialized superconnection D = d - alpha on the trivial bundle with fiber
    `space`; alpha has total degree 1
    """

    space: GradedSpace
    alpha: HomForm
    flag: Optional[Flag] = None

    def __post_init__(self):
        if self.alpha.source != self.space or self.alpha.target != self.space:
            raise ValueError("alpha must be an endomorphism of the fiber")
        degree = self.alpha.total_degree()
        if degree not in (None, 1):
            raise InhomogeneousFormError(f"alpha has total degree {degree}, not 1")
        if self.flag is not None and self.flag.space != self.space:
            raise FlagMismatchError("flag lives on another space")

    @classmethod
    def trivial(
        cls, space: GradedSpace, m: int, cylinder: bool = True, flag: Optional[Flag] = None
    ) -> Superconnection:
        return cls(space, HomForm.zero(m, space, space, cylinder), flag)

    @property
    def m(self) -> int:
        return self.alpha.m

    @property
    def cylinder(self) -> bool:
        return self.alpha.cylinder

    def components(self) -> dict[int, HomForm]:
        """alpha_k by form degree k"""
        return self.alpha.partial_degree_components()

    def with_alpha(self, alpha: HomForm) -> Superconnection:
        return Superconnection(self.space, alpha, self.flag)
