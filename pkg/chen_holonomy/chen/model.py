from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Union

from chen_holonomy.exactnum.poly import MultiPoly
from chen_holonomy.forms.model import HomForm, T


class FlagViolationError(Exception):
    """Raised when a flag is offered for a form whose coefficients are not strictly lowering"""

    pass


class TruncatedSeriesError(Exception):
    """Raised when an exact identity is asked of a series that was only summed up to a cutoff"""

    pass


class NumericalOverflowError(Exception):
    """Raised when the transport ODE produces non-finite values"""

    pass


class TerminationKind(Enum):
    FINITE = 0
    TRUNCATED = 1

    @classmethod
    def of_str(cls, value: str):
        return {member.name: member for member in cls}[value.upper()]


@dataclass(frozen=True)
class Termination:
    """
    FINITE at n: term n is exactly zero, so every later term is too.
    TRUNCATED at n: terms past n were dropped.
    """

    kind: TerminationKind
    order: int

    @classmethod
    def finite_at(cls, order: int) -> Termination:
        return cls(TerminationKind.FINITE, order)

    @classmethod
    def truncated_at(cls, order: int) -> Termination:
        return cls(TerminationKind.TRUNCATED, order)

    def __str__(self) -> str:
        label = "finite_at" if self.kind == TerminationKind.FINITE else "truncated_at"
        return f"{label} {self.order}"


@dataclass(frozen=True)
class EpsilonSign:
    n: int

    @property
    def value(self) -> int:
        return self.n * (self.n - 1) // 2

    def sign(self, degree: int) -> int:
        return -1 if (self.value * degree) % 2 else 1


def epsilon(n: int) -> int:
    return EpsilonSign(n).value


@dataclass(frozen=True)
class ChenSeries:
    omega: HomForm
    terms: tuple[HomForm, ...]
    termination: Termination

    @property
    def is_exact(self) -> bool:
        return self.termination.kind == TerminationKind.FINITE

    def require_exact(self) -> ChenSeries:
        if not self.is_exact:
            raise TruncatedSeriesError(f"series is {self.termination}, refusing an exact check")
        return self

    def total(self) -> HomForm:
        result = self.terms[0]
        for term in self.terms[1:]:
            result = result + term
        return result

    def at(self, s: Union[MultiPoly, Fraction, int]) -> HomForm:
        """the summed transport with the parameter t set to s"""
        return self.total().subst(T, s)
