from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

from chen_holonomy.forms.calculus import wedge
from chen_holonomy.forms.model import HomForm, InhomogeneousFormError
from chen_holonomy.graded.model import GradedSpace
from chen_holonomy.locsys.model import Superconnection

LOGGER = logging.getLogger(__name__)


class ChainCompositionError(Exception):
    """
    Raised when the entries of a tensor chain do not compose through its systems
    """

    pass


class ContextMismatchError(Exception):
    """
    Raised when two transformations or two chains do not share the contexts they
    are combined over
    """

    pass


def koszul_sign(exponent: int) -> int:
    return -1 if exponent % 2 else 1


@dataclass(frozen=True)
class TensorChain:
    """
    xi_(n-1) (x) ... (x) xi_0 with xi_i: V_i -> V_(i+1), stored bottom first:
    xis[i] is xi_i and systems[i] is the system on V_i. degrees[i] is |xi_i|, which
    must be declared for zero entries.
    """

    systems: tuple[Superconnection, ...]
    xis: tuple[HomForm, ...] = ()
    degrees: Optional[tuple[int, ...]] = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "systems", tuple(self.systems))
        object.__setattr__(self, "xis", tuple(self.xis))
        if len(self.systems) != len(self.xis) + 1:
            raise ChainCompositionError(
                f"{len(self.xis)} entries need {len(self.xis) + 1} systems, got {len(self.systems)}"
            )
        domains = {(s.m, s.cylinder) for s in self.systems}
        domains |= {(xi.m, xi.cylinder) for xi in self.xis}
        if len(domains) != 1:
            raise ContextMismatchError(f"chain mixes forms on different domains: {domains}")
        for i, xi in enumerate(self.xis):
            if xi.source != self.systems[i].space or xi.target != self.systems[i + 1].space:
                raise ChainCompositionError(f"entry {i} does not map V_{i} to V_{i + 1}")

        declared = None if self.degrees is None else tuple(self.degrees)
        if declared is not None and len(declared) != len(self.xis):
            raise ChainCompositionError(f"{len(declared)} degrees for {len(self.xis)} entries")
        degrees = []
        for i, xi in enumerate(self.xis):
            actual = xi.total_degree()
            if actual is None:
                if declared is None:
                    raise InhomogeneousFormError(f"entry {i} is zero, declare its degree")
                degrees.append(declared[i])
            elif declared is not None and declared[i] != actual:
                raise InhomogeneousFormError(
                    f"entry {i} has total degree {actual}, declared {declared[i]}"
                )
            else:
                degrees.append(actual)
        object.__setattr__(self, "degrees", tuple(degrees))

    @classmethod
    def empty(cls, system: Superconnection) -> TensorChain:
        return cls((system,), ())

    @property
    def n(self) -> int:
        return len(self.xis)

    @property
    def m(self) -> int:
        return self.systems[0].m

    @property
    def cylinder(self) -> bool:
        return self.systems[0].cylinder

    @property
    def source(self) -> GradedSpace:
        return self.systems[0].space

    @property
    def target(self) -> GradedSpace:
        return self.systems[-1].space

    @property
    def total_degree(self) -> int:
        return sum(self.degrees)

    def is_zero(self) -> bool:
        return any(xi.is_zero() for xi in self.xis)

    def sub(self, lo: int, hi: int) -> TensorChain:
        """xi_(hi-1) (x) ... (x) xi_lo between the systems lo..hi"""
        if not 0 <= lo <= hi <= self.n:
            raise IndexError(f"sub-chain [{lo}, {hi}] of a chain of length {self.n}")
        return TensorChain(self.systems[lo : hi + 1], self.xis[lo:hi], self.degrees[lo:hi])

    def replaced(self, i: int, xi: HomForm, degree: int) -> TensorChain:
        xis = self.xis[:i] + (xi,) + self.xis[i + 1 :]
        degrees = self.degrees[:i] + (degree,) + self.degrees[i + 1 :]
        return TensorChain(self.systems, xis, degrees)

    def merged(self, i: int) -> TensorChain:
        """xi_i ^ xi_(i-1) in place of the pair; the system on V_i drops out"""
        if not 1 <= i < self.n:
            raise IndexError(f"cannot merge at {i} in a chain of length {self.n}")
        product = wedge(self.xis[i], self.xis[i - 1])
        return TensorChain(
            self.systems[:i] + self.systems[i + 1 :],
            self.xis[: i - 1] + (product,) + self.xis[i + 1 :],
            self.degrees[: i - 1]
            + (self.degrees[i] + self.degrees[i - 1],)
            + self.degrees[i + 1 :],
        )

    def map_entries(self, systems: Sequence[Superconnection], fn) -> TensorChain:
        """the chain over new systems with every entry sent through fn"""
        return TensorChain(tuple(systems), tuple(fn(xi) for xi in self.xis), self.degrees)


@dataclass(frozen=True)
class FormalChainSum:
    """a signed sum of chains sharing the outer spaces V_0 and V_n"""

    terms: tuple[tuple[int, TensorChain], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        ends = {(chain.source, chain.target) for _, chain in self.terms}
        if len(ends) > 1:
            raise ContextMismatchError("formal sum of chains with different endpoints")
        if any(sign not in (1, -1) for sign, _ in self.terms):
            raise ValueError("formal chain sums carry signs +-1 only")

    def __iter__(self) -> Iterator[tuple[int, TensorChain]]:
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __add__(self, other: FormalChainSum) -> FormalChainSum:
        return FormalChainSum(self.terms + other.terms)

    def scaled(self, sign: int) -> FormalChainSum:
        return FormalChainSum(tuple((sign * s, chain) for s, chain in self.terms))

    def nonzero(self) -> FormalChainSum:
        return FormalChainSum(tuple((s, c) for s, c in self.terms if not c.is_zero()))
