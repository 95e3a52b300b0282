from __future__ import annotations

import itertools
import logging
from collections import defaultdict
from fractions import Fraction
from typing import Hashable

from chen_holonomy.ainfty.model import FormalChainSum, TensorChain, koszul_sign
from chen_holonomy.forms.calculus import exterior_d, wedge
from chen_holonomy.forms.model import HomForm
from chen_holonomy.locsys.flatness import hom_differential
from chen_holonomy.locsys.model import ResidualReport

LOGGER = logging.getLogger(__name__)

BasisKey = tuple[Hashable, ...]


def slot_sign(chain: TensorChain, i: int) -> int:
    """(-1)^(|xi_(i+1)| + .. + |xi_(n-1)| + n - i - 1)"""
    return koszul_sign(sum(chain.degrees[i + 1 :]) + chain.n - i - 1)


def merge_sign(chain: TensorChain, i: int) -> int:
    """(-1)^(|xi_i| + .. + |xi_(n-1)| + n - i - 1)"""
    return koszul_sign(sum(chain.degrees[i:]) + chain.n - i - 1)


def _merges(chain: TensorChain) -> list[tuple[int, TensorChain]]:
    return [(merge_sign(chain, i), chain.merged(i)) for i in range(1, chain.n)]


def hochschild_b(chain: TensorChain) -> FormalChainSum:
    """
    the four groups of b, slot by slot: d xi_i, then alpha_(i+1) ^ xi_i, then
    xi_i ^ alpha_i, all under the slot sign, followed by the merges xi_i ^ xi_(i-1).
    chains with a vanishing entry are dropped.
    """
    terms: list[tuple[int, TensorChain]] = []
    for i, xi in enumerate(chain.xis):
        sign, degree = slot_sign(chain, i), chain.degrees[i] + 1
        terms.append((sign, chain.replaced(i, exterior_d(xi), degree)))
        outgoing = wedge(chain.systems[i + 1].alpha, xi)
        terms.append((-sign, chain.replaced(i, outgoing, degree)))
        incoming = wedge(xi, chain.systems[i].alpha)
        terms.append((sign * koszul_sign(chain.degrees[i]), chain.replaced(i, incoming, degree)))
    terms.extend(_merges(chain))
    return FormalChainSum(tuple(terms)).nonzero()


def hochschild_b_collected(chain: TensorChain) -> FormalChainSum:
    """b with the first three groups of each slot summed into the twisted differential"""
    terms: list[tuple[int, TensorChain]] = []
    for i, xi in enumerate(chain.xis):
        twisted = hom_differential(xi, chain.systems[i], chain.systems[i + 1])
        terms.append((slot_sign(chain, i), chain.replaced(i, twisted, chain.degrees[i] + 1)))
    terms.extend(_merges(chain))
    return FormalChainSum(tuple(terms)).nonzero()


def apply_b(chains: FormalChainSum) -> FormalChainSum:
    result = FormalChainSum()
    for sign, chain in chains:
        result = result + hochschild_b(chain).scaled(sign)
    return result


def _basis_expansion(xi: HomForm) -> list[tuple[BasisKey, Fraction]]:
    expansion = []
    for monomial, matrix in xi.terms.items():
        for r, c, poly in matrix.entries():
            for exps, coefficient in poly.terms.items():
                powers = tuple(
                    sorted((v, e) for v, e in zip(poly.variables, exps) if e)
                )
                key = (xi.source, xi.target, monomial, r, c, powers)
                expansion.append((key, coefficient))
    return expansion


def expand_chain(chain: TensorChain) -> dict[BasisKey, Fraction]:
    """coordinates of the tensor product in the basis of monomial tensors"""
    coordinates: dict[BasisKey, Fraction] = defaultdict(Fraction)
    factors = [_basis_expansion(xi) for xi in chain.xis]
    for combination in itertools.product(*factors):
        key = tuple(k for k, _ in combination)
        value = Fraction(1)
        for _, coefficient in combination:
            value *= coefficient
        coordinates[key] += value
    return coordinates


def collect(chains: FormalChainSum) -> dict[BasisKey, Fraction]:
    """a formal sum as a vector in the tensor algebra; empty when it cancels"""
    total: dict[BasisKey, Fraction] = defaultdict(Fraction)
    for sign, chain in chains:
        for key, value in expand_chain(chain).items():
            total[key] += sign * value
    return {key: value for key, value in total.items() if value}


def b_square_residual(chain: TensorChain) -> ResidualReport:
    twice = apply_b(hochschild_b(chain))
    leftover = collect(twice)
    LOGGER.debug("b^2 of a chain of length %s: %s formal terms", chain.n, len(twice))
    if not leftover:
        return ResidualReport("b squares to zero", "b(b(xi)) = 0", True, Fraction(0))
    value = max(leftover.values(), key=abs)
    witness = f"{len(leftover)} surviving tensors, largest coefficient {value}"
    return ResidualReport("b squares to zero", "b(b(xi)) = 0", False, abs(value), witness)
