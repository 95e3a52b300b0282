from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from chen_holonomy.chen.gauge import gauge_transform
from chen_holonomy.chen.series import form_is_strictly_flag_lowering
from chen_holonomy.exactnum.matrix import SparseMatrix
from chen_holonomy.exactnum.poly import MultiPoly
from chen_holonomy.forms.model import (
    ONE,
    FormMonomial,
    HomForm,
    T,
    chart_variables,
)
from chen_holonomy.graded.model import Flag, GradedHom, GradedSpace
from chen_holonomy.locsys.flatness import mc_residual
from chen_holonomy.locsys.model import GeneratorExhaustedError, Superconnection

LOGGER = logging.getLogger(__name__)

_NUMERATORS = (-3, -2, -1, 1, 2, 3)
_DENOMINATORS = (1, 1, 1, 2, 3)


@dataclass(frozen=True)
class GeneratedSystem:
    """a flat system together with the gauge data it was built from"""

    system: Superconnection
    g: HomForm
    alpha_c: GradedHom
    seed: int


def random_rational(rng: random.Random) -> Fraction:
    return Fraction(rng.choice(_NUMERATORS), rng.choice(_DENOMINATORS))


def random_poly(
    rng: random.Random,
    variables: Sequence[str],
    max_degree: int,
    max_terms: int = 2,
) -> MultiPoly:
    """a nonzero sparse polynomial of total degree at most max_degree"""
    variables = tuple(variables)
    terms: dict[tuple[int, ...], Fraction] = {}
    for _ in range(rng.randint(1, max_terms)):
        exps = [0] * len(variables)
        for _ in range(rng.randint(0, max_degree) if variables else 0):
            exps[rng.randrange(len(variables))] += 1
        terms[tuple(exps)] = random_rational(rng)
    poly = MultiPoly(variables, terms)
    return poly if poly else MultiPoly.constant(1, variables)


def lowering_positions(
    source: GradedSpace, target: GradedSpace, degree: int, flag: Optional[Flag]
) -> list[tuple[int, int]]:
    rows, cols = target.basis_degrees, source.basis_degrees
    positions = []
    for r, c in itertools.product(range(len(rows)), range(len(cols))):
        if rows[r] != cols[c] + degree:
            continue
        if flag is not None and flag.layer_of[r] >= flag.layer_of[c]:
            continue
        positions.append((r, c))
    return positions


def random_lowering_hom(
    rng: random.Random, flag: Flag, degree: int, density: float = 0.6
) -> GradedHom:
    space = flag.space
    entries = {
        position: random_rational(rng)
        for position in lowering_positions(space, space, degree, flag)
        if rng.random() < density
    }
    shape = (space.total_dim, space.total_dim)
    return GradedHom(space, space, degree, SparseMatrix(shape, entries))


def _square_zero_hom(rng: random.Random, flag: Flag, retries: int) -> GradedHom:
    candidate = None
    for _ in range(retries):
        candidate = random_lowering_hom(rng, flag, 1)
        if (candidate.matrix @ candidate.matrix).is_zero():
            return candidate
    # a single strictly lowering entry always squares to zero
    shape = (flag.space.total_dim, flag.space.total_dim)
    entries = list(candidate.matrix.entries())[:1] if candidate is not None else []
    matrix = SparseMatrix(shape, {(r, c): v for r, c, v in entries})
    return GradedHom(flag.space, flag.space, 1, matrix)


def generate_flat(
    seed: int,
    space: GradedSpace,
    flag: Flag,
    m: int,
    max_poly_degree: int,
    cylinder: bool = True,
    retries: int = 20,
) -> GeneratedSystem:
    """
    a flat, strictly flag-lowering system in the gauge orbit of a constant
    square-zero alpha_c: alpha = g^-1 alpha_c g - g^-1 dg with g = id + u
    """
    if flag.space != space:
        raise ValueError("flag lives on another space")
    rng = random.Random(seed)
    variables = chart_variables(m) + ((T,) if cylinder else ())
    for attempt in range(retries):
        alpha_c = _square_zero_hom(rng, flag, retries)
        u_entries = {
            position: random_poly(rng, variables, max_poly_degree)
            for position in lowering_positions(space, space, 0, flag)
            if rng.random() < 0.5
        }
        shape = (space.total_dim, space.total_dim)
        identity = HomForm.identity(space, m, cylinder)
        unipotent = HomForm(m, space, space, {ONE: SparseMatrix(shape, u_entries)}, cylinder)
        g = identity + unipotent
        beta = HomForm.from_hom(alpha_c, m, cylinder=cylinder)
        alpha = gauge_transform(beta, g)
        system = Superconnection(space, alpha, flag)
        if mc_residual(system).is_zero() and form_is_strictly_flag_lowering(alpha, flag):
            LOGGER.debug("generated flat system for seed %s on attempt %s", seed, attempt)
            return GeneratedSystem(system, g, alpha_c, seed)
        LOGGER.warning("seed %s attempt %s drew a non-flat system, retrying", seed, attempt)
    raise GeneratorExhaustedError(f"no flat system after {retries} attempts for seed {seed}")


def random_form(
    rng: random.Random,
    source: GradedSpace,
    target: GradedSpace,
    m: int,
    total_degree: int,
    max_poly_degree: int,
    cylinder: bool = True,
    max_monomials: int = 2,
    density: float = 0.5,
    flag: Optional[Flag] = None,
) -> HomForm:
    """
    a random homogeneous form of the given total degree (possibly zero when nothing fits),
    strictly lowering along flag when one is given
    """
    variables = chart_variables(m) + ((T,) if cylinder else ())
    monomials = [
        FormMonomial(tuple(dx_set), dt)
        for size in range(m + 1)
        for dx_set in itertools.combinations(range(1, m + 1), size)
        for dt in ((False, True) if cylinder else (False,))
    ]
    fitting = [
        monomial
        for monomial in monomials
        if lowering_positions(source, target, total_degree - monomial.degree, flag)
    ]
    shape = (target.total_dim, source.total_dim)
    terms: dict[FormMonomial, SparseMatrix] = {}
    for monomial in rng.sample(fitting, min(len(fitting), rng.randint(1, max_monomials))):
        positions = lowering_positions(source, target, total_degree - monomial.degree, flag)
        entries = {
            position: random_poly(rng, variables, max_poly_degree)
            for position in positions
            if rng.random() < density
        }
        if not entries:
            position = rng.choice(positions)
            entries[position] = random_poly(rng, variables, max_poly_degree)
        terms[monomial] = SparseMatrix(shape, entries)
    return HomForm(m, source, target, terms, cylinder)
