from __future__ import annotations

import logging
import random
from fractions import Fraction

from chen_holonomy.cli.model import ChainSpec, GaugeSpec, Profile, Scenario
from chen_holonomy.exactnum.matrix import SparseMatrix
from chen_holonomy.exactnum.poly import MultiPoly
from chen_holonomy.forms.model import DT, HomForm, PolyMap, T, chart_variable, dx
from chen_holonomy.graded.model import Flag, GradedHom, GradedSpace
from chen_holonomy.locsys.generator import (
    GeneratedSystem,
    generate_flat,
    random_form,
    random_poly,
    random_rational,
)
from chen_holonomy.locsys.model import Superconnection

LOGGER = logging.getLogger(__name__)

_SEED_RANGE = 2**31


def profile_space(nu: int) -> GradedSpace:
    """
    nu basis vectors split between degrees 0 and 1. For nu <= 2 each degree holds at most one
    vector, so generated gauges are trivial and alpha is the constant alpha_c.
    """
    return GradedSpace.of({0: (nu + 1) // 2, 1: nu // 2})


def _generated(
    rng: random.Random,
    space: GradedSpace,
    flag: Flag,
    profile: Profile,
    cylinder: bool,
    retries: int,
) -> GeneratedSystem:
    return generate_flat(
        rng.randrange(_SEED_RANGE), space, flag, profile.m, profile.deg, cylinder, retries
    )


def _random_chain(
    rng: random.Random, space: GradedSpace, profile: Profile, cylinder: bool
) -> ChainSpec:
    degrees = tuple(rng.choice((0, 1, 2)) for _ in range(profile.n))
    xis = tuple(
        random_form(rng, space, space, profile.m, degree, profile.deg, cylinder)
        for degree in degrees
    )
    return ChainSpec(tuple(range(profile.n + 1)), xis, degrees)


def _perturbation(rng: random.Random, profile: Profile) -> PolyMap:
    """h(x, t) = x + t q(x), a homotopy starting at the identity"""
    variables = [chart_variable(i) for i in range(1, profile.m + 1)]
    t = MultiPoly.variable(T)
    components = tuple(
        MultiPoly.variable(v) + t * random_poly(rng, variables, profile.deg) for v in variables
    )
    return PolyMap(components, profile.m, cylinder=True)


def generate_scenario(seed: int, profile: Profile, retries: int = 20) -> Scenario:
    """
    a reproducible scenario: n + 1 flat cylinder systems on a shared flag with a chain
    through them and the gauge data each came from, plus n + 1 flat systems on R^m
    with a chain, a base point and two composable homotopies
    """
    rng = random.Random(seed)
    space = profile_space(profile.nu)
    flag = Flag.discrete(space, rng.sample(range(space.total_dim), space.total_dim))

    systems, gauges = [], []
    for i in range(profile.n + 1):
        generated = _generated(rng, space, flag, profile, True, retries)
        systems.append(generated.system)
        beta = HomForm.from_hom(generated.alpha_c, profile.m)
        gauges.append(GaugeSpec(i, Superconnection(space, beta, flag), generated.g))
    chain = _random_chain(rng, space, profile, cylinder=True)

    base_systems = [
        _generated(rng, space, flag, profile, False, retries).system
        for _ in range(profile.n + 1)
    ]
    base_chain = _random_chain(rng, space, profile, cylinder=False)
    point = tuple(random_rational(rng) for _ in range(profile.m))
    homotopies = [PolyMap.linear_contraction(point), _perturbation(rng, profile)]

    LOGGER.info("generated scenario for seed %s with profile %s", seed, profile)
    return Scenario(
        name=f"seed-{seed}-{profile}",
        m=profile.m,
        systems=systems,
        chains=[chain],
        gauges=gauges,
        base_systems=base_systems,
        base_chains=[base_chain],
        homotopies=homotopies,
        point=point,
        seed=seed,
    )


def nilpotent_example() -> Scenario:
    """
    hand-checkable scenario on V = span(e0, e1) with N e0 = e1:
    alpha = N (t dx + x dt) with holonomy id + x N, its gauge partner -N dt = gauge of
    0 by g = id + t N, and alpha = N dx on R for the Poincare trivialization at 0
    """
    space = GradedSpace.concentrated(0, 2)
    flag = Flag.discrete(space, (1, 0))
    nilpotent = GradedHom(space, space, 0, SparseMatrix((2, 2), {(1, 0): Fraction(1)}))
    x, t = MultiPoly.variable(chart_variable(1)), MultiPoly.variable(T)
    identity = GradedHom.identity(space)

    alpha = HomForm.from_hom(nilpotent, 1, dx(1), t) + HomForm.from_hom(nilpotent, 1, DT, x)
    gauged = -HomForm.from_hom(nilpotent, 1, DT)
    g = HomForm.identity(space, 1) + HomForm.from_hom(nilpotent, 1, coefficient=t)
    trivial = Superconnection(space, HomForm.zero(1, space, space), flag)
    systems = [
        Superconnection(space, alpha, flag),
        Superconnection(space, gauged, flag),
        trivial,
    ]
    xi = HomForm.from_hom(identity, 1, DT, x.scaled(3))

    base = Superconnection(space, HomForm.from_hom(nilpotent, 1, dx(1), cylinder=False), flag)
    base_xi = HomForm.from_hom(identity, 1, dx(1), cylinder=False)
    bend = PolyMap((x + t * x * x,), 1, cylinder=True)
    return Scenario(
        name="nilpotent-example",
        m=1,
        systems=systems,
        chains=[ChainSpec((2, 2), (xi,), (1,)), ChainSpec((0, 1), (xi,), (1,))],
        gauges=[GaugeSpec(1, trivial, g)],
        base_systems=[base],
        base_chains=[ChainSpec((0, 0), (base_xi,), (1,))],
        homotopies=[PolyMap.linear_contraction((Fraction(0),)), bend],
        point=(Fraction(0),),
    )
