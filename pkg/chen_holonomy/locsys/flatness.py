from __future__ import annotations

import logging
from fractions import Fraction
from typing import Optional, Union

from chen_holonomy.chen.gauge import gauge_transform
from chen_holonomy.exactnum.poly import MultiPoly
from chen_holonomy.forms.calculus import exterior_d, pullback_map, restrict_t, wedge
from chen_holonomy.forms.model import HomForm, PolyMap
from chen_holonomy.graded.model import Flag
from chen_holonomy.locsys.model import NonFlatError, ResidualReport, Superconnection

LOGGER = logging.getLogger(__name__)


def mc_residual(system: Superconnection) -> HomForm:
    """d alpha - alpha ^ alpha, which vanishes exactly when D = d - alpha is flat"""
    alpha = system.alpha
    return exterior_d(alpha) - wedge(alpha, alpha)


def mc_component_residuals(system: Superconnection) -> dict[int, HomForm]:
    """the Maurer-Cartan residual split by form degree"""
    return mc_residual(system).partial_degree_components()


def is_flat(system: Superconnection) -> bool:
    return mc_residual(system).is_zero()


def require_flat(system: Superconnection) -> None:
    residual = mc_residual(system)
    if not residual.is_zero():
        raise NonFlatError(f"Maurer-Cartan residual is nonzero: {residual.first_term()}")


def flatness_report(system: Superconnection) -> ResidualReport:
    components = mc_component_residuals(system)
    for k, residual in sorted(components.items()):
        if not residual.is_zero():
            LOGGER.debug("maurer-cartan residual has a nonzero %s-form part", k)
    return ResidualReport.from_forms(
        "maurer-cartan", "d alpha - alpha ^ alpha = 0", components.values()
    )


def hom_differential(
    omega: HomForm, source: Superconnection, target: Superconnection
) -> HomForm:
    """d omega - alpha' ^ omega + (-1)^k omega ^ alpha, per homogeneous component of degree k"""
    result = HomForm.zero(omega.m, omega.source, omega.target, omega.cylinder)
    for k, component in omega.homogeneous_components().items():
        twisted = exterior_d(component) - wedge(target.alpha, component)
        closing = wedge(component, source.alpha)
        result = result + twisted + (closing if k % 2 == 0 else -closing)
    return result


def hom_differential_square_residual(
    omega: HomForm, source: Superconnection, target: Superconnection
) -> ResidualReport:
    once = hom_differential(omega, source, target)
    return ResidualReport.from_form(
        "twisted differential squares to zero",
        "del(del omega) = 0 for flat systems",
        hom_differential(once, source, target),
    )


def is_morphism(
    phi: HomForm, source: Superconnection, target: Superconnection
) -> ResidualReport:
    """residual of d Phi = alpha' ^ Phi - Phi ^ alpha"""
    if phi.total_degree() not in (None, 0):
        raise ValueError("a morphism of superconnections has total degree 0")
    residual = exterior_d(phi) - wedge(target.alpha, phi) + wedge(phi, source.alpha)
    return ResidualReport.from_form(
        "morphism", "d Phi = alpha' ^ Phi - Phi ^ alpha", residual
    )


def restrict_superconnection(
    system: Superconnection, s: Union[MultiPoly, Fraction, int]
) -> Superconnection:
    return Superconnection(system.space, restrict_t(system.alpha, s), system.flag)


def pullback_superconnection(system: Superconnection, f: PolyMap) -> Superconnection:
    pulled = Superconnection(system.space, pullback_map(system.alpha, f), system.flag)
    expected = pullback_map(mc_residual(system), f)
    if mc_residual(pulled) != expected:
        raise AssertionError("pullback does not commute with the Maurer-Cartan residual")
    return pulled


def gauge_transform_superconnection(
    system: Superconnection, g: HomForm, flag: Optional[Flag] = None
) -> Superconnection:
    """the system on the source of g whose alpha is g^-1 beta g - g^-1 dg"""
    return Superconnection(g.source, gauge_transform(system.alpha, g), flag)
