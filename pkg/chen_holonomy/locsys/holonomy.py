from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from chen_holonomy.chen.gauge import gauge_transform, invert_unipotent
from chen_holonomy.chen.series import phi_series
from chen_holonomy.forms.calculus import pullback_map, restrict_t, wedge, wedge_all
from chen_holonomy.forms.model import HomForm, PolyMap
from chen_holonomy.locsys.flatness import (
    flatness_report,
    is_morphism,
    pullback_superconnection,
    require_flat,
    restrict_superconnection,
)
from chen_holonomy.locsys.model import (
    GaugeRelationError,
    ResidualReport,
    Superconnection,
    combine_reports,
)

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class HolonomyResult:
    phi: HomForm
    phi_inverse: HomForm
    report: ResidualReport


@dataclass(frozen=True)
class PoincareTrivialization:
    psi: HomForm
    psi_inverse: HomForm
    constant: Superconnection
    report: ResidualReport


def _require_certified(system: Superconnection) -> None:
    if not system.cylinder:
        raise ValueError("holonomy is taken along the interval factor of R^m x [0,1]")
    if system.flag is None:
        raise ValueError("holonomy needs a flag certificate for an exact series")


def holonomy(system: Superconnection) -> HomForm:
    """Phi^alpha(1) without the flatness and inverse checks"""
    _require_certified(system)
    return phi_series(system.alpha, flag=system.flag).require_exact().at(1)


def inverse_report(phi: HomForm, phi_inverse: HomForm) -> ResidualReport:
    left_identity = HomForm.identity(phi.source, phi.m, phi.cylinder)
    right_identity = HomForm.identity(phi.target, phi.m, phi.cylinder)
    return ResidualReport.from_forms(
        "two-sided inverse",
        "Phi Phi^-1 = id = Phi^-1 Phi",
        [
            wedge(phi_inverse, phi) - left_identity,
            wedge(phi, phi_inverse) - right_identity,
        ],
    )


def holonomy_iso(system: Superconnection) -> HolonomyResult:
    """
    transport along [0,1] as an isomorphism from the restriction at height 0 to the
    restriction at height 1, with its exact inverse
    """
    _require_certified(system)
    require_flat(system)
    phi = holonomy(system)
    morphism = is_morphism(
        phi, restrict_superconnection(system, 0), restrict_superconnection(system, 1)
    )
    phi_inverse = invert_unipotent(phi)
    inverse = inverse_report(phi, phi_inverse)
    if not inverse.exact:
        raise AssertionError(f"constructed inverse is not an inverse: {inverse.witness}")
    LOGGER.debug("holonomy morphism residual exact=%s", morphism.exact)
    return HolonomyResult(
        phi,
        phi_inverse,
        combine_reports(
            "holonomy isomorphism",
            "d Phi(1) = i_1^* alpha ^ Phi(1) - Phi(1) ^ i_0^* alpha",
            [morphism, inverse],
        ),
    )


def gauge_compat_check(
    system_v: Superconnection, system_w: Superconnection, g: HomForm
) -> ResidualReport:
    """holonomies of two trivializations related by g agree up to g at the ends"""
    expected = gauge_transform(system_w.alpha, g)
    if expected != system_v.alpha:
        raise GaugeRelationError(
            f"alpha differs from g^-1 beta g - g^-1 dg: {(system_v.alpha - expected).first_term()}"
        )
    hol_v = holonomy(system_v)
    hol_w = holonomy(system_w)
    rhs = wedge_all([invert_unipotent(restrict_t(g, 1)), hol_w, restrict_t(g, 0)])
    return ResidualReport.from_form(
        "gauge compatibility", "Phi^alpha(1) = (i_1^* g)^-1 Phi^beta(1) i_0^* g", hol_v - rhs
    )


def constant_system(system: Superconnection, base_point: Sequence[Fraction]) -> Superconnection:
    """the constant system whose differential is the 0-form part of alpha at the base point"""
    if system.cylinder:
        raise ValueError("constant systems are taken on R^m")
    at_point = pullback_map(system.alpha, PolyMap.constant(base_point, system.m))
    return Superconnection(system.space, at_point, system.flag)


def poincare_trivialization(
    system: Superconnection, base_point: Sequence[Fraction]
) -> PoincareTrivialization:
    """
    trivializes a flat system on a chart star-shaped about the base point by the
    transport along the linear contraction h(x, t) = x0 + t (x - x0)
    """
    if len(base_point) != system.m:
        raise ValueError(f"base point {list(base_point)} is not in R^{system.m}")
    require_flat(system)
    contraction = PolyMap.linear_contraction(base_point)
    pulled = pullback_superconnection(system, contraction)
    constant = constant_system(system, base_point)
    if restrict_t(pulled.alpha, 0) != constant.alpha:
        raise AssertionError("the contraction does not start at the constant system")
    if restrict_t(pulled.alpha, 1) != system.alpha:
        raise AssertionError("the contraction does not end at the identity")
    iso = holonomy_iso(pulled)
    morphism = is_morphism(iso.phi, constant, system)
    squares = ResidualReport.from_form(
        "constant differential squares to zero",
        "alpha_0(x0) ^ alpha_0(x0) = 0",
        wedge(constant.alpha, constant.alpha),
    )
    LOGGER.debug("poincare trivialization at %s", [str(x) for x in base_point])
    return PoincareTrivialization(
        iso.phi,
        iso.phi_inverse,
        constant,
        combine_reports(
            "poincare trivialization",
            "Psi: (V, d - alpha_0(x0)) -> (V, d - alpha) isomorphism",
            [morphism, iso.report, squares, flatness_report(constant)],
        ),
    )
