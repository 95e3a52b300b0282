from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import partial
from typing import Callable

from chen_holonomy.ainfty.chains import b_square_residual
from chen_holonomy.ainfty.model import TensorChain
from chen_holonomy.ainfty.transformation import (
    ComposedTransformation,
    HomotopyTransformation,
    ainfty_relation_residual,
    lambda_degree_check,
    lambda_eval,
    lambda_gauge_covariance_residual,
)
from chen_holonomy.chen.gauge import constant_part, gauge_transport_residual, invert_unipotent
from chen_holonomy.chen.identities import dphi_expansion_residual, lemma35_residual
from chen_holonomy.chen.model import ChenSeries
from chen_holonomy.chen.ode import ode_agreement_report
from chen_holonomy.chen.series import (
    derivative_residual,
    phi_homogeneous_sign_form,
    phi_series,
    phi_term,
    semigroup_residual,
)
from chen_holonomy.cli.model import Mode, Scenario, Suite
from chen_holonomy.forms.calculus import exterior_d, wedge, wedge_all
from chen_holonomy.forms.model import HomForm
from chen_holonomy.graded.model import GradedHom
from chen_holonomy.locsys.flatness import flatness_report, hom_differential_square_residual
from chen_holonomy.locsys.holonomy import (
    gauge_compat_check,
    holonomy,
    holonomy_iso,
    poincare_trivialization,
)
from chen_holonomy.locsys.model import ResidualReport, Superconnection

LOGGER = logging.getLogger(__name__)

Check = tuple[str, Callable[[], ResidualReport]]

_HOMOGENEOUS_ORDERS = 4
_SIMPLEX_POWERS = 2
_ODE_TIMES = (0.25, 0.5, 1.0)


@dataclass(frozen=True)
class CheckOptions:
    mode: Mode = Mode.EXACT
    tolerance: float = 1e-6
    step: float = 1e-3
    sample_points: int = 5
    max_order: int = 12


def d_squared_report(omega: HomForm) -> ResidualReport:
    residual = exterior_d(exterior_d(omega))
    return ResidualReport.from_form("d squares to zero", "d(d w) = 0", residual)


def leibniz_report(a: HomForm, b: HomForm) -> ResidualReport:
    """d(a ^ b) = da ^ b + (-1)^|a| a ^ db, per homogeneous component of a"""
    residual = exterior_d(wedge(a, b)) - wedge(exterior_d(a), b)
    for degree, component in a.homogeneous_components().items():
        closing = wedge(component, exterior_d(b))
        residual = residual - closing if degree % 2 == 0 else residual + closing
    return ResidualReport.from_form(
        "graded leibniz", "d(a ^ b) = da ^ b + (-1)^|a| a ^ db", residual
    )


def associativity_report(a: HomForm, b: HomForm, c: HomForm) -> ResidualReport:
    residual = wedge(wedge(a, b), c) - wedge(a, wedge(b, c))
    return ResidualReport.from_form("wedge associativity", "(a ^ b) ^ c = a ^ (b ^ c)", residual)


def series_report(system: Superconnection, max_order: int) -> ResidualReport:
    """the summed series against the directly integrated terms, up to where it stopped"""
    series = phi_series(system.alpha, flag=system.flag, max_order=max_order)
    LOGGER.debug("series for the check is %s", series.termination)
    direct = phi_term(system.alpha, 0)
    for n in range(1, len(series.terms)):
        direct = direct + phi_term(system.alpha, n)
    return ResidualReport.from_form(
        "transport series", "Picard recursion = sum of iterated integrals", series.total() - direct
    )


def homogeneous_sign_report(system: Superconnection, max_order: int) -> ResidualReport:
    """every term up to the first vanishing one, capped at _HOMOGENEOUS_ORDERS"""
    series = phi_series(system.alpha, flag=system.flag, max_order=max_order)
    orders = range(1, min(_HOMOGENEOUS_ORDERS, series.termination.order) + 1)
    return ResidualReport.from_forms(
        "homogeneous transport terms",
        "Phi_n = (-1)^(eps(n)|w|) int(w, .., w)",
        [phi_term(system.alpha, n) - phi_homogeneous_sign_form(system.alpha, n) for n in orders],
    )


def _certified_series(system: Superconnection) -> ChenSeries:
    return phi_series(system.alpha, flag=system.flag).require_exact()


def exact_ode_report(system: Superconnection) -> ResidualReport:
    return derivative_residual(_certified_series(system))


def holonomy_report(system: Superconnection) -> ResidualReport:
    return holonomy_iso(system).report


def poincare_report(system: Superconnection, point: tuple[Fraction, ...]) -> ResidualReport:
    return poincare_trivialization(system, point).report


def ode_reports(system: Superconnection, options: CheckOptions) -> ResidualReport:
    series = _certified_series(system)
    count = max(1, options.sample_points)
    points = [
        [(j + 1) / (count + 1) - 0.5 + 0.1 * k for k in range(system.m)] for j in range(count)
    ]
    return ode_agreement_report(series, points, _ODE_TIMES, options.step, options.tolerance)


def lambda_holonomy_report(system: Superconnection) -> ResidualReport:
    residual = lambda_eval(TensorChain.empty(system)) - holonomy(system)
    return ResidualReport.from_form("lambda_0 is the holonomy", "lambda_0 = Phi(1)", residual)


def _beta_chain(scenario: Scenario, chain: TensorChain, indices: tuple[int, ...]):
    gauges = [scenario.gauge_for(i) for i in indices]
    if any(gauge is None for gauge in gauges):
        return None
    transitions = [gauge.g for gauge in gauges]
    betas = tuple(gauge.beta for gauge in gauges)
    zetas = tuple(
        wedge_all([transitions[i + 1], xi, invert_unipotent(transitions[i])])
        for i, xi in enumerate(chain.xis)
    )
    return TensorChain(betas, zetas, chain.degrees), transitions


def _semigroup(beta: Superconnection) -> ResidualReport:
    constant = GradedHom(beta.space, beta.space, 1, constant_part(beta.alpha))
    return semigroup_residual(constant, beta.m, beta.flag)


def _chain_label(prefix: str, index: int, chain: TensorChain) -> str:
    return f"{prefix}[{index}] n={chain.n}"


def forms_checks(scenario: Scenario, options: CheckOptions) -> list[Check]:
    checks: list[Check] = []
    for label, systems, chains in (
        ("system", scenario.systems, scenario.tensor_chains()),
        ("base", scenario.base_systems, scenario.base_tensor_chains()),
    ):
        for i, system in enumerate(systems):
            checks.append((f"forms/d2 {label}[{i}]", partial(d_squared_report, system.alpha)))
            checks.append(
                (f"forms/leibniz {label}[{i}]", partial(leibniz_report, system.alpha, system.alpha))
            )
        for c, chain in enumerate(chains):
            for i, xi in enumerate(chain.xis):
                name = f"forms {label}-chain[{c}] slot {i}"
                outgoing, incoming = chain.systems[i + 1].alpha, chain.systems[i].alpha
                checks.append((f"{name} d2", partial(d_squared_report, xi)))
                checks.append((f"{name} leibniz", partial(leibniz_report, outgoing, xi)))
                checks.append(
                    (f"{name} associativity", partial(associativity_report, outgoing, xi, incoming))
                )
    return checks


def chen_checks(scenario: Scenario, options: CheckOptions) -> list[Check]:
    checks: list[Check] = [
        (f"chen/series system[{i}]", partial(series_report, system, options.max_order))
        for i, system in enumerate(scenario.systems)
    ]
    checks.extend(
        (f"chen/semigroup gauge[{i}]", partial(_semigroup, gauge.beta))
        for i, gauge in enumerate(scenario.gauges)
        if gauge.beta.cylinder and gauge.beta.flag is not None
    )
    return checks


def mc_checks(scenario: Scenario, options: CheckOptions) -> list[Check]:
    checks: list[Check] = []
    for label, systems in (
        ("system", scenario.systems),
        ("base", scenario.base_systems),
        ("gauge-beta", [gauge.beta for gauge in scenario.gauges]),
    ):
        checks.extend(
            (f"mc/{label}[{i}]", partial(flatness_report, system))
            for i, system in enumerate(systems)
        )
    for c, chain in enumerate(scenario.tensor_chains() + scenario.base_tensor_chains()):
        for i, xi in enumerate(chain.xis):
            checks.append(
                (
                    f"mc/twisted-differential chain[{c}] slot {i}",
                    partial(
                        hom_differential_square_residual,
                        xi,
                        chain.systems[i],
                        chain.systems[i + 1],
                    ),
                )
            )
    return checks


def lemma35_checks(scenario: Scenario, options: CheckOptions) -> list[Check]:
    checks: list[Check] = []
    for c, chain in enumerate(scenario.tensor_chains()):
        if chain.n:
            forms = list(reversed(chain.xis))
            label = _chain_label("lemma35/chain", c, chain)
            checks.append((label, partial(lemma35_residual, forms)))
    for i, system in enumerate(scenario.systems):
        for k in range(1, _SIMPLEX_POWERS + 1):
            checks.append(
                (f"lemma35/system[{i}] power {k}", partial(lemma35_residual, [system.alpha] * k))
            )
    return checks


def prop34_checks(scenario: Scenario, options: CheckOptions) -> list[Check]:
    return [
        (f"prop34/system[{i}]", partial(homogeneous_sign_report, system, options.max_order))
        for i, system in enumerate(scenario.systems)
    ]


def prop36_checks(scenario: Scenario, options: CheckOptions) -> list[Check]:
    return [
        (f"prop36/system[{i}]", partial(dphi_expansion_residual, system.alpha, system.flag))
        for i, system in enumerate(scenario.systems)
        if system.flag is not None
    ]


def prop32ode_checks(scenario: Scenario, options: CheckOptions) -> list[Check]:
    checks: list[Check] = []
    for i, system in enumerate(scenario.systems):
        if system.flag is None:
            continue
        checks.append(
            (f"prop32ode/exact system[{i}]", partial(exact_ode_report, system))
        )
        if options.mode == Mode.FLOAT:
            checks.append((f"prop32ode/rk4 system[{i}]", partial(ode_reports, system, options)))
    return checks


def prop33_checks(scenario: Scenario, options: CheckOptions) -> list[Check]:
    return [
        (
            f"prop33/gauge[{i}]",
            partial(
                gauge_transport_residual,
                gauge.beta.alpha,
                gauge.g,
                scenario.systems[gauge.system].flag,
                gauge.beta.flag,
            ),
        )
        for i, gauge in enumerate(scenario.gauges)
    ]


def lemma41_checks(scenario: Scenario, options: CheckOptions) -> list[Check]:
    return [
        (f"lemma41/system[{i}]", partial(holonomy_report, system))
        for i, system in enumerate(scenario.systems)
    ]


def lemma42_checks(scenario: Scenario, options: CheckOptions) -> list[Check]:
    return [
        (
            f"lemma42/gauge[{i}]",
            partial(gauge_compat_check, scenario.systems[gauge.system], gauge.beta, gauge.g),
        )
        for i, gauge in enumerate(scenario.gauges)
    ]


def binfty_checks(scenario: Scenario, options: CheckOptions) -> list[Check]:
    checks = [
        (_chain_label("binfty/chain", c, chain), partial(b_square_residual, chain))
        for c, chain in enumerate(scenario.tensor_chains())
    ]
    checks.extend(
        (_chain_label("binfty/base-chain", c, chain), partial(b_square_residual, chain))
        for c, chain in enumerate(scenario.base_tensor_chains())
    )
    return checks


def lambda_checks(scenario: Scenario, options: CheckOptions) -> list[Check]:
    checks: list[Check] = [
        (f"lambda/holonomy system[{i}]", partial(lambda_holonomy_report, system))
        for i, system in enumerate(scenario.systems)
        if system.flag is not None
    ]
    for c, (spec, chain) in enumerate(zip(scenario.chains, scenario.tensor_chains())):
        label = _chain_label("lambda/degree chain", c, chain)
        checks.append((label, partial(lambda_degree_check, chain)))
        related = _beta_chain(scenario, chain, spec.systems)
        if related is not None:
            beta_chain, transitions = related
            checks.append(
                (
                    _chain_label("lambda/gauge-covariance chain", c, chain),
                    partial(lambda_gauge_covariance_residual, beta_chain, transitions, chain),
                )
            )
    return checks


def appendix_a_checks(scenario: Scenario, options: CheckOptions) -> list[Check]:
    checks: list[Check] = [
        (_chain_label("appendixA/chain", c, chain), partial(ainfty_relation_residual, chain))
        for c, chain in enumerate(scenario.tensor_chains())
    ]
    for c, chain in enumerate(scenario.base_tensor_chains()):
        for k, h in enumerate(scenario.homotopies):
            checks.append(
                (
                    _chain_label(f"appendixA/homotopy[{k}] base-chain", c, chain),
                    partial(ainfty_relation_residual, chain, HomotopyTransformation(h)),
                )
            )
    return checks


def poincare_checks(scenario: Scenario, options: CheckOptions) -> list[Check]:
    if scenario.point is None:
        return []
    return [
        (f"poincare/base[{i}]", partial(poincare_report, system, scenario.point))
        for i, system in enumerate(scenario.base_systems)
    ]


def compose_checks(scenario: Scenario, options: CheckOptions) -> list[Check]:
    checks: list[Check] = []
    transformations = [HomotopyTransformation(h) for h in scenario.homotopies]
    for k, (first, second) in enumerate(zip(transformations, transformations[1:])):
        if first.target_end != second.source_end:
            LOGGER.warning("homotopies %s and %s do not compose, skipping", k, k + 1)
            continue
        composed = ComposedTransformation(first, second)
        for c, chain in enumerate(scenario.base_tensor_chains()):
            checks.append(
                (
                    _chain_label(f"compose/homotopies[{k},{k + 1}] base-chain", c, chain),
                    partial(ainfty_relation_residual, chain, composed),
                )
            )
    return checks


SUITE_CHECKS: dict[Suite, Callable[[Scenario, CheckOptions], list[Check]]] = {
    Suite.FORMS: forms_checks,
    Suite.CHEN: chen_checks,
    Suite.MC: mc_checks,
    Suite.LEMMA35: lemma35_checks,
    Suite.PROP34: prop34_checks,
    Suite.PROP36: prop36_checks,
    Suite.PROP32ODE: prop32ode_checks,
    Suite.PROP33: prop33_checks,
    Suite.LEMMA41: lemma41_checks,
    Suite.LEMMA42: lemma42_checks,
    Suite.BINFTY: binfty_checks,
    Suite.LAMBDA: lambda_checks,
    Suite.APPENDIXA: appendix_a_checks,
    Suite.POINCARE: poincare_checks,
    Suite.COMPOSE: compose_checks,
}


def build_checks(suite: Suite, scenario: Scenario, options: CheckOptions) -> list[Check]:
    checks: list[Check] = []
    for member in suite.expanded():
        checks.extend(SUITE_CHECKS[member](scenario, options))
    return sorted(checks, key=lambda check: check[0])
