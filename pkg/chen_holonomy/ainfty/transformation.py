from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Hashable, Optional, Sequence

from chen_holonomy.ainfty.chains import hochschild_b, hochschild_b_collected
from chen_holonomy.ainfty.model import ContextMismatchError, TensorChain, koszul_sign
from chen_holonomy.chen.gauge import invert_unipotent
from chen_holonomy.chen.series import phi_series
from chen_holonomy.forms.calculus import (
    block_embed_form,
    block_extract_form,
    exterior_d,
    pullback_map,
    restrict_t,
    wedge,
    wedge_all,
)
from chen_holonomy.forms.model import FormDomainError, HomForm, PolyMap
from chen_holonomy.graded.linear import direct_sum, flag_direct_sum
from chen_holonomy.graded.model import Flag
from chen_holonomy.locsys.flatness import (
    gauge_transform_superconnection,
    pullback_superconnection,
)
from chen_holonomy.locsys.model import GaugeRelationError, ResidualReport, Superconnection

LOGGER = logging.getLogger(__name__)


def _flag_of(system: Superconnection) -> Flag:
    return system.flag if system.flag is not None else Flag.single(system.space)


def assemble_omega(chain: TensorChain):
    """
    omega = sum alpha_i + sum xi_i on V_0 + .. + V_n with alpha_i on the diagonal
    block i and xi_i on block (i+1, i), together with the flag listing V_n first
    """
    summed = direct_sum([system.space for system in chain.systems])
    omega = HomForm.zero(chain.m, summed.space, summed.space, chain.cylinder)
    for i, system in enumerate(chain.systems):
        omega = omega + block_embed_form(system.alpha, summed, i, i)
    for i, xi in enumerate(chain.xis):
        omega = omega + block_embed_form(xi, summed, i + 1, i)
    flag = flag_direct_sum(summed, [_flag_of(system) for system in chain.systems])
    return summed, omega, flag


def lambda_eval(chain: TensorChain) -> HomForm:
    """
    the (n, 0) block of the transport of the assembled form at t = 1, a form on
    R^m with values in Hom(V_0, V_n); for the empty chain this is the holonomy
    """
    if not chain.cylinder:
        raise FormDomainError("lambda is evaluated on chains over R^m x [0,1]")
    summed, omega, flag = assemble_omega(chain)
    transport = phi_series(omega, flag=flag).require_exact().at(1)
    LOGGER.debug("lambda_%s over %s", chain.n, summed.space)
    return block_extract_form(transport, summed, chain.n, 0)


def lambda_degree_check(chain: TensorChain) -> ResidualReport:
    value = lambda_eval(chain)
    expected = chain.total_degree - chain.n
    stray = HomForm.zero(value.m, value.source, value.target, value.cylinder)
    for degree, component in value.homogeneous_components().items():
        if degree != expected:
            stray = stray + component
    return ResidualReport.from_form(
        "lambda degree", f"deg lambda_n = sum |xi_i| - n = {expected}", stray
    )


class Transformation(ABC):
    """
    an evaluated A-infinity transformation F => G: values on chains together with
    the pullbacks F^* and G^* that appear in its naturality relation
    """

    @abstractmethod
    def evaluate(self, chain: TensorChain) -> HomForm:
        ...

    @abstractmethod
    def source_pullback(self, form: HomForm) -> HomForm:
        ...

    @abstractmethod
    def target_pullback(self, form: HomForm) -> HomForm:
        ...

    @property
    @abstractmethod
    def source_end(self) -> Hashable:
        ...

    @property
    @abstractmethod
    def target_end(self) -> Hashable:
        ...


class CylinderTransformation(Transformation):
    """lambda itself, from the restriction at height 0 to the restriction at height 1"""

    def evaluate(self, chain: TensorChain) -> HomForm:
        return lambda_eval(chain)

    def source_pullback(self, form: HomForm) -> HomForm:
        return restrict_t(form, 0)

    def target_pullback(self, form: HomForm) -> HomForm:
        return restrict_t(form, 1)

    @property
    def source_end(self) -> Hashable:
        return ("height", 0)

    @property
    def target_end(self) -> Hashable:
        return ("height", 1)


@dataclass(frozen=True)
class HomotopyTransformation(Transformation):
    """hol of a polynomial homotopy h: R^q x [0,1] -> R^p, a transformation f^* => g^*"""

    h: PolyMap

    def __post_init__(self):
        if not self.h.cylinder:
            raise FormDomainError("a homotopy is a map out of R^q x [0,1]")

    def pull_chain(self, chain: TensorChain) -> TensorChain:
        if chain.cylinder:
            raise FormDomainError("chains pulled back along a homotopy live on R^p")
        systems = [pullback_superconnection(system, self.h) for system in chain.systems]
        return chain.map_entries(systems, lambda xi: pullback_map(xi, self.h))

    def evaluate(self, chain: TensorChain) -> HomForm:
        return lambda_eval(self.pull_chain(chain))

    def source_pullback(self, form: HomForm) -> HomForm:
        return pullback_map(form, self.h.at_height(0))

    def target_pullback(self, form: HomForm) -> HomForm:
        return pullback_map(form, self.h.at_height(1))

    @property
    def source_end(self) -> Hashable:
        return self.h.at_height(0)

    @property
    def target_end(self) -> Hashable:
        return self.h.at_height(1)


@dataclass(frozen=True)
class ComposedTransformation(Transformation):
    """(second . first)_n = sum_i second_i ^ first_(n-i) for first: F => G, second: G => H"""

    first: Transformation
    second: Transformation

    def __post_init__(self):
        if self.first.target_end != self.second.source_end:
            raise ContextMismatchError(
                "the second transformation does not start where the first one ends"
            )

    def evaluate(self, chain: TensorChain) -> HomForm:
        n = chain.n
        total: Optional[HomForm] = None
        for i in range(n + 1):
            upper = self.second.evaluate(chain.sub(n - i, n))
            lower = self.first.evaluate(chain.sub(0, n - i))
            term = wedge(upper, lower)
            total = term if total is None else total + term
        return total

    def source_pullback(self, form: HomForm) -> HomForm:
        return self.first.source_pullback(form)

    def target_pullback(self, form: HomForm) -> HomForm:
        return self.second.target_pullback(form)

    @property
    def source_end(self) -> Hashable:
        return self.first.source_end

    @property
    def target_end(self) -> Hashable:
        return self.second.target_end


def compose_transformations(
    first: Transformation, second: Transformation, chain: TensorChain
) -> HomForm:
    return ComposedTransformation(first, second).evaluate(chain)


def ainfty_relation_rhs(
    chain: TensorChain, transformation: Transformation, collected: bool = True
) -> HomForm:
    """
    G^*alpha_n ^ lambda_n - (-1)^(sum |xi| - n) lambda_n ^ F^*alpha_0
    + G^*xi_(n-1) ^ lambda_(n-1)(xi_(n-2), .., xi_0)
    - (-1)^(sum_(j>=1) |xi_j| - n + 1) lambda_(n-1)(xi_(n-1), .., xi_1) ^ F^*xi_0
    - lambda(b(xi))
    """
    evaluate = transformation.evaluate
    n = chain.n
    value = evaluate(chain)
    first, last = chain.systems[0], chain.systems[-1]
    rhs = wedge(transformation.target_pullback(last.alpha), value)
    rhs = rhs - wedge(value, transformation.source_pullback(first.alpha)).scaled(
        koszul_sign(chain.total_degree - n)
    )
    if n >= 1:
        top = transformation.target_pullback(chain.xis[-1])
        rhs = rhs + wedge(top, evaluate(chain.sub(0, n - 1)))
        bottom = transformation.source_pullback(chain.xis[0])
        sign = koszul_sign(sum(chain.degrees[1:]) - n + 1)
        rhs = rhs - wedge(evaluate(chain.sub(1, n)), bottom).scaled(sign)
    boundary = hochschild_b_collected(chain) if collected else hochschild_b(chain)
    for sign, term in boundary:
        rhs = rhs - evaluate(term).scaled(sign)
    return rhs


def ainfty_relation_residual(
    chain: TensorChain,
    transformation: Optional[Transformation] = None,
    collected: bool = True,
) -> ResidualReport:
    """d lambda_n(xi) against the naturality right-hand side, exactly"""
    transformation = transformation or CylinderTransformation()
    lhs = exterior_d(transformation.evaluate(chain))
    residual = lhs - ainfty_relation_rhs(chain, transformation, collected)
    LOGGER.debug(
        "A-infinity relation for n = %s via %s: %s",
        chain.n,
        type(transformation).__name__,
        "exact" if residual.is_zero() else residual.first_term(),
    )
    return ResidualReport.from_form(
        "A-infinity naturality",
        "d lambda_n = G*alpha ^ lambda_n +- lambda_n ^ F*alpha + boundary terms - lambda(b xi)",
        residual,
    )


def gauge_chain(
    chain: TensorChain, gauges: Sequence[HomForm], flags: Optional[Sequence[Flag]] = None
) -> TensorChain:
    """
    the chain in the trivializations related by g_i: alpha_i = g_i^-1 beta_i g_i
    - g_i^-1 dg_i and xi_i = g_(i+1)^-1 zeta_i g_i
    """
    if len(gauges) != len(chain.systems):
        raise ContextMismatchError(f"{len(gauges)} gauges for {len(chain.systems)} systems")
    flags = flags or [
        system.flag if g.source == system.space else None
        for g, system in zip(gauges, chain.systems)
    ]
    systems = [
        gauge_transform_superconnection(system, g, flag)
        for g, system, flag in zip(gauges, chain.systems, flags)
    ]
    inverses = [invert_unipotent(g) for g in gauges]
    xis = tuple(
        wedge_all([inverses[i + 1], zeta, gauges[i]]) for i, zeta in enumerate(chain.xis)
    )
    return TensorChain(tuple(systems), xis, chain.degrees)


def _require_gauge_related(
    alpha_chain: TensorChain, beta_chain: TensorChain, gauges: Sequence[HomForm]
) -> None:
    if alpha_chain.n != beta_chain.n or len(gauges) != len(alpha_chain.systems):
        raise ContextMismatchError("chains and gauges have different lengths")
    expected = gauge_chain(beta_chain, gauges)
    for i, (actual, wanted) in enumerate(zip(alpha_chain.systems, expected.systems)):
        if actual.alpha != wanted.alpha:
            raise GaugeRelationError(f"alpha_{i} differs from g^-1 beta g - g^-1 dg")
    for i, (actual_xi, wanted_xi) in enumerate(zip(alpha_chain.xis, expected.xis)):
        if actual_xi != wanted_xi:
            raise GaugeRelationError(f"xi_{i} differs from g_(i+1)^-1 zeta_i g_i")


def lambda_gauge_covariance_residual(
    beta_chain: TensorChain,
    gauges: Sequence[HomForm],
    alpha_chain: Optional[TensorChain] = None,
) -> ResidualReport:
    """lambda^alpha(xi) against (i_1^* g_n)^-1 lambda^beta(zeta) i_0^* g_0"""
    if alpha_chain is None:
        alpha_chain = gauge_chain(beta_chain, gauges)
    else:
        _require_gauge_related(alpha_chain, beta_chain, gauges)
    lhs = lambda_eval(alpha_chain)
    rhs = wedge_all(
        [
            invert_unipotent(restrict_t(gauges[-1], 1)),
            lambda_eval(beta_chain),
            restrict_t(gauges[0], 0),
        ]
    )
    return ResidualReport.from_form(
        "lambda gauge covariance",
        "lambda^alpha(xi) = (i_1^* g_n)^-1 lambda^beta(zeta) i_0^* g_0",
        lhs - rhs,
    )
