from __future__ import annotations

import logging
from fractions import Fraction
from typing import Optional, Sequence, Union

from chen_holonomy.chen.model import (
    ChenSeries,
    EpsilonSign,
    FlagViolationError,
    Termination,
)
from chen_holonomy.exactnum.poly import MultiPoly
from chen_holonomy.forms.calculus import (
    contract_dt,
    integrate_coefficients,
    restrict_t,
    wedge,
    wedge_all,
)
from chen_holonomy.forms.model import (
    DT,
    FormDomainError,
    HomForm,
    NonComposableError,
    T,
)
from chen_holonomy.graded.linear import matrix_is_strictly_flag_lowering
from chen_holonomy.graded.model import Flag, GradedHom, GradedSpace
from chen_holonomy.locsys.model import ResidualReport

LOGGER = logging.getLogger(__name__)

Bound = Union[MultiPoly, Fraction, int]


def _parameter(t: Optional[Bound]) -> Bound:
    return MultiPoly.variable(T) if t is None else t


def _require_endomorphism(omega: HomForm) -> None:
    if omega.source != omega.target:
        raise NonComposableError("iterated integrals need an endomorphism-valued form")
    if not omega.cylinder:
        raise FormDomainError("iterated integrals need a form on R^m x [0,1]")


def base_identity(space: GradedSpace, m: int) -> HomForm:
    return HomForm.identity(space, m, cylinder=False)


def contracted_integrand(omega: HomForm, variable: str) -> HomForm:
    """the pullback at height `variable` of the dt-contraction of omega"""
    return restrict_t(contract_dt(omega), MultiPoly.variable(variable))


def form_is_strictly_flag_lowering(omega: HomForm, flag: Flag) -> bool:
    if flag.space != omega.source or flag.space != omega.target:
        return False
    return all(matrix_is_strictly_flag_lowering(a, flag) for a in omega.terms.values())


def phi_term(omega: HomForm, n: int, t: Optional[Bound] = None) -> HomForm:
    """
    the n-th iterated integral, built as the full product of the n integrands in
    s1..sn and integrated innermost first: sn from 0 to s(n-1), ..., s1 from 0 to t
    """
    _require_endomorphism(omega)
    if n < 0:
        raise ValueError("negative order")
    if n == 0:
        return base_identity(omega.source, omega.m)
    variables = [f"s{j}" for j in range(1, n + 1)]
    product = wedge_all([contracted_integrand(omega, s) for s in variables])
    for j in reversed(range(n)):
        upper = MultiPoly.variable(variables[j - 1]) if j else _parameter(t)
        product = integrate_coefficients(product, variables[j], 0, upper)
        if product.is_zero():
            break
    return product


def _picard_step(integrand: HomForm, previous: HomForm) -> HomForm:
    shifted = previous.subst(T, MultiPoly.variable("s"))
    return integrate_coefficients(wedge(integrand, shifted), "s", 0, MultiPoly.variable(T))


def phi_series(
    omega: HomForm, flag: Optional[Flag] = None, max_order: Optional[int] = None
) -> ChenSeries:
    """
    sums the transport series. terms are produced by the recursion
    Phi_n(t) = int_0^t f(s) ^ Phi_(n-1)(s) ds, which equals phi_term(omega, n, t).
    the first exactly vanishing term certifies termination; a strictly lowering
    flag guarantees it appears before the flag runs out of layers.
    """
    _require_endomorphism(omega)
    certified = flag is not None and form_is_strictly_flag_lowering(omega, flag)
    if flag is not None and not certified:
        if max_order is None:
            raise FlagViolationError("some coefficient of the form is not strictly flag-lowering")
        LOGGER.warning(
            "flag does not certify the series, falling back to truncation at %s", max_order
        )
    if not certified and max_order is None:
        raise ValueError("phi_series needs a flag certificate or a max_order")

    limit = flag.nu if certified else max_order
    integrand = contracted_integrand(omega, "s")
    terms = [base_identity(omega.source, omega.m)]
    n = 1
    while True:
        term = _picard_step(integrand, terms[-1])
        if term.is_zero():
            LOGGER.debug("series terminates exactly at order %s", n)
            return ChenSeries(omega, tuple(terms), Termination.finite_at(n))
        if certified and n >= limit:
            raise AssertionError(
                f"term {n} is nonzero although the flag has only {limit} layers"
            )
        if not certified and n > limit:
            return ChenSeries(omega, tuple(terms), Termination.truncated_at(limit))
        terms.append(term)
        n += 1


def simplex_integral(
    forms: Sequence[HomForm],
    t: Optional[Bound] = None,
    space: Optional[GradedSpace] = None,
    m: Optional[int] = None,
) -> HomForm:
    """
    integral over the t-simplex of pi_1^* w_1 ^ ... ^ pi_n^* w_n, computed by peeling
    off the outermost variable:
    (-1)^((n-1)|w_1|) int_0^t f_1(s) ^ (integral of w_2..w_n over the s-simplex) ds.
    the empty chain gives the identity on `space`.
    """
    if not forms:
        if space is None or m is None:
            raise ValueError("the empty simplex integral needs a space and a chart dimension")
        return base_identity(space, m)
    for left, right in zip(forms, forms[1:]):
        if left.source != right.target:
            raise NonComposableError("simplex integral of a non-composable chain")
    for form in forms:
        if not form.cylinder:
            raise FormDomainError("simplex integrals need forms on R^m x [0,1]")
    result = _simplex(list(forms), 1)
    if t is not None:
        result = result.subst(T, t)
    return result


def _simplex(forms: list[HomForm], depth: int) -> HomForm:
    s = f"s{depth}"
    first = forms[0]
    zero = HomForm.zero(first.m, forms[-1].source, first.target, cylinder=False)
    degree = first.total_degree()
    if degree is None:
        return zero
    integrand = contracted_integrand(first, s)
    if len(forms) > 1:
        rest = _simplex(forms[1:], depth + 1)
        if rest.is_zero():
            return zero
        integrand = wedge(integrand, rest.subst(T, MultiPoly.variable(s)))
        if ((len(forms) - 1) * degree) % 2:
            integrand = -integrand
    return integrate_coefficients(integrand, s, 0, MultiPoly.variable(T))


def phi_homogeneous_sign_form(omega: HomForm, n: int, t: Optional[Bound] = None) -> HomForm:
    _require_endomorphism(omega)
    degree = omega.total_degree()
    if n == 0:
        return base_identity(omega.source, omega.m)
    if degree is None:
        return HomForm.zero(omega.m, omega.source, omega.target, cylinder=False)
    return simplex_integral([omega] * n, t).scaled(EpsilonSign(n).sign(degree))


def transport_generator(omega: HomForm) -> HomForm:
    """the right-hand side coefficient of the transport ODE, a form on R^m depending on t"""
    return restrict_t(contract_dt(omega), MultiPoly.variable(T))


def derivative_residual(series: ChenSeries) -> ResidualReport:
    """d/dt Phi(t) - (pullback at t of the dt-contraction) ^ Phi(t), exactly"""
    series.require_exact()
    phi = series.total()
    derivative = phi.map_coefficients(lambda p: p.diff(T))
    residual = derivative - wedge(transport_generator(series.omega), phi)
    return ResidualReport.from_form("transport ode", "dPhi/dt = i_t^* i_dt omega ^ Phi", residual)


def semigroup_residual(a: GradedHom, m: int, flag: Flag) -> ResidualReport:
    """Phi(t + s) = Phi(t) Phi(s) for the time-independent form a dt"""
    omega = HomForm.from_hom(a, m, DT)
    phi = phi_series(omega, flag=flag).require_exact().total()
    t, s = MultiPoly.variable(T), MultiPoly.variable("s")
    residual = phi.subst(T, t + s) - wedge(phi, phi.subst(T, s))
    return ResidualReport.from_form("transport semigroup", "Phi(t+s) = Phi(t) Phi(s)", residual)

