from __future__ import annotations

import logging
from fractions import Fraction
from typing import Optional, Sequence, Union

from chen_holonomy.chen.model import EpsilonSign
from chen_holonomy.chen.series import phi_series, simplex_integral
from chen_holonomy.exactnum.poly import MultiPoly
from chen_holonomy.forms.calculus import exterior_d, restrict_t, wedge
from chen_holonomy.forms.model import HomForm, T
from chen_holonomy.graded.model import Flag
from chen_holonomy.locsys.model import ResidualReport

LOGGER = logging.getLogger(__name__)

Bound = Union[MultiPoly, Fraction, int]


def _sign(exponent: int) -> int:
    return -1 if exponent % 2 else 1


def simplex_derivative_expansion(forms: Sequence[HomForm]) -> HomForm:
    """
    the right-hand side for d of the simplex integral of w_1..w_n:
      sum_i (-1)^(n + |w_1| + .. + |w_(i-1)|) int(w_1, .., dw_i, .., w_n)
    + sum_i (-1)^i int(w_1, .., w_i ^ w_(i+1), .., w_n)
    + (-1)^n int(w_1, .., w_(n-1)) ^ i_0^* w_n
    + (-1)^((n-1)|w_1|) i_t^* w_1 ^ int(w_2, .., w_n)
    """
    n = len(forms)
    first, last = forms[0], forms[-1]
    total = HomForm.zero(first.m, last.source, first.target, cylinder=False)
    degrees = [form.total_degree() for form in forms]
    if any(degree is None for degree in degrees):
        return total

    running = 0
    for i, form in enumerate(forms):
        differential = exterior_d(form)
        if not differential.is_zero():
            chain = list(forms[:i]) + [differential] + list(forms[i + 1 :])
            total = total + simplex_integral(chain).scaled(_sign(n + running))
        running += degrees[i]

    for i in range(1, n):
        merged = wedge(forms[i - 1], forms[i])
        if merged.is_zero():
            continue
        chain = list(forms[: i - 1]) + [merged] + list(forms[i + 1 :])
        total = total + simplex_integral(chain).scaled(_sign(i))

    right = wedge(
        simplex_integral(forms[:-1], space=last.target, m=last.m),
        restrict_t(last, 0),
    )
    total = total + right.scaled(_sign(n))

    left = wedge(
        restrict_t(first, MultiPoly.variable(T)),
        simplex_integral(forms[1:], space=first.source, m=first.m),
    )
    return total + left.scaled(_sign((n - 1) * degrees[0]))


def lemma35_residual(forms: Sequence[HomForm], t: Optional[Bound] = None) -> ResidualReport:
    """d of a simplex integral against its four-group expansion"""
    if not forms:
        raise ValueError("need at least one form")
    lhs = exterior_d(simplex_integral(forms))
    residual = lhs - simplex_derivative_expansion(forms)
    if t is not None:
        residual = residual.subst(T, t)
    LOGGER.debug("simplex derivative residual for a chain of %s forms", len(forms))
    return ResidualReport.from_form(
        "simplex integral derivative", "d int(w_1..w_n) = four boundary groups", residual
    )


def dphi_expansion(omega: HomForm, orders: int) -> HomForm:
    """sum over n <= orders of (-1)^(eps(n)|w|) times the expansion of d int(w, .., w)"""
    degree = omega.total_degree()
    total = HomForm.zero(omega.m, omega.source, omega.target, cylinder=False)
    if degree is None:
        return total
    for n in range(1, orders + 1):
        block = simplex_derivative_expansion([omega] * n)
        total = total + block.scaled(EpsilonSign(n).sign(degree))
    return total


def dphi_expansion_residual(
    omega: HomForm, flag: Flag, t: Optional[Bound] = None
) -> ResidualReport:
    """
    d of the exact transport against the summed expansion. orders at or past the
    termination certificate contribute blocks equal to d of a zero term, so the sum
    stops just before it.
    """
    series = phi_series(omega, flag=flag).require_exact()
    lhs = exterior_d(series.total())
    residual = lhs - dphi_expansion(omega, series.termination.order - 1)
    if t is not None:
        residual = residual.subst(T, t)
    return ResidualReport.from_form(
        "transport differential expansion", "dPhi = sum of signed simplex boundary groups", residual
    )
