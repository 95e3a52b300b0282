from __future__ import annotations

import logging
from fractions import Fraction
from typing import Optional, Union

from chen_holonomy.chen.series import phi_series
from chen_holonomy.exactnum.matrix import SparseMatrix, rational_inverse
from chen_holonomy.exactnum.model import NonInvertibleError
from chen_holonomy.exactnum.poly import MultiPoly
from chen_holonomy.forms.calculus import exterior_d, restrict_t, wedge, wedge_all
from chen_holonomy.forms.model import ONE, HomForm, T
from chen_holonomy.graded.model import Flag
from chen_holonomy.locsys.model import ResidualReport

LOGGER = logging.getLogger(__name__)

Bound = Union[MultiPoly, Fraction, int]


def constant_part(x: HomForm) -> SparseMatrix:
    """the constant term of the 0-form part, as a matrix of rationals"""
    return x.coefficient(ONE).map(lambda p: p.constant_term())


def invert_unipotent(x: HomForm) -> HomForm:
    """
    exact inverse of a degree-0 form x = C (1 + N) with C an invertible constant and
    N nilpotent, via 1 - N + N^2 - ... . the loop bound covers words mixing a
    nilpotent 0-form part with at most m + 1 form-degree-raising factors.
    """
    if x.total_degree() not in (None, 0):
        raise NonInvertibleError("only degree-0 forms are inverted")
    c_inverse = rational_inverse(constant_part(x))
    c_inverse_form = HomForm(
        x.m, x.target, x.source, {ONE: c_inverse.map(MultiPoly.coerce)}, x.cylinder
    )
    identity = HomForm.identity(x.source, x.m, x.cylinder)
    negated_nilpotent = identity - wedge(c_inverse_form, x)
    bound = (x.m + 3) * x.source.total_dim + x.m + 2
    series, power = identity, identity
    for _ in range(bound):
        power = wedge(power, negated_nilpotent)
        if power.is_zero():
            return wedge(series, c_inverse_form)
        series = series + power
    raise NonInvertibleError("the non-constant part is not nilpotent, no polynomial inverse")


def gauge_transform(eta: HomForm, g: HomForm) -> HomForm:
    """omega = g^-1 eta g - g^-1 dg"""
    g_inverse = invert_unipotent(g)
    return wedge_all([g_inverse, eta, g]) - wedge(g_inverse, exterior_d(g))


def gauge_transport(
    eta: HomForm, g: HomForm, flag: Flag, t: Optional[Bound] = None
) -> HomForm:
    """(i_t^* g)^-1 Phi^eta(t) i_0^* g"""
    transport = phi_series(eta, flag=flag).require_exact().total()
    g_at_t = restrict_t(g, MultiPoly.variable(T))
    result = wedge_all([invert_unipotent(g_at_t), transport, restrict_t(g, 0)])
    return result if t is None else result.subst(T, t)


def gauge_transport_residual(
    eta: HomForm, g: HomForm, flag_source: Flag, flag_target: Flag
) -> ResidualReport:
    """
    transport of omega = g^-1 eta g - g^-1 dg computed directly against the gauge
    formula; `flag_source` certifies omega, `flag_target` certifies eta
    """
    omega = gauge_transform(eta, g)
    direct = phi_series(omega, flag=flag_source).require_exact().total()
    residual = direct - gauge_transport(eta, g, flag_target)
    return ResidualReport.from_form(
        "gauge transport", "Phi^omega(t) = (i_t^* g)^-1 Phi^eta(t) i_0^* g", residual
    )
