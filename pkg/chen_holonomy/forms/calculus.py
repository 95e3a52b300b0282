from __future__ import annotations

import logging
from fractions import Fraction
from typing import Optional, Sequence, Union

from chen_holonomy.exactnum.matrix import SparseMatrix
from chen_holonomy.exactnum.poly import MultiPoly
from chen_holonomy.forms.model import (
    DT,
    ONE,
    ExteriorValue,
    FormDomainError,
    FormMonomial,
    HomForm,
    NonComposableError,
    PolyMap,
    T,
    chart_variable,
    chart_variables,
)
from chen_holonomy.graded.model import DirectSum, GradedSpace

LOGGER = logging.getLogger(__name__)

Bound = Union[MultiPoly, Fraction, int]
ScalarForm = dict[FormMonomial, MultiPoly]


def parity_twist(matrix: SparseMatrix, target: GradedSpace, source: GradedSpace) -> SparseMatrix:
    """scales entry (r, c) by (-1)^(deg r - deg c), the sign picked up passing an odd form"""
    rows, cols = target.basis_degrees, source.basis_degrees
    return matrix.map_indexed(
        lambda r, c, value: -value if (rows[r] - cols[c]) % 2 else value
    )


def wedge(omega: HomForm, eta: HomForm) -> HomForm:
    """
    (sigma (x) A) ^ (tau (x) B) = (-1)^(|A| |tau|) (sigma ^ tau) (x) AB, where |A| is
    the internal degree of A and |tau| the form degree of tau
    """
    if omega.source != eta.target:
        raise NonComposableError(f"cannot compose {eta.target} -> ... with {omega.source}")
    if (omega.m, omega.cylinder) != (eta.m, eta.cylinder):
        raise FormDomainError("wedge of forms on different domains")
    twisted: dict[FormMonomial, SparseMatrix] = {}
    terms: dict[FormMonomial, SparseMatrix] = {}
    for sigma, a in omega.terms.items():
        for tau, b in eta.terms.items():
            sign, monomial = sigma.wedge(tau)
            if not sign:
                continue
            if tau.degree % 2:
                if sigma not in twisted:
                    twisted[sigma] = parity_twist(a, omega.target, omega.source)
                left = twisted[sigma]
            else:
                left = a
            product = left @ b
            if sign < 0:
                product = -product
            terms[monomial] = terms[monomial] + product if monomial in terms else product
    return HomForm._make(omega, terms, source=eta.source, target=omega.target)


def wedge_all(forms: Sequence[HomForm]) -> HomForm:
    result = forms[0]
    for form in forms[1:]:
        result = wedge(result, form)
    return result


def differentiated_variables(omega: HomForm) -> list[tuple[FormMonomial, str]]:
    pairs = [(FormMonomial((i,)), chart_variable(i)) for i in range(1, omega.m + 1)]
    if omega.cylinder:
        pairs.append((DT, T))
    return pairs


def exterior_d(omega: HomForm) -> HomForm:
    """
    d acts on coefficients only. on a form over R^m a coefficient may still mention
    t as a parameter; only the cylinder coordinate t is differentiated.
    """
    terms: dict[FormMonomial, SparseMatrix] = {}
    for sigma, a in omega.terms.items():
        for generator, variable in differentiated_variables(omega):
            sign, monomial = generator.wedge(sigma)
            if not sign:
                continue
            derivative = a.map(lambda p: p.diff(variable))
            if derivative.is_zero():
                continue
            if sign < 0:
                derivative = -derivative
            terms[monomial] = terms[monomial] + derivative if monomial in terms else derivative
    return HomForm._make(omega, terms)


def contract_dt(omega: HomForm) -> HomForm:
    terms = {}
    for sigma, a in omega.terms.items():
        if sigma.dt:
            terms[sigma.without_dt()] = -a if len(sigma.dx) % 2 else a
    return HomForm._make(omega, terms)


def restrict_t(omega: HomForm, s: Bound) -> HomForm:
    """pullback along the inclusion at height s; the result lives on R^m"""
    if not omega.cylinder:
        raise FormDomainError("restriction to a height needs a form on R^m x [0,1]")
    terms = {
        sigma: a.map(lambda p: p.subst(T, s))
        for sigma, a in omega.terms.items()
        if not sigma.dt
    }
    return HomForm._make(omega, terms, cylinder=False)


def integrate_coefficients(omega: HomForm, variable: str, lower: Bound, upper: Bound) -> HomForm:
    return omega.map_coefficients(lambda p: p.integrate(variable, lower, upper))


def _scalar_wedge(a: ScalarForm, b: ScalarForm) -> ScalarForm:
    result: ScalarForm = {}
    for sigma, p in a.items():
        for tau, q in b.items():
            sign, monomial = sigma.wedge(tau)
            if not sign:
                continue
            product = p * q if sign > 0 else -(p * q)
            result[monomial] = result[monomial] + product if monomial in result else product
    return {k: v for k, v in result.items() if v}


def pullback_map(omega: HomForm, phi: PolyMap) -> HomForm:
    """
    substitutes x_i := phi_i and dx_i := sum_j (d phi_i / d u_j) du_j. a cylinder form
    is pulled back with t passed through; a form on R^p pulled back along a homotopy
    becomes a cylinder form.
    """
    if phi.target_dim != omega.m:
        raise FormDomainError(f"map into R^{phi.target_dim} cannot pull back a form on R^{omega.m}")
    if omega.cylinder and phi.cylinder:
        raise FormDomainError("cannot pull a cylinder form back along a homotopy")
    cylinder = omega.cylinder or phi.cylinder
    substitution = {
        chart_variable(i): component for i, component in enumerate(phi.components, start=1)
    }
    images: dict[int, ScalarForm] = {}
    for i, component in enumerate(phi.components, start=1):
        image: ScalarForm = {}
        for j, variable in enumerate(chart_variables(phi.domain_dim), start=1):
            partial = component.diff(variable)
            if partial:
                image[FormMonomial((j,))] = partial
        if phi.cylinder:
            partial = component.diff(T)
            if partial:
                image[DT] = partial
        images[i] = image
    dt_image: ScalarForm = {DT: MultiPoly.one()}

    terms: dict[FormMonomial, SparseMatrix] = {}
    for sigma, a in omega.terms.items():
        image = {ONE: MultiPoly.one()}
        for i in sigma.dx:
            image = _scalar_wedge(image, images[i])
        if sigma.dt:
            image = _scalar_wedge(image, dt_image)
        if not image:
            continue
        composed = a.map(lambda p: p.compose(substitution))
        for monomial, coefficient in image.items():
            piece = composed.scaled(coefficient)
            terms[monomial] = terms[monomial] + piece if monomial in terms else piece
    return HomForm._make(omega, terms, cylinder=cylinder, m=phi.domain_dim)


def eval_at_point(omega: HomForm, x: Sequence[float], t: Optional[float] = None) -> ExteriorValue:
    if len(x) != omega.m:
        raise FormDomainError(f"point {list(x)} is not in R^{omega.m}")
    if any(sigma.dt for sigma in omega.terms):
        raise FormDomainError("contract or restrict dt terms before evaluating at a point")
    point = {chart_variable(i): float(v) for i, v in enumerate(x, start=1)}
    if t is not None:
        point[T] = float(t)
    coefficients = {
        sigma: a.to_array(lambda p: p.eval_float(point)) for sigma, a in omega.terms.items()
    }
    return ExteriorValue(omega.target.basis_degrees, omega.source.basis_degrees, coefficients)


def block_extract_form(omega: HomForm, summed: DirectSum, row: int, col: int) -> HomForm:
    if omega.source != summed.space or omega.target != summed.space:
        raise NonComposableError("form is not an endomorphism of this direct sum")
    rows, cols = summed.block_indices(row), summed.block_indices(col)
    terms = {sigma: a.submatrix(rows, cols) for sigma, a in omega.terms.items()}
    return HomForm._make(
        omega, terms, source=summed.summands[col], target=summed.summands[row]
    )


def block_embed_form(omega: HomForm, summed: DirectSum, row: int, col: int) -> HomForm:
    if omega.source != summed.summands[col] or omega.target != summed.summands[row]:
        raise NonComposableError(f"form does not fit block ({row}, {col})")
    size = summed.space.total_dim
    rows, cols = summed.block_indices(row), summed.block_indices(col)
    terms = {sigma: a.embedded((size, size), rows, cols) for sigma, a in omega.terms.items()}
    return HomForm._make(omega, terms, source=summed.space, target=summed.space)
