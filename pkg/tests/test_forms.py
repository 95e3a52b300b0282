import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chen_holonomy.exactnum.matrix import SparseMatrix
from chen_holonomy.exactnum.poly import MultiPoly
from chen_holonomy.forms.calculus import (
    contract_dt,
    eval_at_point,
    exterior_d,
    pullback_map,
    restrict_t,
    wedge,
)
from chen_holonomy.forms.model import (
    DT,
    ONE,
    FormDomainError,
    HomForm,
    InhomogeneousFormError,
    NonComposableError,
    PolyMap,
    T,
    dx,
)
from chen_holonomy.graded.model import GradedHom, GradedSpace
from chen_holonomy.locsys.generator import random_form

V = GradedSpace.of({0: 1, 1: 1})
SHIFT = GradedHom(V, V, 1, SparseMatrix((2, 2), {(1, 0): Fraction(1)}))
IDENTITY = GradedHom.identity(V)

x1 = MultiPoly.variable("x1")
x2 = MultiPoly.variable("x2")
t = MultiPoly.variable(T)


def forms_of_degree(seed: int, degree: int, m: int = 2) -> HomForm:
    return random_form(random.Random(seed), V, V, m, degree, max_poly_degree=2)


class TestFormMonomial:
    def test_dx_anticommute(self):
        assert dx(1).wedge(dx(2)) == (1, dx(1, 2))
        assert dx(2).wedge(dx(1)) == (-1, dx(1, 2))

    def test_dt_is_stored_last(self):
        sign, monomial = DT.wedge(dx(1))
        assert sign == -1
        assert monomial.dx == (1,) and monomial.dt

    def test_repeated_generator_vanishes(self):
        assert dx(1).wedge(dx(1, 2)) == (0, None)
        assert DT.wedge(DT) == (0, None)

    def test_indices_must_ascend(self):
        with pytest.raises(ValueError):
            dx(2, 1)


class TestWedge:
    def test_odd_value_passing_odd_form_picks_up_sign(self):
        shift = HomForm.from_hom(SHIFT, 1)
        one_form = HomForm.from_hom(IDENTITY, 1, dx(1))
        assert wedge(shift, one_form) == -HomForm.from_hom(SHIFT, 1, dx(1))
        assert wedge(one_form, shift) == HomForm.from_hom(SHIFT, 1, dx(1))

    def test_values_must_compose(self):
        other = GradedSpace.concentrated(0, 3)
        into_other = HomForm.zero(1, V, other)
        with pytest.raises(NonComposableError):
            wedge(into_other, into_other)

    def test_domains_must_match(self):
        with pytest.raises(FormDomainError):
            wedge(HomForm.identity(V, 1), HomForm.identity(V, 1, cylinder=False))

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 10_000), st.integers(0, 2), st.integers(0, 2), st.integers(0, 2))
    def test_wedge_associates(self, seed, p, q, r):
        a, b, c = (forms_of_degree(seed + k, d) for k, d in enumerate((p, q, r)))
        assert wedge(wedge(a, b), c) == wedge(a, wedge(b, c))


class TestExteriorDerivative:
    def test_d_of_coefficient(self):
        omega = HomForm.from_hom(IDENTITY, 2, ONE, x1 * x2)
        expected = HomForm.from_hom(IDENTITY, 2, dx(1), x2) + HomForm.from_hom(
            IDENTITY, 2, dx(2), x1
        )
        assert exterior_d(omega) == expected

    def test_t_is_a_parameter_off_the_cylinder(self):
        omega = HomForm.from_hom(IDENTITY, 1, ONE, t * x1, cylinder=False)
        assert exterior_d(omega) == HomForm.from_hom(IDENTITY, 1, dx(1), t, cylinder=False)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 10_000), st.integers(0, 3))
    def test_d_squares_to_zero(self, seed, degree):
        assert exterior_d(exterior_d(forms_of_degree(seed, degree))).is_zero()

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 10_000), st.integers(0, 2), st.integers(0, 2))
    def test_graded_leibniz(self, seed, p, q):
        a, b = forms_of_degree(seed, p), forms_of_degree(seed + 1, q)
        sign = -1 if p % 2 else 1
        expected = wedge(exterior_d(a), b) + wedge(a, exterior_d(b)).scaled(sign)
        assert exterior_d(wedge(a, b)) == expected


class TestIntervalOperations:
    def test_contract_dt_sign(self):
        omega = HomForm.from_hom(SHIFT, 1, dx(1).wedge(DT)[1], x1)
        assert contract_dt(omega) == -HomForm.from_hom(SHIFT, 1, dx(1), x1)

    def test_restrict_drops_dt_and_leaves_cylinder(self):
        omega = HomForm.from_hom(IDENTITY, 1, dx(1), t) + HomForm.from_hom(IDENTITY, 1, DT, x1)
        restricted = restrict_t(omega, Fraction(1, 2))
        assert not restricted.cylinder
        assert restricted == HomForm.from_hom(
            IDENTITY, 1, dx(1), Fraction(1, 2), cylinder=False
        )

    def test_restrict_needs_cylinder(self):
        with pytest.raises(FormDomainError):
            restrict_t(HomForm.identity(V, 1, cylinder=False), 0)


class TestPullback:
    def test_along_linear_contraction(self):
        omega = HomForm.from_hom(IDENTITY, 1, dx(1), x1, cylinder=False)
        pulled = pullback_map(omega, PolyMap.linear_contraction((Fraction(0),)))
        expected = HomForm.from_hom(IDENTITY, 1, dx(1), t * t * x1) + HomForm.from_hom(
            IDENTITY, 1, DT, t * x1 * x1
        )
        assert pulled == expected

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 10_000), st.integers(0, 2))
    def test_pullback_commutes_with_d(self, seed, degree):
        omega = random_form(random.Random(seed), V, V, 2, degree, 2, cylinder=False)
        phi = PolyMap((x1 * x1 + x2, x1 - t), 2, cylinder=True)
        assert pullback_map(exterior_d(omega), phi) == exterior_d(pullback_map(omega, phi))

    def test_dimension_must_match(self):
        with pytest.raises(FormDomainError):
            pullback_map(HomForm.identity(V, 2, cylinder=False), PolyMap.identity(1))


class TestDegrees:
    def test_total_degree_adds_internal_degree(self):
        assert HomForm.from_hom(SHIFT, 1, dx(1)).total_degree() == 2
        assert HomForm.zero(1, V, V).total_degree() is None

    def test_inhomogeneous_form(self):
        mixed = HomForm.identity(V, 1) + HomForm.from_hom(SHIFT, 1)
        with pytest.raises(InhomogeneousFormError):
            mixed.total_degree()
        assert set(mixed.homogeneous_components()) == {0, 1}


class TestEvaluation:
    def test_eval_at_point(self):
        omega = HomForm.from_hom(SHIFT, 1, dx(1), x1 * t, cylinder=False)
        value = eval_at_point(omega, [2.0], t=0.5)
        np.testing.assert_allclose(value.coefficient(dx(1)), [[0.0, 0.0], [1.0, 0.0]])

    def test_dt_terms_must_be_removed_first(self):
        with pytest.raises(FormDomainError):
            eval_at_point(HomForm.from_hom(IDENTITY, 1, DT), [0.0], t=0.0)
