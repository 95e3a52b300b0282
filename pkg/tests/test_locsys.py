import random
from fractions import Fraction

import pytest

from chen_holonomy.chen.gauge import gauge_transform
from chen_holonomy.exactnum.matrix import SparseMatrix
from chen_holonomy.exactnum.poly import MultiPoly
from chen_holonomy.forms.calculus import restrict_t, wedge
from chen_holonomy.forms.model import DT, HomForm, InhomogeneousFormError, PolyMap, T, dx
from chen_holonomy.graded.model import Flag, GradedHom, GradedSpace
from chen_holonomy.locsys.flatness import (
    flatness_report,
    hom_differential,
    gauge_transform_superconnection,
    hom_differential_square_residual,
    is_flat,
    mc_component_residuals,
    is_morphism,
    pullback_superconnection,
    restrict_superconnection,
)
from chen_holonomy.locsys.generator import (
    generate_flat,
    lowering_positions,
    random_form,
    random_lowering_hom,
    random_poly,
)
from chen_holonomy.locsys.holonomy import (
    constant_system,
    gauge_compat_check,
    holonomy,
    holonomy_iso,
    poincare_trivialization,
)
from chen_holonomy.locsys.homotopy import homotopy_holonomy
from chen_holonomy.locsys.model import (
    GaugeRelationError,
    NonFlatError,
    ResidualReport,
    Superconnection,
    combine_reports,
)

V = GradedSpace.concentrated(0, 2)
FLAG = Flag.discrete(V, (1, 0))
N = GradedHom(V, V, 0, SparseMatrix((2, 2), {(1, 0): Fraction(1)}))

x = MultiPoly.variable("x1")
t = MultiPoly.variable(T)

GRADED = GradedSpace.of({0: 2, 1: 1})
GRADED_FLAG = Flag.discrete(GRADED, (2, 0, 1))


def nilpotent(coefficient=1, monomial=DT, m=1, cylinder=True) -> HomForm:
    return HomForm.from_hom(N, m, monomial, coefficient, cylinder=cylinder)


def system(alpha: HomForm) -> Superconnection:
    return Superconnection(V, alpha, FLAG)


class TestSuperconnection:
    def test_alpha_must_have_degree_one(self):
        with pytest.raises(InhomogeneousFormError):
            Superconnection(V, HomForm.from_hom(N, 1), FLAG)

    def test_alpha_must_be_endomorphism(self):
        with pytest.raises(ValueError):
            Superconnection(V, HomForm.zero(1, V, GRADED), FLAG)

    def test_components_by_form_degree(self):
        alpha = nilpotent(t, dx(1)) + nilpotent(x, DT)
        assert set(system(alpha).components()) == {1}


class TestFlatness:
    def test_zero_is_flat(self):
        report = flatness_report(Superconnection.trivial(V, 2))
        assert report.passed
        assert report.magnitude() == "0 exact"

    def test_twisted_nilpotent_is_flat(self):
        assert is_flat(system(nilpotent(t, dx(1)) + nilpotent(x, DT)))

    def test_curved_system(self):
        curved = system(nilpotent(x, dx(2), m=2))
        report = flatness_report(curved)
        assert not report.passed
        assert report.max_abs == 1
        assert report.witness is not None

    def test_curvature_sits_in_two_forms(self):
        components = mc_component_residuals(system(nilpotent(x, dx(2), m=2)))
        assert set(components) == {2}
        assert components[2] == nilpotent(1, dx(1, 2), m=2)

    @pytest.mark.parametrize("seed", range(100))
    def test_generated_systems_are_flat_and_lowering(self, seed):
        generated = generate_flat(seed, GRADED, GRADED_FLAG, 2, 2)
        assert is_flat(generated.system)
        assert generated.system.flag == GRADED_FLAG

    def test_generator_is_reproducible(self):
        first = generate_flat(11, GRADED, GRADED_FLAG, 1, 2)
        second = generate_flat(11, GRADED, GRADED_FLAG, 1, 2)
        assert first.system.alpha == second.system.alpha
        assert first.g == second.g

    @pytest.mark.parametrize("seed", range(10))
    def test_generated_alpha_is_gauge_of_constant(self, seed):
        generated = generate_flat(seed, GRADED, GRADED_FLAG, 1, 2)
        beta = HomForm.from_hom(generated.alpha_c, 1)
        assert generated.system.alpha == gauge_transform(beta, generated.g)

    def test_unipotent_in_t_gives_minus_n_dt(self):
        g = HomForm.identity(V, 1) + nilpotent(t, dx())
        alpha = gauge_transform(HomForm.zero(1, V, V), g)
        assert alpha == -nilpotent()
        assert is_flat(system(alpha))

    def test_lowering_positions_respect_flag(self):
        positions = lowering_positions(GRADED, GRADED, 1, GRADED_FLAG)
        assert positions == [(2, 0), (2, 1)]
        hom = random_lowering_hom(random.Random(0), GRADED_FLAG, 1, density=1.0)
        assert list(hom.matrix.entries())[0][:2] == (2, 0)


class TestTwistedDifferential:
    @pytest.mark.parametrize("seed", range(20))
    def test_squares_to_zero_between_flat_systems(self, seed):
        source = generate_flat(seed, GRADED, GRADED_FLAG, 1, 1).system
        target = generate_flat(seed + 100, GRADED, GRADED_FLAG, 1, 1).system
        omega = random_form(random.Random(seed), GRADED, GRADED, 1, 1, 1)
        assert hom_differential_square_residual(omega, source, target).passed

    def test_identity_is_closed_for_equal_systems(self):
        flat = system(nilpotent(t, dx(1)) + nilpotent(x, DT))
        assert hom_differential(HomForm.identity(V, 1), flat, flat).is_zero()


class TestMorphism:
    def test_identity_plus_xn_intertwines(self):
        source = Superconnection.trivial(V, 1, cylinder=False, flag=FLAG)
        target = Superconnection(V, nilpotent(1, dx(1), cylinder=False), FLAG)
        phi = HomForm.identity(V, 1, cylinder=False) + nilpotent(x, dx(), cylinder=False)
        assert is_morphism(phi, source, target).passed
        assert not is_morphism(phi, source, source).passed

    def test_non_closed_map_rejected(self):
        trivial = Superconnection.trivial(V, 1, cylinder=False, flag=FLAG)
        report = is_morphism(nilpotent(x, dx(), cylinder=False), trivial, trivial)
        assert not report.passed
        assert report.max_abs == 1

    def test_identity_on_equal_systems(self):
        flat = system(nilpotent(t, dx(1)) + nilpotent(x, DT))
        assert is_morphism(HomForm.identity(V, 1), flat, flat).passed

    def test_degree_must_be_zero(self):
        trivial = Superconnection.trivial(V, 1, cylinder=False, flag=FLAG)
        with pytest.raises(ValueError):
            is_morphism(nilpotent(1, dx(1), cylinder=False), trivial, trivial)


class TestHolonomy:
    def test_twisted_nilpotent(self):
        flat = system(nilpotent(t, dx(1)) + nilpotent(x, DT))
        result = holonomy_iso(flat)
        identity = HomForm.identity(V, 1, cylinder=False)
        assert result.phi == identity + nilpotent(x, dx(), cylinder=False)
        assert result.phi_inverse == identity - nilpotent(x, dx(), cylinder=False)
        assert result.report.passed

    def test_constant_nilpotent_generator(self):
        flat = system(nilpotent())
        assert holonomy(flat) == HomForm.identity(V, 1, cylinder=False) + nilpotent(
            1, dx(), cylinder=False
        )

    def test_curved_system_refused(self):
        with pytest.raises(NonFlatError):
            holonomy_iso(system(nilpotent(x, dx(2), m=2)))

    def test_needs_cylinder(self):
        with pytest.raises(ValueError):
            holonomy(system(nilpotent(1, dx(1), cylinder=False)))

    @pytest.mark.parametrize("seed", range(50))
    def test_seeded_morphism_and_inverse(self, seed):
        flat = generate_flat(seed, GRADED, GRADED_FLAG, 2, 2).system
        result = holonomy_iso(flat)
        assert result.report.passed
        report = is_morphism(
            result.phi,
            restrict_superconnection(flat, 0),
            restrict_superconnection(flat, 1),
        )
        assert report.passed


class TestGaugeCompatibility:
    def test_pure_gauge(self):
        g = HomForm.identity(V, 1) + nilpotent(t, dx())
        trivial = Superconnection.trivial(V, 1, flag=FLAG)
        assert gauge_compat_check(system(-nilpotent()), trivial, g).passed

    @pytest.mark.parametrize("seed", range(50))
    def test_seeded(self, seed):
        generated = generate_flat(seed, GRADED, GRADED_FLAG, 1, 2)
        beta = Superconnection(GRADED, HomForm.from_hom(generated.alpha_c, 1), GRADED_FLAG)
        assert gauge_compat_check(generated.system, beta, generated.g).passed

    def test_transformed_superconnection(self):
        g = HomForm.identity(V, 1) + nilpotent(t, dx())
        trivial = Superconnection.trivial(V, 1, flag=FLAG)
        assert gauge_transform_superconnection(trivial, g, FLAG).alpha == -nilpotent()

    def test_unrelated_systems(self):
        g = HomForm.identity(V, 1) + nilpotent(t, dx())
        trivial = Superconnection.trivial(V, 1, flag=FLAG)
        with pytest.raises(GaugeRelationError):
            gauge_compat_check(system(nilpotent()), trivial, g)


class TestPoincare:
    def test_nilpotent_one_form(self):
        base = Superconnection(V, nilpotent(1, dx(1), cylinder=False), FLAG)
        result = poincare_trivialization(base, (Fraction(0),))
        identity = HomForm.identity(V, 1, cylinder=False)
        assert result.psi == identity + nilpotent(x, dx(), cylinder=False)
        assert result.constant.alpha.is_zero()
        assert result.report.passed

    def test_zero_gives_identity(self):
        base = Superconnection.trivial(V, 2, cylinder=False, flag=FLAG)
        result = poincare_trivialization(base, (Fraction(1), Fraction(-2)))
        assert result.psi == HomForm.identity(V, 2, cylinder=False)

    def test_constant_part_survives(self):
        space = GradedSpace.of({0: 1, 1: 1})
        shift = GradedHom(space, space, 1, SparseMatrix((2, 2), {(1, 0): Fraction(2)}))
        alpha = HomForm.from_hom(shift, 1, cylinder=False)
        base = Superconnection(space, alpha, Flag.discrete(space, (1, 0)))
        result = poincare_trivialization(base, (Fraction(3),))
        assert result.psi == HomForm.identity(space, 1, cylinder=False)
        assert constant_system(base, (Fraction(3),)).alpha == alpha
        assert result.report.passed

    @pytest.mark.parametrize("seed", range(20))
    def test_seeded(self, seed):
        base = generate_flat(seed, GRADED, GRADED_FLAG, 2, 2, cylinder=False).system
        point = (Fraction(1, 2), Fraction(-1))
        assert poincare_trivialization(base, point).report.passed

    def test_point_dimension(self):
        base = Superconnection(V, nilpotent(1, dx(1), cylinder=False), FLAG)
        with pytest.raises(ValueError):
            poincare_trivialization(base, (Fraction(0), Fraction(0)))


class TestHomotopyHolonomy:
    def test_contraction_matches_poincare(self):
        base = Superconnection(V, nilpotent(1, dx(1), cylinder=False), FLAG)
        contraction = PolyMap.linear_contraction((Fraction(0),))
        result = homotopy_holonomy(contraction, base)
        assert result.phi == poincare_trivialization(base, (Fraction(0),)).psi

    def test_pullback_keeps_flatness(self):
        base = generate_flat(3, GRADED, GRADED_FLAG, 1, 2, cylinder=False).system
        bend = PolyMap((x + t * x * x,), 1, cylinder=True)
        pulled = pullback_superconnection(base, bend)
        assert pulled.cylinder
        assert is_flat(pulled)
        assert restrict_t(pulled.alpha, 0) == base.alpha

    @pytest.mark.parametrize("seed", range(10))
    def test_pullback_along_parabola(self, seed):
        base = generate_flat(seed, GRADED, GRADED_FLAG, 2, 1, cylinder=False).system
        pulled = pullback_superconnection(base, PolyMap((x, x * x), 1))
        assert pulled.m == 1
        assert is_flat(pulled)

    @pytest.mark.parametrize("seed", range(10))
    def test_pullback_along_random_homotopy(self, seed):
        rng = random.Random(seed)
        base = generate_flat(seed, GRADED, GRADED_FLAG, 2, 2, cylinder=False).system
        components = tuple(random_poly(rng, ("x1", "x2", T), 2) for _ in range(2))
        pulled = pullback_superconnection(base, PolyMap(components, 2, cylinder=True))
        assert pulled.cylinder
        assert is_flat(pulled)

    def test_constant_map_keeps_only_zero_forms(self):
        base = generate_flat(5, GRADED, GRADED_FLAG, 2, 2, cylinder=False).system
        point = PolyMap.constant((Fraction(1, 2), Fraction(-1)), 1)
        pulled = pullback_superconnection(base, point)
        assert set(pulled.components()) <= {0}
        assert is_flat(pulled)


class TestReports:
    def test_combined_report_keeps_worst_witness(self):
        curved = flatness_report(system(nilpotent(x, dx(2), m=2)))
        flat = flatness_report(Superconnection.trivial(V, 1))
        combined = combine_reports("both", "a and b", [flat, curved])
        assert not combined.passed
        assert combined.witness.startswith("maurer-cartan")

    def test_float_report_uses_tolerance(self):
        assert ResidualReport.from_float("ode", "rk4", 1e-8, 1e-6).passed
        assert not ResidualReport.from_float("ode", "rk4", 1e-3, 1e-6).passed

    def test_wedge_of_nilpotents_vanishes(self):
        assert wedge(nilpotent(), nilpotent(x)).is_zero()
