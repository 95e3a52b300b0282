import random
from fractions import Fraction

import pytest

from chen_holonomy.ainfty.chains import (
    b_square_residual,
    collect,
    hochschild_b,
    hochschild_b_collected,
    merge_sign,
    slot_sign,
)
from chen_holonomy.ainfty.model import (
    ChainCompositionError,
    ContextMismatchError,
    FormalChainSum,
    TensorChain,
)
from chen_holonomy.ainfty.transformation import (
    ComposedTransformation,
    CylinderTransformation,
    HomotopyTransformation,
    ainfty_relation_residual,
    compose_transformations,
    gauge_chain,
    lambda_degree_check,
    lambda_eval,
    lambda_gauge_covariance_residual,
)
from chen_holonomy.cli.model import Profile, Scenario
from chen_holonomy.cli.scenario import generate_scenario, nilpotent_example
from chen_holonomy.exactnum.matrix import SparseMatrix
from chen_holonomy.exactnum.poly import MultiPoly
from chen_holonomy.forms.calculus import wedge
from chen_holonomy.forms.model import (
    DT,
    FormDomainError,
    HomForm,
    InhomogeneousFormError,
    PolyMap,
    dx,
)
from chen_holonomy.graded.model import Flag, GradedHom, GradedSpace
from chen_holonomy.locsys.generator import random_form
from chen_holonomy.locsys.holonomy import holonomy
from chen_holonomy.locsys.homotopy import hol_transformation, homotopy_holonomy
from chen_holonomy.locsys.model import GaugeRelationError, Superconnection

LINE = GradedSpace.concentrated(0, 1)
PAIR = GradedSpace.concentrated(0, 2)
NILPOTENT = GradedHom(PAIR, PAIR, 0, SparseMatrix((2, 2), {(1, 0): Fraction(1)}))
x = MultiPoly.variable("x1")


def trivial(space: GradedSpace = LINE, cylinder: bool = True) -> Superconnection:
    return Superconnection.trivial(space, 1, cylinder, Flag.single(space))


def scalar(coefficient, monomial=DT, cylinder=True) -> HomForm:
    return HomForm.from_hom(GradedHom.identity(LINE), 1, monomial, coefficient, cylinder)


def seeded_scenario(seed: int, n: int, m: int = 1, deg: int = 1) -> Scenario:
    return generate_scenario(seed, Profile(m=m, n=n, nu=4, deg=deg))


def seeded_chain(seed: int, n: int, m: int = 1, deg: int = 1) -> TensorChain:
    return seeded_scenario(seed, n, m, deg).tensor_chains()[0]


class TestSeededFamily:
    def test_gauges_are_not_all_trivial(self):
        scenarios = [seeded_scenario(seed, 2) for seed in range(8)]
        gauges = [gauge for scenario in scenarios for gauge in scenario.gauges]
        assert any(gauge.g != HomForm.identity(gauge.beta.space, 1) for gauge in gauges)
        systems = [system for scenario in scenarios for system in scenario.systems]
        assert any(1 in system.components() for system in systems)

    def test_plane_family_has_one_forms(self):
        scenarios = [seeded_scenario(seed, 2, m=2, deg=2) for seed in range(8)]
        systems = [system for scenario in scenarios for system in scenario.systems]
        assert any(1 in system.components() for system in systems)


class TestTensorChain:
    def test_system_count(self):
        with pytest.raises(ChainCompositionError):
            TensorChain((trivial(),), (scalar(1),))

    def test_zero_entry_needs_declared_degree(self):
        zero = HomForm.zero(1, LINE, LINE)
        with pytest.raises(InhomogeneousFormError):
            TensorChain((trivial(), trivial()), (zero,))
        assert TensorChain((trivial(), trivial()), (zero,), (1,)).degrees == (1,)

    def test_declared_degree_must_match(self):
        with pytest.raises(InhomogeneousFormError):
            TensorChain((trivial(), trivial()), (scalar(1),), (2,))

    def test_domains_must_agree(self):
        with pytest.raises(ContextMismatchError):
            TensorChain((trivial(), trivial(cylinder=False)), (scalar(1),))

    def test_entries_must_compose(self):
        plane = GradedSpace.concentrated(0, 2)
        with pytest.raises(ChainCompositionError):
            TensorChain((trivial(), trivial(plane)), (scalar(1),))

    def test_sub_and_merge(self):
        chain = TensorChain((trivial(),) * 3, (scalar(2), scalar(x, dx(1))))
        assert chain.sub(1, 2).xis == (scalar(x, dx(1)),)
        merged = chain.merged(1)
        assert merged.n == 1
        assert merged.degrees == (2,)
        assert merged.xis[0] == wedge(scalar(x, dx(1)), scalar(2))

    def test_formal_sums_carry_unit_signs(self):
        chain = TensorChain((trivial(), trivial()), (scalar(1),))
        with pytest.raises(ValueError):
            FormalChainSum(((2, chain),))


class TestBoundary:
    def test_signs(self):
        chain = TensorChain((trivial(),) * 3, (scalar(1), scalar(1)))
        assert slot_sign(chain, 0) == 1
        assert slot_sign(chain, 1) == 1
        assert merge_sign(chain, 1) == -1

    def test_constant_entry_has_no_boundary(self):
        chain = TensorChain((trivial(), trivial()), (scalar(5),))
        assert len(hochschild_b(chain)) == 0

    def test_collected_form_agrees(self):
        chain = seeded_chain(4, 2)
        assert collect(hochschild_b(chain)) == collect(hochschild_b_collected(chain))

    @pytest.mark.parametrize("seed", range(17))
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_b_squares_to_zero_on_flat_contexts(self, seed, n):
        assert b_square_residual(seeded_chain(seed, n)).passed

    def test_b_squares_to_zero_with_vanishing_connections(self):
        rng = random.Random(3)
        plane = GradedSpace.of({0: 1, 1: 1})
        xis = tuple(random_form(rng, plane, plane, 2, 1, 1) for _ in range(3))
        systems = (Superconnection.trivial(plane, 2),) * 4
        assert b_square_residual(TensorChain(systems, xis, (1, 1, 1))).passed


class TestLambda:
    def test_single_entry(self):
        chain = TensorChain((trivial(), trivial()), (scalar(3 * x),))
        assert lambda_eval(chain) == scalar(3 * x, dx(), cylinder=False)

    def test_two_constant_entries(self):
        chain = TensorChain((trivial(),) * 3, (scalar(2), scalar(5)))
        assert lambda_eval(chain) == scalar(5, dx(), cylinder=False)
        assert lambda_degree_check(chain).passed

    def test_empty_chain_is_holonomy(self):
        example = nilpotent_example()
        value = lambda_eval(TensorChain.empty(example.systems[0]))
        assert value == holonomy(example.systems[0])
        assert lambda_degree_check(TensorChain.empty(example.systems[0])).passed

    def test_needs_cylinder_chain(self):
        with pytest.raises(FormDomainError):
            lambda_eval(TensorChain.empty(trivial(cylinder=False)))

    @pytest.mark.parametrize("seed", range(4))
    def test_degree_on_seeded_chains(self, seed):
        assert lambda_degree_check(seeded_chain(seed, 2)).passed


class TestNaturality:
    def test_constant_entry(self):
        chain = TensorChain((trivial(), trivial()), (scalar(7),))
        assert ainfty_relation_residual(chain).passed

    @pytest.mark.parametrize("seed", range(10))
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_seeded_chains(self, seed, n):
        assert ainfty_relation_residual(seeded_chain(seed, n)).passed

    @pytest.mark.parametrize("seed", range(3))
    def test_uncollected_boundary_agrees(self, seed):
        assert ainfty_relation_residual(seeded_chain(seed, 2), collected=False).passed

    @pytest.mark.parametrize("seed", range(3))
    @pytest.mark.parametrize("n", [1, 2])
    def test_seeded_chains_on_plane(self, seed, n):
        assert ainfty_relation_residual(seeded_chain(seed, n, m=2, deg=2)).passed

    def test_nilpotent_example(self):
        for chain in nilpotent_example().tensor_chains():
            assert ainfty_relation_residual(chain, CylinderTransformation()).passed


class TestHomotopies:
    def test_contraction_of_nilpotent_system(self):
        example = nilpotent_example()
        contraction = example.homotopies[0]
        result = homotopy_holonomy(contraction, example.base_systems[0])
        identity = HomForm.identity(PAIR, 1, cylinder=False)
        assert result.phi == identity + HomForm.from_hom(NILPOTENT, 1, dx(), x, cylinder=False)
        assert result.report.passed

    @pytest.mark.parametrize("seed", range(6))
    @pytest.mark.parametrize("n", [1, 2])
    def test_relation_along_seeded_homotopies(self, seed, n):
        scenario = seeded_scenario(seed, n)
        chain = scenario.base_tensor_chains()[0]
        for h in scenario.homotopies:
            assert ainfty_relation_residual(chain, HomotopyTransformation(h)).passed

    def test_transformation_value(self):
        example = nilpotent_example()
        chain = example.base_tensor_chains()[0]
        h = example.homotopies[1]
        assert hol_transformation(h, chain) == HomotopyTransformation(h).evaluate(chain)

    def test_homotopy_needs_interval(self):
        with pytest.raises(FormDomainError):
            HomotopyTransformation(PolyMap.identity(1))


class TestComposition:
    def test_nilpotent_example(self):
        example = nilpotent_example()
        first, second = (HomotopyTransformation(h) for h in example.homotopies)
        composed = ComposedTransformation(first, second)
        for chain in example.base_tensor_chains():
            assert ainfty_relation_residual(chain, composed).passed

    @pytest.mark.parametrize("seed", range(10))
    def test_seeded(self, seed):
        scenario = seeded_scenario(seed, 2)
        first, second = (HomotopyTransformation(h) for h in scenario.homotopies)
        chain = scenario.base_tensor_chains()[0]
        assert ainfty_relation_residual(chain, ComposedTransformation(first, second)).passed

    def test_length_zero_is_product(self):
        example = nilpotent_example()
        first, second = (HomotopyTransformation(h) for h in example.homotopies)
        empty = TensorChain.empty(example.base_systems[0])
        expected = wedge(second.evaluate(empty), first.evaluate(empty))
        assert compose_transformations(first, second, empty) == expected

    def test_ends_must_meet(self):
        example = nilpotent_example()
        first, second = (HomotopyTransformation(h) for h in example.homotopies)
        with pytest.raises(ContextMismatchError):
            ComposedTransformation(second, first)


class TestGaugeCovariance:
    @pytest.mark.parametrize("seed", range(4))
    @pytest.mark.parametrize("n", [1, 2])
    def test_seeded(self, seed, n):
        scenario = seeded_scenario(seed, n)
        chain = scenario.tensor_chains()[0]
        betas = tuple(scenario.gauge_for(i).beta for i in range(n + 1))
        gauges = [scenario.gauge_for(i).g for i in range(n + 1)]
        rng = random.Random(seed)
        space = betas[0].space
        zetas = tuple(random_form(rng, space, space, 1, d, 1) for d in chain.degrees)
        beta_chain = TensorChain(betas, zetas, chain.degrees)
        assert lambda_gauge_covariance_residual(beta_chain, gauges).passed
        alpha_chain = gauge_chain(beta_chain, gauges)
        for actual, expected in zip(alpha_chain.systems, chain.systems):
            assert actual.alpha == expected.alpha

    def test_unrelated_chains(self):
        example = nilpotent_example()
        gauge = example.gauges[0]
        beta_chain = TensorChain.empty(gauge.beta)
        alpha_chain = TensorChain.empty(example.systems[0])
        with pytest.raises(GaugeRelationError):
            lambda_gauge_covariance_residual(beta_chain, [gauge.g], alpha_chain)

    def test_example_gauge(self):
        example = nilpotent_example()
        gauge = example.gauges[0]
        report = lambda_gauge_covariance_residual(
            TensorChain.empty(gauge.beta), [gauge.g], TensorChain.empty(example.systems[1])
        )
        assert report.passed
