import asyncio
import json
from fractions import Fraction

import pytest
from dynaconf import Dynaconf

from chen_holonomy import main
from chen_holonomy.asynchronous.check_guard import CheckGuard
from chen_holonomy.cli.codec import decode_scenario, dump_scenario, encode_scenario, load_scenario
from chen_holonomy.cli.model import Mode, Profile, Scenario, ScenarioSchemaError, Suite
from chen_holonomy.cli.runner import SuiteRunner
from chen_holonomy.cli.scenario import generate_scenario, nilpotent_example
from chen_holonomy.exactnum.matrix import SparseMatrix
from chen_holonomy.exactnum.poly import MultiPoly
from chen_holonomy.forms.model import HomForm, dx
from chen_holonomy.graded.model import Flag, GradedHom, GradedSpace
from chen_holonomy.locsys.model import Regime, ResidualReport, Superconnection


def settings_for(tmp_path, **overrides) -> Dynaconf:
    values = {"report_dir": str(tmp_path / "reports"), "parallel_checks": True}
    values.update(overrides)
    return Dynaconf(**values)


def curved_scenario() -> Scenario:
    space = GradedSpace.concentrated(0, 2)
    nilpotent = GradedHom(space, space, 0, SparseMatrix((2, 2), {(1, 0): Fraction(1)}))
    x = MultiPoly.variable("x1")
    alpha = HomForm.from_hom(nilpotent, 2, dx(2), x)
    system = Superconnection(space, alpha, Flag.discrete(space, (1, 0)))
    return Scenario("curved", 2, systems=[system])


class TestSuite:
    def test_case_insensitive(self):
        assert Suite.from_str("APPENDIXA") == Suite.APPENDIXA
        assert Suite.from_str("lambda") == Suite.LAMBDA

    def test_unknown_suite(self):
        with pytest.raises(ValueError):
            Suite.from_str("lemma99")

    def test_all_expands_to_every_suite(self):
        expanded = Suite.ALL.expanded()
        assert Suite.ALL not in expanded
        assert len(expanded) == len(Suite) - 1
        assert Suite.MC.expanded() == [Suite.MC]


class TestProfile:
    def test_parse_subset(self):
        assert Profile.parse("n=2, deg=0") == Profile(m=1, n=2, nu=4, deg=0)
        assert Profile.parse("") == Profile()

    @pytest.mark.parametrize("text", ["m", "k=1", "n=two", "m=4", "nu=0", "deg=7"])
    def test_rejected(self, text):
        with pytest.raises(ValueError):
            Profile.parse(text)

    def test_round_trip_through_text(self):
        profile = Profile(m=2, n=3, nu=4, deg=2)
        assert Profile.parse(str(profile)) == profile


class TestGeneratedScenario:
    def test_reproducible(self):
        profile = Profile(m=2, n=2, nu=3, deg=2)
        assert dump_scenario(generate_scenario(5, profile)) == dump_scenario(
            generate_scenario(5, profile)
        )

    def test_seeds_differ(self):
        profile = Profile(n=2)
        assert dump_scenario(generate_scenario(1, profile)) != dump_scenario(
            generate_scenario(2, profile)
        )

    def test_two_layers_leave_gauges_trivial(self):
        for seed in range(4):
            scenario = generate_scenario(seed, Profile(n=1, nu=2))
            for gauge in scenario.gauges:
                assert gauge.g == HomForm.identity(gauge.beta.space, 1)
            for system in scenario.systems:
                assert set(system.components()) <= {0}

    def test_default_profile_moves_gauges(self):
        gauges = [
            gauge for seed in range(6) for gauge in generate_scenario(seed, Profile(n=1)).gauges
        ]
        assert any(gauge.g != HomForm.identity(gauge.beta.space, 1) for gauge in gauges)

    def test_trivial_profile_gives_vanishing_forms(self):
        scenario = generate_scenario(0, Profile.trivial())
        assert all(system.alpha.is_zero() for system in scenario.systems)
        assert all(system.alpha.is_zero() for system in scenario.base_systems)
        for gauge in scenario.gauges:
            assert gauge.g == HomForm.identity(gauge.beta.space, 1)
        assert scenario.tensor_chains()[0].n == 0


class TestCodec:
    def test_round_trip(self):
        for scenario in (nilpotent_example(), generate_scenario(3, Profile(m=2, n=2))):
            decoded = decode_scenario(json.loads(dump_scenario(scenario)))
            assert encode_scenario(decoded) == encode_scenario(scenario)
            assert decoded.homotopies == scenario.homotopies

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "example.json"
        path.write_text(dump_scenario(nilpotent_example()))
        assert load_scenario(path).name == "nilpotent-example"

    def test_error_names_location(self):
        data = encode_scenario(nilpotent_example())
        del data["systems"][1]["space"]
        with pytest.raises(ScenarioSchemaError, match=r"systems\[1\]"):
            decode_scenario(data)

    def test_chain_with_missing_system(self):
        data = encode_scenario(nilpotent_example())
        data["systems"] = data["systems"][:1]
        with pytest.raises(ScenarioSchemaError):
            decode_scenario(data)

    def test_not_an_object(self):
        with pytest.raises(ScenarioSchemaError):
            decode_scenario([1, 2])

    def test_unreadable_file(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ScenarioSchemaError):
            load_scenario(path)
        with pytest.raises(ScenarioSchemaError):
            load_scenario(tmp_path / "missing.json")


class TestSuiteRunner:
    @pytest.mark.parametrize("suite", [Suite.LEMMA41, Suite.MC, Suite.LAMBDA, Suite.POINCARE])
    def test_nilpotent_example_passes(self, tmp_path, suite):
        report = SuiteRunner(settings_for(tmp_path)).run_suite(suite, nilpotent_example())
        assert report.results
        assert report.passed

    def test_results_are_sorted(self, tmp_path):
        report = SuiteRunner(settings_for(tmp_path)).run_suite(Suite.ALL, nilpotent_example())
        names = [result.name for result in report.results]
        assert names == sorted(names)
        assert report.passed

    def test_generated_naturality(self, tmp_path):
        runner = SuiteRunner(settings_for(tmp_path, parallel_checks=False))
        report = runner.run_suite(Suite.APPENDIXA, generate_scenario(7, Profile(n=2)))
        assert report.passed

    def test_float_mode_reports_tolerance(self, tmp_path):
        runner = SuiteRunner(settings_for(tmp_path), mode=Mode.FLOAT, tolerance=1e-6)
        report = runner.run_suite(Suite.PROP32ODE, nilpotent_example())
        assert report.passed
        assert any(r.report.regime == Regime.FLOAT for r in report.results)

    def test_curved_system_fails(self, tmp_path):
        report = SuiteRunner(settings_for(tmp_path)).run_suite(Suite.MC, curved_scenario())
        assert not report.passed

    def test_report_written_under_report_dir(self, tmp_path):
        runner = SuiteRunner(settings_for(tmp_path))
        report = runner.run_suite(Suite.LEMMA41, nilpotent_example())
        path = runner.write_report(report)
        assert path == tmp_path / "reports" / "lemma41-nilpotent-example.json"
        written = json.loads(path.read_text())
        assert written["passed"] is True
        assert written["suite"] == "lemma41"


class TestVerify:
    def test_passing_suite(self, tmp_path, capsys):
        report = tmp_path / "out.json"
        argv = ["--suite", "lemma41", "--scenario", "nilpotent-example", "--report", str(report)]
        assert main.verify(argv, settings_for(tmp_path)) == main.EXIT_PASS
        assert "PASS" in capsys.readouterr().out
        assert json.loads(report.read_text())["scenario"] == "nilpotent-example"

    def test_seeded_run(self, tmp_path):
        argv = ["--suite", "chen", "--seed", "0", "--profile", "n=1,deg=1"]
        assert main.verify(argv, settings_for(tmp_path)) == main.EXIT_PASS
        assert list((tmp_path / "reports").iterdir())

    def test_failing_suite(self, tmp_path):
        path = tmp_path / "curved.json"
        path.write_text(dump_scenario(curved_scenario()))
        argv = ["--suite", "mc", "--scenario", str(path)]
        assert main.verify(argv, settings_for(tmp_path)) == main.EXIT_FAIL

    @pytest.mark.parametrize(
        "argv",
        [
            ["--suite", "nope", "--scenario", "nilpotent-example"],
            ["--suite", "mc", "--seed", "1", "--profile", "m=9"],
            ["--suite", "mc", "--seed", "1", "--scenario", "nilpotent-example"],
            ["--suite", "mc"],
            ["--scenario", "nilpotent-example"],
            ["--suite", "mc", "--scenario", "nilpotent-example", "--mode", "approximate"],
        ],
    )
    def test_input_errors(self, tmp_path, argv):
        assert main.verify(argv, settings_for(tmp_path)) == main.EXIT_INPUT_ERROR

    def test_missing_scenario_file(self, tmp_path):
        argv = ["--suite", "mc", "--scenario", str(tmp_path / "absent.json")]
        assert main.verify(argv, settings_for(tmp_path)) == main.EXIT_INPUT_ERROR


class TestCheckGuard:
    def test_exceptions_become_failed_results(self):
        def fine() -> ResidualReport:
            return ResidualReport("fine", "0 = 0", True, Fraction(0))

        def broken() -> ResidualReport:
            raise ArithmeticError("division by zero in a coefficient")

        guard = CheckGuard()
        results = asyncio.run(guard.run_all([("fine", fine), ("broken", broken)]))
        assert [r.passed for r in results] == [True, False]
        assert results[1].error == "ArithmeticError: division by zero in a coefficient"
        assert guard.raised == 1

    def test_sequential_keeps_order(self):
        def report(name: str):
            return lambda: ResidualReport(name, "-", True, Fraction(0))

        checks = [(name, report(name)) for name in ("b", "a", "c")]
        results = asyncio.run(CheckGuard().run_all(checks, parallel=False))
        assert [r.name for r in results] == ["b", "a", "c"]
