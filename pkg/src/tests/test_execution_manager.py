"""Testes dos relatórios e faixas do ExecutionManager."""

import pytest

from src.exceptions import SchemaError
from src.execution_manager import CompareReport
from src.execution_manager import ExecutionManager
from src.execution_manager import LimitCheck
from src.execution_manager import LimitsReport
from src.execution_manager import SweepRange
from src.evaluators import create_evaluator
from src.fock_oracle import TruncationPolicy
from src.models import PhononKind
from src.models import PhononPrep
from src.models import TimeGrid
from src.tests.factories import make_config
from src.tests.factories import make_mode
from src.utils.parallel import ordered_map
from src.utils.parallel import resolve_threads


class TestSweepRange:
    def test_parse_and_values(self):
        sweep = SweepRange.parse("0.5:2.5:5")
        assert sweep.values().tolist() == [0.5, 1.0, 1.5, 2.0, 2.5]
        assert SweepRange.parse("3:7:1").values().tolist() == [3.0]

    @pytest.mark.parametrize("text", ["1:2", "a:2:3", "2:1:3", "1:2:0", "1:inf:2"])
    def test_invalid_ranges(self, text):
        with pytest.raises(SchemaError):
            SweepRange.parse(text)


class TestReports:
    def _report(self, **errors):
        return CompareReport(
            kind=PhononKind.THERMAL,
            times=[0.0, 1.0],
            errors={k: [0.0, v] for k, v in errors.items()},
            max_errors=errors,
            verdict="half",
            n_max=[40],
        )

    def test_compare_exit_codes(self):
        assert self._report(paper=1e-3, half=1e-12).exit_code == 0
        assert self._report(paper=1e-3, half=1e-6).exit_code == 4

    def test_compare_render_layout(self):
        text = self._report(paper=1e-3, half=1e-12).render()
        header, table = text.split("\n\n")
        assert "coth_variant_matching_oracle: half" in header
        assert header.splitlines()[-1] == "status: pass"
        assert table.splitlines()[0] == "t,error_paper,error_half"

    def test_limits_report(self):
        ok = LimitCheck(name="a", passed=True, distances=[1.0, 0.1])
        bad = LimitCheck(name="b", passed=False)
        assert LimitsReport(checks=[ok]).exit_code == 0
        report = LimitsReport(checks=[ok, bad])
        assert report.exit_code == 5
        lines = report.render().splitlines()
        assert lines[0].startswith("a: pass distances=[1.000000e+00,1.000000e-01]")
        assert lines[-1] == "status: fail"


class TestLimitChecks:
    def test_thermal_bath_limits(self):
        config = make_config(
            [make_mode(omega=0.2, big_omega=1.0), make_mode(omega0=0.7, omega=0.1, big_omega=0.6)],
            PhononPrep.thermal(0.8),
        )
        manager = ExecutionManager()
        grid = TimeGrid(t_end=6.0, points=40)
        checks = [
            manager._phonon_free_check(config, grid),
            manager._large_omega_check(config, grid),
            manager._low_temperature_check(config, grid),
        ]
        assert all(check.passed for check in checks)
        assert checks[2].distances[0] < 1e-8

    def test_low_temperature_skips_phonon_free_modes(self):
        config = make_config([make_mode(omega=0.0, big_omega=0.0), make_mode()])
        check = ExecutionManager()._low_temperature_check(config, TimeGrid(t_end=1.0, points=3))
        assert check.passed
        assert check.detail.startswith("skipped")


class TestThreads:
    def test_resolution_order(self, monkeypatch):
        monkeypatch.delenv("DEPHASIM_THREADS", raising=False)
        assert resolve_threads() == 1
        monkeypatch.setenv("DEPHASIM_THREADS", "3")
        assert resolve_threads() == 3
        assert resolve_threads(2) == 2

    @pytest.mark.parametrize("raw", ["0", "many"])
    def test_invalid_env(self, monkeypatch, raw):
        monkeypatch.setenv("DEPHASIM_THREADS", raw)
        with pytest.raises(SchemaError):
            resolve_threads()

    def test_ordered_map_keeps_input_order(self):
        items = list(range(50))
        assert ordered_map(lambda x: x * x, items, threads=4) == [x * x for x in items]


class TestEvaluatorDescriptions:
    def test_plain_evaluators_use_their_name(self):
        assert create_evaluator("coherent").describe() == "coherent"
        assert create_evaluator("spin-only").describe() == "spin-only"

    def test_thermal_description_names_the_variant(self):
        assert create_evaluator("thermal-paper").describe().startswith("thermal-paper (")

    def test_oracle_description_reports_sizing(self):
        forced = create_evaluator("oracle", TruncationPolicy(n_max=40), threads=2)
        assert forced.describe() == "oracle (n_max=40, threads=2)"
        adaptive = create_evaluator("oracle", TruncationPolicy(ceiling=256, target=1e-9))
        assert adaptive.describe() == "oracle (ceiling=256, target=1e-09, threads=1)"

    def test_evaluation_log_uses_description(self, caplog, collector, two_mode_config):
        manager = ExecutionManager(collector=collector)
        evaluator = create_evaluator("oracle", TruncationPolicy(n_max=40))
        with caplog.at_level("INFO", logger="src.execution_manager"):
            manager._evaluate(evaluator, two_mode_config, TimeGrid(t_end=1.0, points=4))
        assert "oracle (n_max=40, threads=1)" in caplog.text
