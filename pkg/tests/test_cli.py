"""End-to-end tests of the scenario runner and the command-line entry point."""

import json
import math

import numpy as np
import pytest

import main as entry
from phasefront.cli import RUNNERS, load_config, run
from phasefront.errors import ConfigInvalid
from phasefront.schemas import SCENARIOS


def _read(path):
    return json.loads(path.read_text())


class TestLoadConfig:
    def test_defaults(self):
        config = load_config(None, "flow")
        assert config.scenario == "flow"
        assert config.hamiltonian.kind == "harmonic_oscillator"
        assert config.wavefront.bins == 64

    def test_overrides_win(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"seed": 1, "L": 10.0}))
        config = load_config(path, "wavefront", {"seed": 9, "L": None, "N": 512})
        assert (config.seed, config.L, config.N) == (9, 10.0, 512)

    def test_datum_shorthand(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"datum": "chirp(2)"}))
        assert load_config(path, "wavefront").datum.lam == 2.0

    @pytest.mark.parametrize("content", [
        "{not json",
        "[1, 2]",
        json.dumps({"unknown_key": 1}),
        json.dumps({"scenario": "flow"}),
        json.dumps({"thresholds": {"decay_margin": "wide"}}),
        json.dumps({"datum": {"kind": "file", "path": "/nonexistent/signal.csv"}}),
    ])
    def test_invalid(self, tmp_path, content):
        path = tmp_path / "c.json"
        path.write_text(content)
        with pytest.raises(ConfigInvalid):
            load_config(path, "wavefront")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigInvalid):
            load_config(tmp_path / "absent.json", "flow")

    def test_every_scenario_has_a_runner(self):
        assert set(RUNNERS) == set(SCENARIOS)


class TestFlowScenario:
    def test_quarter_turn(self, tmp_path):
        config = load_config(None, "flow").model_copy(update={"t": math.pi / 2})
        assert run(config, tmp_path) == 0
        report = _read(tmp_path / "report.json")
        assert report["status"] == "COMPLETE"
        np.testing.assert_allclose(report["endpoint"], [0.0, -1.0], atol=1e-12)
        assert report["direction_image"] == pytest.approx(3 * math.pi / 2)
        assert report["symplectic_defect"] < 1e-12

    def test_zero_time(self, tmp_path):
        assert run(load_config(None, "flow"), tmp_path) == 0
        np.testing.assert_allclose(_read(tmp_path / "report.json")["endpoint"], [1.0, 0.0])

    def test_numeric_provider(self, tmp_path):
        config = load_config(None, "flow", {"t": 1.0})
        config = config.model_copy(update={"hamiltonian": config.hamiltonian.model_copy(update={"kind": "potential"})})
        assert run(config, tmp_path) == 0
        np.testing.assert_allclose(_read(tmp_path / "report.json")["endpoint"],
                                   [math.cos(1.0), -math.sin(1.0)], atol=1e-8)

    def test_coarse_step_exits_two(self, tmp_path):
        config = load_config(None, "flow", {"t": 1.0})
        config = config.model_copy(update={
            "dt": 0.5,
            "hamiltonian": config.hamiltonian.model_copy(update={"kind": "time_dependent_oscillator"}),
        })
        assert run(config, tmp_path) == 2
        manifest = _read(tmp_path / "manifest.json")
        assert manifest["status"] == "ERROR"
        assert manifest["exit_code"] == 2
        assert _read(tmp_path / "report.json")["error"] == "ConfigInvalid"

    def test_reports_are_byte_identical(self, tmp_path):
        config = load_config(None, "flow", {"t": 0.7})
        run(config, tmp_path / "a")
        run(config, tmp_path / "b")
        assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()

    def test_manifest_lists_artifacts(self, tmp_path):
        run(load_config(None, "flow"), tmp_path)
        manifest = _read(tmp_path / "manifest.json")
        assert manifest["exit_code"] == 0
        assert manifest["config"]["scenario"] == "flow"
        listed = set(manifest["artifacts"]) | {"manifest.json"}
        assert listed == {p.name for p in tmp_path.iterdir()}


class TestGridScenarios:
    def test_bargmann_map(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({
            "L": 20.0, "N": 1024, "datum": "chirp(1)",
            "bargmann": {"radius": 8.0, "count": 33},
        }))
        out = tmp_path / "out"
        assert run(load_config(path, "bargmann-map"), out) == 0
        report = _read(out / "report.json")
        assert report["oracle_max_error"] < 1e-6
        assert report["phase_space_mass"] > 0
        assert {"bargmann_map.csv", "bargmann_map.bin"} <= set(_read(out / "manifest.json")["artifacts"])

    def test_evolve_writes_snapshots(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({
            "L": 20.0, "N": 1024, "datum": "gaussian(1)", "t": 0.5, "times": [0.25, 0.5], "F": "gauge",
        }))
        out = tmp_path / "out"
        assert run(load_config(path, "evolve"), out) == 0
        report = _read(out / "report.json")
        assert report["snapshot_times"] == [0.25, 0.5]
        assert report["max_relative_norm_drift"] < 1e-6
        names = {p.name for p in out.iterdir()}
        assert {"snapshot_0.csv", "snapshot_1.csv", "diagnostics.json"} <= names

    def test_module_error_exits_one(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"datum": "chirp(4)", "L": 40.0, "N": 1024}))
        assert run(load_config(path, "wavefront"), tmp_path / "out") == 1
        report = _read(tmp_path / "out" / "report.json")
        assert report["status"] == "ERROR"
        assert report["error"] == "NyquistViolation"

    def test_anomaly_demo_needs_a_chirp(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"datum": "gaussian"}))
        assert run(load_config(path, "anomaly-demo"), tmp_path / "out") == 2
        assert _read(tmp_path / "out" / "manifest.json")["status"] == "ERROR"


class TestMain:
    def test_flow(self, tmp_path):
        assert entry.main(["flow", "--out", str(tmp_path), "--log-level", "WARNING"]) == 0
        assert (tmp_path / "manifest.json").exists()

    def test_bad_config_exits_two(self, tmp_path, capsys):
        path = tmp_path / "c.json"
        path.write_text("{")
        assert entry.main(["flow", "--config", str(path), "--out", str(tmp_path / "out")]) == 2
        assert "CONFIGURATION ERROR" in capsys.readouterr().out

    def test_unknown_scenario(self):
        with pytest.raises(SystemExit):
            entry.main(["bogus"])


@pytest.mark.slow
class TestChecks:
    def test_propagation_check_passes(self, tmp_path):
        assert run(load_config(None, "propagation-check"), tmp_path) == 0
        report = _read(tmp_path / "report.json")
        assert [round(c["t"], 6) for c in report["checks"]] == [round(t, 6) for t in
                                                                (math.pi / 8, math.pi / 4, 3 * math.pi / 8)]
        assert all(c["passed"] for c in report["checks"])

    def test_directions_gather_on_the_xi_axis_near_a_quarter_turn(self, tmp_path):
        t = 7 * math.pi / 16
        assert run(load_config(None, "propagation-check", {"times": [t]}), tmp_path) == 0
        check = _read(tmp_path / "report.json")["checks"][0]
        assert check["passed"]
        directions = np.array(check["singular_directions"])
        assert directions.size > 0
        gap = np.minimum(np.abs(directions - math.pi / 2), np.abs(directions - 3 * math.pi / 2))
        assert gap.max() <= 3 * math.pi / 16

    def test_anomaly_demo_flags_the_doubled_slope(self, tmp_path):
        assert run(load_config(None, "anomaly-demo"), tmp_path) == 0
        report = _read(tmp_path / "report.json")
        assert report["checks"] == {"expected_line_flagged": True, "original_line_cleared": True}
        assert report["expected_slope"] == 2.0

    def test_paradiff_scenario_telescopes(self, tmp_path):
        assert run(load_config(None, "paradiff-probe", {"seed": 3}), tmp_path) == 0
        report = _read(tmp_path / "report.json")
        assert report["status"] == "PASS"
        assert report["checks"]["sharp_bounded"]
        assert report["seminorm_sharp"]["fit_levels"] == [4, 7]
        assert report["checks"]["telescoping"]
        assert report["telescoping_residual"] < 1e-8
        assert len(report["moser_family"]) == 8
