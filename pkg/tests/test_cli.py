"""
CLI Tests for Flexformation

End-to-end tests of the command line: scenario files, reference figures,
stability analysis, theta sweeps, the self-test and exit codes.
"""

import json
from pathlib import Path

import pytest

import formation.analysis
from cli.main import main
from cli.output import read_csv_columns
from cli.presets import DESCRIPTIONS, SPECS, preset_scenario
from cli.scenario_file import dump_scenario, parse_scenario
from models.errors import ScenarioFileError

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "data" / "scenarios"

VALID = """\
variant = "biased-collinear"
d1 = 30.0
d2 = 10.0
c = 1.0
horizon = 2.0
p1 = [0.0, 0.0]
p2 = [25.0, 5.0]
p3 = [30.0, -5.0]
"""


def write(tmp_path, name: str, text: str):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestScenarioFiles:
    """Test parsing and validation of scenario files."""

    def test_valid_file(self):
        """Test a complete file parses into a scenario."""
        sc = parse_scenario(VALID)
        assert sc.spec.d1 == 30.0
        assert sc.initial.shape == (3, 2)
        assert sc.horizon == 2.0

    def test_degrees_are_converted(self):
        """Test theta_deg is stored in radians."""
        text = 'variant = "rotated-split"\nd1 = 1\nd2 = 2\ntheta_deg = 90\n'
        sc = parse_scenario(text)
        assert sc.spec.theta == pytest.approx(1.5707963267948966)

    def test_invalid_value_names_key_and_line(self):
        """Test a negative distance cites its key and line."""
        with pytest.raises(ScenarioFileError) as exc_info:
            parse_scenario("d2 = 10\nd1 = -3\n")
        assert exc_info.value.line == 2
        assert "d1" in str(exc_info.value)

    def test_unknown_key(self):
        """Test unknown keys are rejected with their line."""
        with pytest.raises(ScenarioFileError) as exc_info:
            parse_scenario("d1 = 1\nd2 = 1\nspeed = 3\n")
        assert exc_info.value.line == 3

    def test_partial_positions(self):
        """Test positions must be given for all three agents."""
        with pytest.raises(ScenarioFileError, match="together"):
            parse_scenario("d1 = 1\nd2 = 1\np1 = [0, 0]\n")

    def test_both_angle_forms(self):
        """Test theta and theta_deg are mutually exclusive."""
        with pytest.raises(ScenarioFileError, match="either"):
            parse_scenario("d1 = 1\nd2 = 1\ntheta = 0.1\ntheta_deg = 5\n")

    def test_syntax_error(self):
        """Test malformed TOML is reported as a scenario error."""
        with pytest.raises(ScenarioFileError, match="invalid TOML"):
            parse_scenario("d1 = = 1\n")

    def test_dump_is_parseable(self):
        """Test a dumped scenario parses back to the same spec."""
        sc = parse_scenario(VALID)
        assert parse_scenario(dump_scenario(sc)).spec == sc.spec

    def test_fractional_record_every(self):
        """Test a non-integer stride is rejected instead of truncated."""
        with pytest.raises(ScenarioFileError) as exc_info:
            parse_scenario("d1 = 1\nd2 = 1\nrecord_every = 2.5\n")
        assert exc_info.value.line == 3
        assert "record_every" in str(exc_info.value)

    def test_fractional_seed(self):
        """Test a non-integer seed is rejected."""
        with pytest.raises(ScenarioFileError) as exc_info:
            parse_scenario("d1 = 1\nd2 = 1\nseed = 1.5\n")
        assert exc_info.value.line == 3

    def test_positions_and_errors_conflict(self):
        """Test a file cannot give both positions and initial errors."""
        text = VALID + "e0 = [1.0, 0.0, 0.0]\n"
        with pytest.raises(ScenarioFileError, match="not both") as exc_info:
            parse_scenario(text)
        assert exc_info.value.line == 9

    def test_dump_leaves_out_defaults(self):
        """Test dumped presets carry only keys that differ from defaults."""
        text = dump_scenario(preset_scenario("triangle"), "triangle")
        assert text.startswith("# triangle\n")
        assert "theta_deg = 60.0\n" in text
        assert "classify_tol" not in text
        assert "collinear_start" not in text
        assert parse_scenario(text).spec == preset_scenario("triangle").spec

    def test_dump_collinear_start(self):
        """Test the straight-chain flag survives a dump."""
        sc = preset_scenario("triangle", collinear_start=True)
        assert parse_scenario(dump_scenario(sc)).collinear_start is True

    @pytest.mark.parametrize("name", list(SPECS))
    def test_shipped_files_match_generator(self, name):
        """Test data/scenarios holds exactly what the generator writes."""
        shipped = (SCENARIO_DIR / f"{name}.toml").read_text()
        expected = dump_scenario(preset_scenario(name, seed=0), DESCRIPTIONS[name])
        assert shipped == expected
        assert parse_scenario(shipped).spec == SPECS[name]()


class TestRunCommand:
    """Test the run subcommand."""

    def test_valid_run(self, tmp_path, capsys):
        """Test a valid file exits 0 with a CSV and a report."""
        path = write(tmp_path, "stationary.toml", VALID)
        status = main(["--out", str(tmp_path / "out"), "run", str(path)])
        assert status == 0

        csv_path = tmp_path / "out" / "stationary.csv"
        header = csv_path.read_text().splitlines()[0]
        assert header.startswith("t,p1x,p1y,p2x,p2y,p3x,p3y,e1,e2,e3,gamma,cross")
        columns = read_csv_columns(csv_path)
        assert columns["t"][-1] == pytest.approx(2.0)

        report = json.loads((tmp_path / "out" / "stationary.json").read_text())
        assert report["ok"] is True
        assert "classified" in report["data"]
        assert "classification" in capsys.readouterr().out

    def test_invalid_parameter(self, tmp_path, capsys):
        """Test a negative distance exits 1 naming the field."""
        path = write(tmp_path, "bad.toml", "d1 = -3\nd2 = 10\n")
        assert main(["--out", str(tmp_path), "run", str(path)]) == 1
        assert "d1" in capsys.readouterr().out

    def test_missing_file(self, tmp_path):
        """Test an unreadable file is a configuration error."""
        assert main(["--out", str(tmp_path), "run", str(tmp_path / "none.toml")]) == 1

    def test_coincident_agents_abort(self, tmp_path):
        """Test a degenerate start exits 2 with a failed report."""
        text = "d1 = 30\nd2 = 10\nc = 1\np1 = [0, 0]\np2 = [0, 0]\np3 = [10, 0]\n"
        path = write(tmp_path, "coincident.toml", text)
        assert main(["--out", str(tmp_path), "run", str(path)]) == 2
        report = json.loads((tmp_path / "coincident.json").read_text())
        assert report["ok"] is False
        assert report["data"]["aborted_at"] == 0.0

    def test_error_space_run(self, tmp_path):
        """Test a file with e0 integrates the error system."""
        text = "d1 = 30\nd2 = 10\nc = 1\nhorizon = 1.0\ne0 = [1.0, -0.5, 0.2]\n"
        path = write(tmp_path, "errors.toml", text)
        assert main(["--out", str(tmp_path), "run", str(path)]) == 0
        header = (tmp_path / "errors.csv").read_text().splitlines()[0]
        assert header == "t,e1,e2,e3"


class TestFigureCommand:
    """Test the figure subcommand."""

    def test_short_figure(self, tmp_path):
        """Test a reference figure runs with a shortened horizon."""
        argv = ["--out", str(tmp_path), "figure", "collinear-stationary"]
        assert main(argv + ["--seed", "2", "--horizon", "2"]) == 0
        assert (tmp_path / "collinear-stationary-seed2.csv").exists()
        assert (tmp_path / "collinear-stationary-seed2.json").exists()

    def test_unknown_figure(self, tmp_path):
        """Test an unknown figure name exits 1."""
        assert main(["--out", str(tmp_path), "figure", "square"]) == 1

    def test_invalid_override(self, tmp_path):
        """Test an invalid step override exits 1."""
        argv = ["--out", str(tmp_path), "figure", "triangle", "--dt", "-1"]
        assert main(argv) == 1


class TestAnalyzeCommand:
    """Test the analyze subcommand."""

    def test_collinear_point(self, tmp_path, capsys):
        """Test theta = 0 prints the closed-form roots and a Hurwitz verdict."""
        argv = ["--d1", "30", "--d2", "10", "--theta", "0", "--c", "1"]
        assert main(["--out", str(tmp_path), "analyze"] + argv) == 0
        out = capsys.readouterr().out
        assert "closed-form roots" in out
        assert "hurwitz: true" in out
        report = json.loads((tmp_path / "analysis.json").read_text())
        assert report["data"]["hurwitz"] is True

    def test_triangle_in_degrees(self, tmp_path, capsys):
        """Test the 60 degree triangle is reported stable."""
        argv = ["--d1", "30", "--d2", "10", "--theta-deg", "60", "--c", "0.1"]
        assert main(["--out", str(tmp_path), "analyze"] + argv) == 0
        assert "hurwitz: true" in capsys.readouterr().out

    def test_unstable_gain(self, tmp_path, capsys):
        """Test a negative gain is reported unstable but still succeeds."""
        argv = ["--d1", "30", "--d2", "10", "--c", "-1"]
        assert main(["--out", str(tmp_path), "analyze"] + argv) == 0
        assert "hurwitz: false" in capsys.readouterr().out

    def test_invalid_parameters(self, tmp_path):
        """Test a non-positive distance exits 1."""
        argv = ["--d1", "-1", "--d2", "10", "--c", "1"]
        assert main(["--out", str(tmp_path), "analyze"] + argv) == 1

    def test_angle_outside_range(self, tmp_path):
        """Test theta beyond pi is rejected."""
        argv = ["--d1", "1", "--d2", "1", "--theta", "3.2", "--c", "1"]
        assert main(["--out", str(tmp_path), "analyze"] + argv) == 1


class TestSweepCommand:
    """Test the sweep-theta subcommand."""

    def test_default_grid(self, tmp_path):
        """Test the 5 degree grid writes one row per angle inside (-pi, pi)."""
        argv = ["--d1", "30", "--d2", "10", "--c", "0.01"]
        assert main(["--out", str(tmp_path), "sweep-theta"] + argv) == 0
        columns = read_csv_columns(tmp_path / "sweep_theta.csv")
        assert len(columns["theta"]) == 71
        assert max(abs(columns["theta"])) < 3.1416
        zero = list(columns["theta"]).index(0.0)
        assert columns["hurwitz"][zero] == 1.0
        assert columns["max_real"][zero] == pytest.approx(-0.02 * 4 / 30)

    def test_non_positive_step(self, tmp_path):
        """Test a non-positive step exits 1."""
        argv = ["--d1", "30", "--d2", "10", "--c", "0.01", "--step", "0"]
        assert main(["--out", str(tmp_path), "sweep-theta"] + argv) == 1


class TestSelftestCommand:
    """Test the selftest subcommand and exit codes."""

    def test_list(self, capsys):
        """Test --list prints the registered checks."""
        assert main(["selftest", "--list"]) == 0
        assert "analysis-partials-sign" in capsys.readouterr().out

    def test_single_check_passes(self, capsys):
        """Test a selected check runs and passes."""
        assert main(["selftest", "--only", "geometry-unit-norm"]) == 0
        assert "PASS geometry-unit-norm" in capsys.readouterr().out

    @pytest.mark.parametrize(
        "name",
        [
            "geometry-signed-angle-antisymmetry",
            "dynamics-mixed-rates-fd",
            "sim-escape-travelling-set",
            "sim-se2-trajectory-equivariance",
        ],
    )
    def test_flow_checks_pass(self, name, capsys):
        """Test the antisymmetry, flow-derivative and trajectory checks pass."""
        assert main(["selftest", "--only", name]) == 0
        assert f"PASS {name}" in capsys.readouterr().out

    def test_unknown_check(self):
        """Test an unknown check name exits 1."""
        assert main(["selftest", "--only", "no-such-check"]) == 1

    def test_broken_partials_fail(self, monkeypatch, capsys):
        """Test a flipped closing-side factor is caught and named."""
        original = formation.analysis.partials_a

        def flipped(d1, d2, theta, alpha):
            a1, a2, a3 = original(d1, d2, theta, alpha)
            return a1, a2, -a3

        monkeypatch.setattr(formation.analysis, "partials_a", flipped)
        assert main(["selftest", "--only", "analysis-partials-sign"]) == 3
        assert "FAIL analysis-partials-sign" in capsys.readouterr().out


class TestUsage:
    """Test argument errors map to configuration exit codes."""

    def test_missing_command(self):
        """Test running without a subcommand exits 1."""
        assert main([]) == 1

    def test_unknown_command(self):
        """Test an unknown subcommand exits 1."""
        assert main(["fly"]) == 1

    def test_missing_required_flag(self):
        """Test a missing required flag exits 1."""
        assert main(["analyze", "--d1", "30"]) == 1


if __name__ == "__main__":
    pytest.main([__file__])
