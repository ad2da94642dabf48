"""Tests for the command-line interface."""

import json

import pytest
from click.testing import CliRunner

from linewalk import __version__
from linewalk.cli import main
from linewalk.presets import presets


@pytest.fixture
def runner():
    return CliRunner()


def _write(tmp_path, data, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


class TestRun:
    """linewalk run."""

    def test_run_writes_artifacts(self, runner, config_file, tmp_path):
        result = runner.invoke(main, ["run", str(config_file), "--quiet"])
        assert result.exit_code == 0, result.output
        assert "artifacts written" in result.output
        assert (tmp_path / "out" / "visits.csv").exists()
        assert (tmp_path / "out" / "report.md").exists()

    def test_output_dir_option(self, runner, config_file, tmp_path):
        target = tmp_path / "override"
        result = runner.invoke(main, ["run", str(config_file), "-q", "-o", str(target), "-w", "2"])
        assert result.exit_code == 0, result.output
        assert (target / "checks.csv").exists()

    def test_config_error_exit_code(self, runner, small_config, tmp_path):
        path = _write(tmp_path, dict(small_config, experiment="everything"))
        result = runner.invoke(main, ["run", str(path)])
        assert result.exit_code == 1
        assert "experiment" in result.output

    def test_numerical_failure_exit_code(self, runner, tmp_path):
        data = {
            "system": "translations-discrete",
            "experiment": "stationary",
            "knobs": {"cap": 1, "on_cap": "raise"},
            "output_dir": str(tmp_path / "out"),
        }
        result = runner.invoke(main, ["run", str(_write(tmp_path, data))])
        assert result.exit_code == 2
        assert "Numerical failure" in result.output

    def test_missing_file(self, runner, tmp_path):
        result = runner.invoke(main, ["run", str(tmp_path / "nope.json")])
        assert result.exit_code == 1
        assert "cannot read" in result.output

    def test_validate_missing_file(self, runner, tmp_path):
        result = runner.invoke(main, ["validate", str(tmp_path / "nope.json")])
        assert result.exit_code == 1


class TestOtherCommands:
    """presets, validate and --version."""

    def test_presets(self, runner):
        result = runner.invoke(main, ["presets"])
        assert result.exit_code == 0
        for name in presets():
            assert name in result.output

    def test_validate(self, runner, config_file):
        result = runner.invoke(main, ["validate", str(config_file)])
        assert result.exit_code == 0, result.output
        assert "[PASS]" in result.output
        assert "Config hash:" in result.output

    def test_validate_reducible(self, runner, small_config, tmp_path):
        record = {
            "generators": [
                {"name": "double", "map": {"affine": [2, 0]}, "weight": "1/2"},
                {"name": "halve", "map": {"affine": ["1/2", 0]}, "weight": "1/2"},
            ]
        }
        path = _write(tmp_path, dict(small_config, system=record))
        result = runner.invoke(main, ["validate", str(path)])
        assert result.exit_code == 1
        assert "[FAIL]" in result.output

    def test_version(self, runner):
        result = runner.invoke(main, ["--version"])
        assert result.exit_code == 0
        assert __version__ in result.output
