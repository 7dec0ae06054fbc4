"""Tests for CLI commands."""
import json

import pytest
from click.testing import CliRunner

from src import __version__
from src.cli import cli, summarize_checks


@pytest.fixture
def runner():
    """Create a Click CLI test runner."""
    return CliRunner()


class TestCLIGroup:
    """Tests for the main CLI group."""

    def test_cli_help(self, runner):
        """CLI should show help message."""
        result = runner.invoke(cli, ["--help"])
        assert result.exit_code == 0
        assert "Exterior decay lab" in result.output

    def test_cli_version(self, runner):
        """CLI should show version."""
        result = runner.invoke(cli, ["--version"])
        assert result.exit_code == 0
        assert __version__ in result.output
        assert "edlab" in result.output

    def test_package_reexports(self):
        """The public package should expose the CLI and the version."""
        import exterior_decay

        assert exterior_decay.__version__ == __version__
        assert exterior_decay.cli is cli

    @pytest.mark.parametrize("command",["solve", "verify", "decay", "report", "sweep", "init-config"])
    def test_command_help(self, runner, command):
        """Every command should have help."""
        result = runner.invoke(cli, [command, "--help"])
        assert result.exit_code == 0
        assert "Examples:" in result.output


class TestSummarizeChecks:
    """Tests for collapsing per-level rows."""

    def test_worst_verdict_wins(self):
        """A single FAIL fails the whole check."""
        rows = [
            {"check": "coarea", "verdict": "PASS", "constant": 0.01},
            {"check": "coarea", "verdict": "FAIL", "constant": 0.05},
            {"check": "coarea", "verdict": "INCONCLUSIVE", "constant": None},
        ]
        summary = summarize_checks(rows)
        assert summary == [{"check": "coarea", "rows": 3, "constant": 0.05, "verdict": "FAIL"}]

    def test_pass_beats_inconclusive(self):
        """Inconclusive rows do not hide a pass."""
        rows = [
            {"check": "cutoff_identity", "verdict": "INCONCLUSIVE", "constant": None},
            {"check": "cutoff_identity", "verdict": "PASS", "constant": 0.002},
        ]
        assert summarize_checks(rows)[0]["verdict"] == "PASS"

    def test_order_of_first_appearance(self):
        """Checks keep the order they first appear in."""
        rows = [
            {"check": "b", "verdict": "PASS"},
            {"check": "a", "verdict": "PASS"},
            {"check": "b", "verdict": "PASS"},
        ]
        assert [s["check"] for s in summarize_checks(rows)] == ["b", "a"]


class TestInitConfig:
    """Tests for the init-config command."""

    def test_creates_file(self, runner, tmp_path):
        """init-config should write the example config."""
        path = tmp_path / "experiment.yaml"
        result = runner.invoke(cli, ["init-config", str(path)])
        assert result.exit_code == 0
        assert "Created" in result.output
        assert "remark_optimal" in path.read_text()

    def test_keeps_existing_file(self, runner, tmp_path):
        """Declining the prompt should leave the file alone."""
        path = tmp_path / "experiment.yaml"
        path.write_text("domain: {}\n")
        result = runner.invoke(cli, ["init-config", str(path)], input="n\n")
        assert result.exit_code == 0
        assert "Cancelled" in result.output
        assert path.read_text() == "domain: {}\n"


class TestPipelineCommands:
    """Tests for solve, verify, decay and report on a coarse config."""

    def test_solve(self, runner, config_file, tmp_path):
        """solve should write the field and show the oracle error."""
        out = tmp_path / "cli_run"
        result = runner.invoke(cli, ["solve", "-c", str(config_file), "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert "Oracle error" in result.output
        assert (out / "solution.csv").exists()
        assert (out / "manifest.json").exists()

    def test_full_pipeline(self, runner, config_file, tmp_path):
        """verify, decay and report should fill one run directory."""
        out = str(tmp_path / "cli_run")
        verify = runner.invoke(cli, ["verify", "-c", str(config_file), "-o", out, "-j", "2"])
        assert verify.exit_code in (0, 1), verify.output
        assert "Verification" in verify.output

        decay = runner.invoke(cli, ["decay", "-c", str(config_file), "-o", out])
        assert decay.exit_code == 0, decay.output
        assert "Fitted exponent" in decay.output

        report = runner.invoke(cli, ["report", out])
        data = json.loads((tmp_path / "cli_run" / "report.json").read_text())
        assert report.exit_code == (1 if data["verdict"] == "FAIL" else 0)
        assert "passed" in report.output

    def test_failed_assumptions_stop_verify(self, runner, sink_config_file):
        """verify should stop with exit 1 when an assumption fails."""
        result = runner.invoke(cli, ["verify", "-c", str(sink_config_file)])
        assert result.exit_code == 1
        assert "Stopped after failed assumption checks" in result.output
        assert "--force" in result.output

    def test_report_missing_inputs(self, runner, tmp_path):
        """report on an empty directory should name the missing files."""
        result = runner.invoke(cli, ["report", str(tmp_path)])
        assert result.exit_code == 1
        assert "verify.json" in result.output

    def test_invalid_config(self, runner, tmp_path):
        """A configuration error should exit with 2."""
        path = tmp_path / "bad.yaml"
        path.write_text("domain:\n  n_angular: 31\n")
        result = runner.invoke(cli, ["solve", "-c", str(path)])
        assert result.exit_code == 2
        assert "domain.n_angular" in result.output

    def test_sweep_without_section(self, runner, config_file):
        """sweep needs a sweep section."""
        result = runner.invoke(cli, ["sweep", "-c", str(config_file)])
        assert result.exit_code == 2
        assert "no sweep section" in result.output
