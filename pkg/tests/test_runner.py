"""Tests for run directories, the experiment pipelines and sweeps."""
import hashlib
import json

import pytest

from src.errors import MissingArtifactsError, PreconditionError
from src.models.reports import Verdict
from src.runner import (
    Experiment,
    RunArtifacts,
    SweepPoint,
    SweepResult,
    SweepRunner,
    boundary_data_from,
    convergence_studies,
    file_digest,
    point_config,
    summary_row,
    sweep_points,
)
from src.settings import SweepBlock, config_from_dict, load_experiment


class TestRunArtifacts:
    """Tests for run directory bookkeeping."""

    def test_json_is_canonical(self, tmp_path):
        """Keys are sorted and the file ends with a newline."""
        artifacts = RunArtifacts(tmp_path / "run")
        path = artifacts.write_json("data.json", {"b": 1, "a": [1.5, None]})
        text = path.read_text()
        assert text.endswith("}\n")
        assert text.index('"a"') < text.index('"b"')
        assert artifacts.read_json("data.json") == {"a": [1.5, None], "b": 1}

    def test_manifest_checksums(self, tmp_path):
        """Every written file is listed with its SHA256."""
        artifacts = RunArtifacts(tmp_path)
        path = artifacts.write_rows("table.csv", ["check", "value"], [["coarea", 0.5], ["x", None]])
        manifest = artifacts.update_manifest("abc")
        assert manifest.config_hash == "abc"
        assert manifest.artifacts == {"table.csv": hashlib.sha256(path.read_bytes()).hexdigest()}
        assert file_digest(path) == manifest.artifacts["table.csv"]
        assert path.read_text().splitlines()[2] == "x,"

    def test_manifest_keeps_earlier_files(self, tmp_path):
        """A later command keeps the files and start time of earlier ones."""
        first = RunArtifacts(tmp_path)
        first.write_json("solve.json", {})
        started = first.update_manifest("abc").started_at
        second = RunArtifacts(tmp_path)
        second.write_json("verify.json", {})
        manifest = second.update_manifest()
        assert sorted(manifest.artifacts) == ["solve.json", "verify.json"]
        assert manifest.started_at == started
        assert manifest.config_hash == "abc"

    def test_missing_report_inputs(self, tmp_path):
        """Aggregating an empty directory names every missing file."""
        with pytest.raises(MissingArtifactsError) as exc:
            RunArtifacts(tmp_path).aggregate()
        assert exc.value.missing == ["manifest.json", "verify.json", "decay.json"]

    def test_summary_row(self):
        """Rows carry the level from the record inputs."""
        row = summary_row({"check": "coarea", "inputs": {"t": 0.2}, "lhs": 1.0, "verdict": "PASS"})
        assert row == {"check": "coarea", "t": 0.2, "lhs": 1.0, "rhs": None, "constant": None,
                       "verdict": "PASS"}


class TestBoundaryFromConfig:
    """Tests for boundary data built from a config."""

    def test_matched_exponent_defaults_to_rate(self, small_config):
        """dirichlet_matched takes 2/p when no exponent is given."""
        assert boundary_data_from(small_config).decay_exponent == pytest.approx(1.0)

    def test_zero_outer(self, small_config_data):
        """dirichlet_zero needs no exponent."""
        small_config_data["boundary"] = {"inner": 1.0, "outer": "dirichlet_zero"}
        assert boundary_data_from(config_from_dict(small_config_data)).decay_exponent is None


class TestExperiment:
    """End-to-end pipeline tests on a coarse grid."""

    def test_solve(self, small_config):
        """Solving writes the field, its history and the manifest."""
        experiment = Experiment(small_config)
        outcome = experiment.solve()
        assert outcome.log.converged
        assert outcome.oracle_error < 0.1
        assert outcome.maximum_principle.verdict == Verdict.PASS
        manifest = experiment.artifacts.load_manifest()
        assert manifest.config_hash == small_config.config_hash()
        assert {"solution.csv", "convergence.csv", "solve.json"} <= set(manifest.artifacts)

    def test_resolved_config_written(self, small_config):
        """The run directory carries the config it was produced by."""
        experiment = Experiment(small_config)
        experiment.solve()
        path = experiment.artifacts.path("config.yaml")
        assert "config.yaml" in experiment.artifacts.load_manifest().artifacts
        assert load_experiment(path).config_hash() == small_config.config_hash()

    def test_solution_reused(self, small_config, monkeypatch):
        """A second experiment on the same config reads solution.csv."""
        field = Experiment(small_config).solve().field

        def no_solve(self):
            raise AssertionError("solved again")

        monkeypatch.setattr(Experiment, "solve", no_solve)
        reloaded = Experiment(small_config).solution()
        assert reloaded.values == pytest.approx(field.values)

    def test_changed_config_solves_again(self, small_config, monkeypatch):
        """A different config hash ignores the stored solution."""
        Experiment(small_config).solve()
        calls = []
        original = Experiment.solve

        def counting_solve(self):
            calls.append(self.config_hash)
            return original(self)

        monkeypatch.setattr(Experiment, "solve", counting_solve)
        Experiment(small_config.with_overrides(seed=3)).solution()
        assert len(calls) == 1

    def test_verify_and_decay_and_report(self, small_config):
        """The full pipeline produces a report over every record."""
        experiment = Experiment(small_config)
        verified = experiment.verify()
        assert not verified.stopped
        assert verified.t_star == pytest.approx(0.5, rel=5e-2)
        checks = {r.check for r in verified.records}
        assert {"assumption_c1", "maximum_principle", "unique_component", "gradient_flux_bound",
                "key_lemma_constant", "coarea", "cutoff_identity"} <= checks
        assert experiment.artifacts.read_json("verify.json")["stopped"] is False

        decayed = experiment.decay()
        assert decayed.report.fitted_exponent == pytest.approx(-1.0, abs=0.1)
        assert [n.q for n in decayed.norms] == [2.0, float("inf")]

        report = experiment.artifacts.write_report()
        assert sum(report["counts"].values()) == len(report["checks"])
        assert report["family"] == "remark_optimal"
        assert report["decay"]["p"] == 2.0
        assert report["norms"][1]["q"] == "inf"
        assert "solve" in report

    def test_report_is_reproducible(self, small_config):
        """Aggregating twice gives the same bytes."""
        experiment = Experiment(small_config)
        experiment.verify()
        experiment.decay()
        experiment.artifacts.write_report()
        first = experiment.artifacts.path("report.json").read_bytes()
        experiment.artifacts.write_report()
        assert experiment.artifacts.path("report.json").read_bytes() == first

    @pytest.mark.parametrize("family,params,boundary,r_out", [
        ("rotational", {"kappa": 1.0}, {"inner": 1.0, "outer": "dirichlet_matched"}, 16.0),
        ("reaction", {"strength": 1.0}, {"inner": 1.0, "outer": "dirichlet_zero"}, 256.0),
    ])
    def test_verify_other_families(self, small_config_data, family, params, boundary, r_out):
        """Assumptions, positivity, topology and the geometric bound hold beyond the oracle family."""
        small_config_data["coefficients"] = {"family": family, "params": params}
        small_config_data["boundary"] = boundary
        small_config_data["domain"]["truncation_radius"] = r_out
        outcome = Experiment(config_from_dict(small_config_data)).verify()
        assert not outcome.stopped
        by_check = {}
        for record in outcome.records:
            by_check.setdefault(record.check, []).append(record)
        assert [r.verdict for r in outcome.records if r.check.startswith("assumption_")] == [Verdict.PASS] * 4
        assert by_check["maximum_principle"][0].verdict == Verdict.PASS
        assert by_check["unique_component"][0].verdict == Verdict.PASS
        assert all(r.verdict != Verdict.FAIL for r in by_check.get("geometric_bound", []))
        assert by_check["key_lemma_constant"][0].constant > 0.0

    def test_failed_assumptions_stop(self, sink_config_file):
        """sink_drift fails C2 and C4, so verify stops before solving."""
        config = load_experiment(sink_config_file)
        experiment = Experiment(config)
        outcome = experiment.verify()
        assert outcome.stopped
        assert not outcome.passed
        assert [r.check for r in outcome.failed] == ["assumption_c2", "assumption_c4"]
        assert not experiment.artifacts.exists("solution.csv")
        assert experiment.artifacts.exists("config.yaml")
        data = experiment.artifacts.read_json("verify.json")
        assert data["stopped"] is True
        assert data["verdict"] == "FAIL"

    def test_check_levels_outside_range(self, small_config_data):
        """Configured levels above t_star are a precondition failure."""
        small_config_data["verification"]["check_levels"] = [0.9]
        with pytest.raises(PreconditionError):
            Experiment(config_from_dict(small_config_data)).verify()

    def test_default_check_levels(self, small_config):
        """Three levels spread over the usable ones, ends included."""
        usable = [0.1, 0.15, 0.2, 0.25, 0.3]
        assert Experiment(small_config).check_levels(usable) == [0.1, 0.2, 0.3]
        assert Experiment(small_config).check_levels(usable[:2]) == [0.1, 0.15]


class TestSweep:
    """Tests for sweep expansion and convergence studies."""

    def test_points_cross_product(self):
        """Every combination of the non-empty lists is a point."""
        points = sweep_points(SweepBlock(p=[1.0, 2.0], grid_scale=[1.0, 2.0]))
        assert [pt.label() for pt in points] == ["p1_s1", "p1_s2", "p2_s1", "p2_s2"]

    def test_empty_block(self):
        """An empty sweep is the base run alone."""
        assert [pt.label() for pt in sweep_points(SweepBlock())] == ["base"]

    def test_point_config(self, small_config, tmp_path):
        """A point overrides p everywhere and clears the sweep."""
        point = SweepPoint(p=4.0, grid_scale=2.0, truncation_radius=32.0)
        config = point_config(small_config, point, tmp_path / point.label())
        assert point.label() == "p4_s2_R32"
        assert config.p == 4.0
        assert config.analysis.p == 4.0
        assert config.domain.truncation_radius == 32.0
        assert config.domain_spec().n_radial == 65
        assert config.sweep.is_empty
        assert config.output_dir == str(tmp_path / "p4_s2_R32")
        assert small_config.p == 2.0

    def test_convergence_studies(self):
        """Errors falling with h^2 give order 2."""
        results = [
            SweepResult(SweepPoint(p=2.0, grid_scale=1.0), "a", oracle_error=4e-3, spacing=0.2),
            SweepResult(SweepPoint(p=2.0, grid_scale=2.0), "b", oracle_error=1e-3, spacing=0.1),
            SweepResult(SweepPoint(p=4.0, grid_scale=1.0), "c", oracle_error=2e-3, spacing=0.2),
            SweepResult(SweepPoint(p=4.0, grid_scale=2.0), "d", oracle_error=None, spacing=0.1),
        ]
        studies = convergence_studies(results)
        assert len(studies) == 1
        assert studies[0]["p"] == 2.0
        assert studies[0]["spacings"] == [0.1, 0.2]
        assert studies[0]["order"] == pytest.approx(2.0)

    @pytest.mark.slow
    def test_sweep_run(self, small_config_data, tmp_path):
        """A two-scale sweep writes one run per point and a convergence study."""
        small_config_data["sweep"] = {"grid_scale": [1, 2]}
        config = config_from_dict(small_config_data)
        results = SweepRunner(config, jobs=2).run()
        assert [r.point.label() for r in results] == ["s1", "s2"]
        assert all(r.error is None for r in results)
        data = json.loads((tmp_path / "run" / "sweep.json").read_text())
        assert len(data["runs"]) == 2
        assert len(data["convergence"]) == 1
        assert (tmp_path / "run" / "s2" / "report.json").exists()
