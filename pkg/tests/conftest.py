"""Shared pytest fixtures for the exterior decay lab tests."""
import numpy as np
import pytest
import yaml

from src.coefficients import builtin_family
from src.grid import DomainSpec, sample_function
from src.levels import LevelAnalysis
from src.settings import config_from_dict
from src.solver import BoundaryData, OuterCondition, assemble, solve


@pytest.fixture(scope="session")
def spec():
    """Fine domain r0=1, R=2, R_out=32 used by the level-set tests."""
    return DomainSpec(1.0, 2.0, 32.0, 97, 128)


@pytest.fixture(scope="session")
def exact_field(spec):
    """The exact solution 1/|x| of the p = 2 drift family, sampled on the grid."""
    return sample_function(spec, lambda x, y: 1.0 / np.hypot(x, y), label="exact")


@pytest.fixture(scope="session")
def exact_analysis(exact_field):
    """Level analysis of the exact field."""
    return LevelAnalysis(exact_field)


@pytest.fixture(scope="session")
def matched_boundary():
    """Unit inner data, outer circle matched to |x|^-1."""
    return BoundaryData.constant(1.0, OuterCondition.DIRICHLET_MATCHED, decay_exponent=1.0)


@pytest.fixture(scope="session")
def solved_field(matched_boundary):
    """Discrete solution of the p = 2 drift family on a 65 x 128 grid."""
    coeffs = builtin_family("remark_optimal", {"p": 2.0})
    spec = DomainSpec(1.0, 2.0, 32.0, 65, 128)
    return solve(assemble(coeffs, spec, matched_boundary)).field


@pytest.fixture
def small_config_data(tmp_path):
    """A coarse experiment config as nested dictionaries."""
    return {
        "domain": {
            "obstacle_radius": 1.0,
            "enclosing_radius": 2.0,
            "truncation_radius": 16.0,
            "n_radial": 33,
            "n_angular": 32,
        },
        "coefficients": {"family": "remark_optimal", "params": {"p": 2.0}},
        "boundary": {"inner": 1.0, "outer": "dirichlet_matched"},
        "verification": {"n_levels": 12, "n_samples": 128},
        "analysis": {"p": 2.0, "q": [2.0, "inf"]},
        "output_dir": str(tmp_path / "run"),
    }


@pytest.fixture
def small_config(small_config_data):
    """Validated coarse ExperimentConfig writing into tmp_path/run."""
    return config_from_dict(small_config_data)


@pytest.fixture
def config_file(tmp_path, small_config_data):
    """The coarse config written as YAML."""
    path = tmp_path / "experiment.yaml"
    path.write_text(yaml.safe_dump(small_config_data))
    return path


@pytest.fixture
def sink_config_file(tmp_path, small_config_data):
    """A config whose family violates the integrability assumption."""
    data = dict(small_config_data)
    data["coefficients"] = {"family": "sink_drift", "params": {}}
    data["boundary"] = {"inner": 1.0, "outer": "dirichlet_zero"}
    data["output_dir"] = str(tmp_path / "sink")
    path = tmp_path / "sink.yaml"
    path.write_text(yaml.safe_dump(data))
    return path
