# Exterior decay lab - elliptic solutions outside an obstacle
# This module provides the public API for the exterior_decay package.

# Re-export the version
from src import __version__

# Re-export main CLI entry point
from src.cli import main, cli

# Re-export key components for programmatic use
from src.settings import ExperimentConfig, load_experiment
from src.grid import DomainSpec, ScalarField, build_grid, sample_function
from src.coefficients import builtin_family, validate_assumptions
from src.solver import BoundaryData, OuterCondition, assemble, solve
from src.levels import LevelAnalysis, build_family
from src.decay import decay_fit, lorentz_norm
from src.runner import Experiment, RunArtifacts, SweepRunner
from src.models.reports import Verdict, VerificationRecord, DecayReport, LorentzNorm

__all__ = [
    "__version__",
    "main",
    "cli",
    "ExperimentConfig",
    "load_experiment",
    "DomainSpec",
    "ScalarField",
    "build_grid",
    "sample_function",
    "builtin_family",
    "validate_assumptions",
    "BoundaryData",
    "OuterCondition",
    "assemble",
    "solve",
    "LevelAnalysis",
    "build_family",
    "decay_fit",
    "lorentz_norm",
    "Experiment",
    "RunArtifacts",
    "SweepRunner",
    "Verdict",
    "VerificationRecord",
    "DecayReport",
    "LorentzNorm",
]
