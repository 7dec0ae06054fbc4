# Experiment pipelines, run directories and parameter sweeps
from src.runner.artifacts import RunArtifacts, file_digest, summary_row
from src.runner.experiment import (
    DecayOutcome,
    Experiment,
    SolveOutcome,
    VerifyOutcome,
    boundary_data_from,
)
from src.runner.sweep import (
    SweepPoint,
    SweepResult,
    SweepRunner,
    convergence_studies,
    point_config,
    sweep_points,
)

__all__ = [
    "RunArtifacts",
    "file_digest",
    "summary_row",
    "DecayOutcome",
    "Experiment",
    "SolveOutcome",
    "VerifyOutcome",
    "boundary_data_from",
    "SweepPoint",
    "SweepResult",
    "SweepRunner",
    "convergence_studies",
    "point_config",
    "sweep_points",
]
