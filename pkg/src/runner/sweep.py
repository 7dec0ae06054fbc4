"""Parameter sweeps: the cross product of p, grid scale and truncation radius."""
import copy
import itertools
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from rich.console import Console
from rich.progress import Progress, SpinnerColumn, TextColumn

from src.errors import LabError
from src.log import get_logger
from src.runner.artifacts import RunArtifacts
from src.runner.experiment import Experiment
from src.settings import ExperimentConfig, SweepBlock
from src.solver import convergence_order

logger = get_logger(__name__)

SWEEP_KEYS = ("p", "grid_scale", "truncation_radius")


@dataclass
class SweepPoint:
    """One combination of swept values."""
    p: Optional[float] = None
    grid_scale: Optional[float] = None
    truncation_radius: Optional[float] = None

    def label(self) -> str:
        parts = []
        if self.p is not None:
            parts.append(f"p{self.p:g}")
        if self.grid_scale is not None:
            parts.append(f"s{self.grid_scale:g}")
        if self.truncation_radius is not None:
            parts.append(f"R{self.truncation_radius:g}")
        return "_".join(parts) or "base"

    def to_dict(self) -> Dict[str, Optional[float]]:
        return {"p": self.p, "grid_scale": self.grid_scale, "truncation_radius": self.truncation_radius}


@dataclass
class SweepResult:
    """Outcome of one sweep run.

    Attributes:
        point: Swept values of the run
        directory: Run directory
        exit_code: 0 when every check passed
        oracle_error: Solve error against a closed form, if any
        spacing: Largest radial step of the grid
        fitted_exponent: Decay fit exponent
        counts: Verdict counts of the verification records
        error: Message of the error that stopped the run
    """
    point: SweepPoint
    directory: str
    exit_code: int = 0
    oracle_error: Optional[float] = None
    spacing: Optional[float] = None
    fitted_exponent: Optional[float] = None
    counts: Dict[str, int] = field(default_factory=dict)
    error: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            **self.point.to_dict(),
            "label": self.point.label(),
            "directory": self.directory,
            "exit_code": self.exit_code,
            "oracle_error": self.oracle_error,
            "spacing": self.spacing,
            "fitted_exponent": self.fitted_exponent,
            "counts": self.counts,
            "error": self.error,
        }


def sweep_points(block: SweepBlock) -> List[SweepPoint]:
    """Cross product of the non-empty sweep lists."""
    axes = [getattr(block, key) or [None] for key in SWEEP_KEYS]
    return [SweepPoint(*combo) for combo in itertools.product(*axes)]


def point_config(base: ExperimentConfig, point: SweepPoint, directory: Path) -> ExperimentConfig:
    """Config of one sweep run; the sweep block itself is cleared."""
    config = copy.deepcopy(base)
    if point.p is not None:
        config.analysis = replace(config.analysis, p=point.p)
        if "p" in config.coefficients.params:
            params = {**config.coefficients.params, "p": point.p}
            config.coefficients = replace(config.coefficients, params=params)
    if point.grid_scale is not None:
        config.grid_scale = point.grid_scale
    if point.truncation_radius is not None:
        config.domain = replace(config.domain, truncation_radius=point.truncation_radius)
    config.sweep = SweepBlock()
    config.output_dir = str(directory)
    return config.validate()


def run_point(config: ExperimentConfig, point: SweepPoint, force: bool = False) -> SweepResult:
    """Solve, verify, analyse and report one run."""
    experiment = Experiment(config, jobs=1, force=force)
    result = SweepResult(point=point, directory=config.output_dir)
    try:
        solved = experiment.solve()
        result.oracle_error = solved.oracle_error
        result.spacing = float(solved.field.grid.radial_steps.max())
        verified = experiment.verify()
        result.counts = verified.counts()
        result.fitted_exponent = experiment.decay().report.fitted_exponent
        experiment.artifacts.write_report()
        result.exit_code = 0 if verified.passed else 1
    except LabError as e:
        logger.warning("sweep run %s failed: %s", point.label(), e)
        result.error = str(e)
        result.exit_code = e.exit_code
    return result


def convergence_studies(results: List[SweepResult]) -> List[Dict[str, Any]]:
    """Observed order per (p, R_out) group swept over at least two grid scales."""
    groups: Dict[Tuple, List[SweepResult]] = {}
    for r in results:
        if r.oracle_error is None or r.oracle_error <= 0 or r.spacing is None:
            continue
        groups.setdefault((r.point.p, r.point.truncation_radius), []).append(r)
    studies = []
    for (p, radius), members in sorted(groups.items(), key=lambda kv: str(kv[0])):
        if len({m.spacing for m in members}) < 2:
            continue
        members.sort(key=lambda m: m.spacing)
        studies.append({
            "p": p,
            "truncation_radius": radius,
            "spacings": [m.spacing for m in members],
            "errors": [m.oracle_error for m in members],
            "order": convergence_order(
                [m.oracle_error for m in members], [m.spacing for m in members]
            ),
        })
    return studies


class SweepRunner:
    """Runs every point of a sweep in a thread pool and writes sweep.json."""

    def __init__(
        self,
        config: ExperimentConfig,
        jobs: int = 1,
        force: bool = False,
        console: Optional[Console] = None,
    ):
        """Initialize the runner.

        Args:
            config: Config whose sweep block lists the values to cross
            jobs: Runs executed in parallel
            force: Continue past failed assumption checks
            console: Console for the progress display
        """
        self.config = config
        self.jobs = max(1, int(jobs))
        self.force = force
        self.console = console or Console()
        self.root = Path(config.output_dir)

    def run(self) -> List[SweepResult]:
        points = sweep_points(self.config.sweep)
        configs = [point_config(self.config, pt, self.root / pt.label()) for pt in points]
        results: Dict[str, SweepResult] = {}

        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            console=self.console,
            transient=True,
        ) as progress:
            tasks = {
                pt.label(): progress.add_task(f"[cyan]{pt.label()}[/cyan] running...", total=None)
                for pt in points
            }
            with ThreadPoolExecutor(max_workers=self.jobs) as executor:
                future_to_point = {
                    executor.submit(run_point, cfg, pt, self.force): pt
                    for cfg, pt in zip(configs, points)
                }
                for future in as_completed(future_to_point):
                    pt = future_to_point[future]
                    results[pt.label()] = future.result()
                    progress.remove_task(tasks[pt.label()])

        ordered = [results[pt.label()] for pt in points]
        RunArtifacts(self.root).write_json("sweep.json", {
            "config_hash": self.config.config_hash(),
            "runs": [r.to_dict() for r in ordered],
            "convergence": convergence_studies(ordered),
        })
        return ordered
