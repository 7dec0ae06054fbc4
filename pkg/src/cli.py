"""CLI interface for the exterior decay lab."""
import functools
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import click
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from src import __version__
from src.errors import LabError
from src.log import configure_logging
from src.models.reports import Verdict
from src.runner import Experiment, RunArtifacts, SweepRunner
from src.settings import ExperimentConfig, create_example_config, load_experiment


console = Console()

VERDICT_STYLE = {
    Verdict.PASS.value: "green",
    Verdict.FAIL.value: "red",
    Verdict.INCONCLUSIVE.value: "yellow",
}
# Worst verdict first
VERDICT_ORDER = {Verdict.FAIL.value: 0, Verdict.PASS.value: 1, Verdict.INCONCLUSIVE.value: 2}


def _fmt(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _verdict(value: str) -> str:
    style = VERDICT_STYLE.get(value, "white")
    return f"[{style}]{value}[/{style}]"


def summarize_checks(rows: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
    """Collapse per-level rows into one row per check.

    A check fails if any of its rows fails, passes if any passes, and is
    inconclusive otherwise. The constant shown is the largest measured.
    """
    grouped: Dict[str, Dict[str, Any]] = {}
    for row in rows:
        entry = grouped.setdefault(
            row["check"], {"check": row["check"], "rows": 0, "verdicts": set(), "constant": None}
        )
        entry["rows"] += 1
        entry["verdicts"].add(row["verdict"])
        constant = row.get("constant")
        if isinstance(constant, (int, float)):
            entry["constant"] = constant if entry["constant"] is None else max(entry["constant"], constant)
    summary = []
    for entry in grouped.values():
        verdicts = entry.pop("verdicts")
        entry["verdict"] = min(verdicts, key=lambda v: VERDICT_ORDER.get(v, 3))
        summary.append(entry)
    return summary


def print_check_table(rows: List[Dict[str, Any]], title: str) -> None:
    """Render the per-check summary."""
    table = Table(title=title)
    table.add_column("Check", style="bold")
    table.add_column("Rows", justify="right")
    table.add_column("Verdict")
    table.add_column("Constant", justify="right")
    for entry in summarize_checks(rows):
        table.add_row(entry["check"], str(entry["rows"]), _verdict(entry["verdict"]), _fmt(entry["constant"]))
    console.print(table)


def lab_command(func):
    """Turn LabErrors into a message and the error's exit code."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except LabError as e:
            console.print(f"[red]Error: {e}[/red]")
            sys.exit(e.exit_code)
    return wrapper


def experiment_options(func):
    """--config, --out and --grid-scale."""
    func = click.option("--grid-scale", "-k", type=float, default=None,
                        help="Multiply the node counts by K")(func)
    func = click.option("--out", "-o", "out", type=click.Path(), default=None,
                        help="Run directory (overrides output_dir)")(func)
    func = click.option("--config", "-c", "config_path", type=click.Path(exists=True), default=None,
                        help="Experiment config (YAML or JSON)")(func)
    return func


def load_config(config_path: Optional[str], out: Optional[str], grid_scale: Optional[float]) -> ExperimentConfig:
    """Load the experiment config with CLI overrides."""
    overrides = {"output_dir": out, "grid_scale": grid_scale}
    return load_experiment(Path(config_path) if config_path else None, overrides)


def print_header(config: ExperimentConfig, command: str) -> None:
    spec = config.domain_spec()
    console.print()
    console.print(Panel(
        f"[bold]Family:[/bold] {config.coefficients.family} {config.coefficients.params or ''}\n"
        f"[bold]Domain:[/bold] r0={spec.obstacle_radius:g}, R={spec.enclosing_radius:g}, "
        f"R_out={spec.truncation_radius:g}, {spec.n_radial}x{spec.n_angular} nodes\n"
        f"[bold]p:[/bold] {config.p:g}\n"
        f"[bold]Run directory:[/bold] {config.output_dir}",
        title=f"[bold cyan]{command}[/bold cyan]",
        border_style="cyan",
    ))


@click.group()
@click.version_option(version=__version__, prog_name="edlab")
def cli():
    """Exterior decay lab - elliptic solutions outside an obstacle.

    Solves divergence-form elliptic equations on truncated exterior
    polar domains, checks the level-set identities behind the decay
    estimate numerically, and measures the decay rate against
    |x|^(-2/p).

    \b
    Commands write into one run directory:
    - solve:  solution.csv, convergence.csv, solve.json
    - verify: verify.json, verify.csv, curves.csv
    - decay:  decay.json, prefactor.csv, tails.csv
    - report: report.json (aggregated)

    Logging verbosity comes from the EDL_LOG environment variable.
    """
    configure_logging()


@cli.command()
@experiment_options
@lab_command
def solve(config_path: Optional[str], out: Optional[str], grid_scale: Optional[float]):
    """Solve L u = 0 and write the solution field.

    \b
    Examples:
        edlab solve --config configs/remark_optimal.yaml
        edlab solve -c configs/laplace.yaml --grid-scale 2 --out runs/laplace_fine
    """
    config = load_config(config_path, out, grid_scale)
    print_header(config, "Solve")
    with console.status("[cyan]Solving...[/cyan]"):
        outcome = Experiment(config).solve()

    table = Table(title="Solve")
    table.add_column("Quantity", style="bold")
    table.add_column("Value", justify="right")
    table.add_row("Method", outcome.log.method)
    table.add_row("Iterations", str(outcome.log.iterations))
    table.add_row("Final residual", _fmt(outcome.log.residuals[-1] if outcome.log.residuals else None))
    table.add_row("Max |L u|", _fmt(outcome.residual_max))
    table.add_row("Oracle error", _fmt(outcome.oracle_error))
    table.add_row("Maximum principle", _verdict(outcome.maximum_principle.verdict.value))
    console.print(table)


@cli.command()
@experiment_options
@click.option("--force", is_flag=True, help="Verify even when an assumption check fails")
@click.option("--jobs", "-j", default=1, type=int, help="Worker threads (default: 1)")
@lab_command
def verify(config_path: Optional[str], out: Optional[str], grid_scale: Optional[float],
           force: bool, jobs: int):
    """Run the level-set verification suite.

    Exits with 0 when every conclusive check passes and 1 otherwise.

    \b
    Examples:
        edlab verify --config configs/remark_optimal.yaml --jobs 4
        edlab verify -c configs/negative_reaction.yaml --force
    """
    config = load_config(config_path, out, grid_scale)
    print_header(config, "Verify")
    with console.status("[cyan]Verifying...[/cyan]"):
        outcome = Experiment(config, jobs=jobs, force=force).verify()

    rows = [
        {"check": r.check, "verdict": r.verdict.value, "constant": r.constant}
        for r in outcome.records
    ]
    print_check_table(rows, "Verification")
    if outcome.stopped:
        failed = ", ".join(r.check for r in outcome.failed)
        console.print(f"[red]Stopped after failed assumption checks: {failed}[/red]")
        console.print("[dim]Re-run with --force to verify anyway.[/dim]")
    elif outcome.t_star is not None:
        console.print(f"[dim]t_star = {outcome.t_star:.6g}, grad floor = {outcome.grad_floor:.3g}[/dim]")
    if not outcome.passed:
        sys.exit(1)


@cli.command()
@experiment_options
@click.option("--jobs", "-j", default=1, type=int, help="Worker threads (default: 1)")
@lab_command
def decay(config_path: Optional[str], out: Optional[str], grid_scale: Optional[float], jobs: int):
    """Fit the decay exponent and compute Lorentz norms.

    \b
    Examples:
        edlab decay --config configs/remark_optimal.yaml
    """
    config = load_config(config_path, out, grid_scale)
    print_header(config, "Decay")
    with console.status("[cyan]Analysing decay...[/cyan]"):
        outcome = Experiment(config, jobs=jobs).decay()

    report = outcome.report
    table = Table(title="Decay")
    table.add_column("Quantity", style="bold")
    table.add_column("Value", justify="right")
    table.add_row("Fitted exponent", _fmt(report.fitted_exponent))
    table.add_row("Reference exponent", _fmt(-report.theoretical_exponent))
    table.add_row("Max prefactor", _fmt(report.max_prefactor))
    table.add_row("Bounded (O)", _fmt(report.bounded))
    table.add_row("Vanishing (o)", _fmt(report.vanishing))
    table.add_row("Window spans a decade", _fmt(report.spans_decade))
    table.add_row("Verdict", _verdict(outcome.record.verdict.value))
    console.print(table)

    norms = Table(title="Lorentz norms")
    norms.add_column("p", justify="right")
    norms.add_column("q", justify="right")
    norms.add_column("Norm", justify="right")
    norms.add_column("Diverging in R", justify="right")
    trends = {trend["q"]: trend["diverging"] for trend in outcome.trends}
    for norm in outcome.norms:
        norms.add_row(_fmt(norm.p), _fmt(norm.q), _fmt(norm.value), _fmt(trends.get(norm.q)))
    console.print(norms)
    if outcome.zero_field:
        console.print("[dim]Field vanishes identically.[/dim]")
    elif not report.decays:
        console.print("[yellow]No decay within the fit window.[/yellow]")


@cli.command()
@click.argument("run_dir", type=click.Path())
@lab_command
def report(run_dir: str):
    """Aggregate a run directory into report.json.

    Needs verify.json and decay.json from earlier commands. Exits with 1
    when any check failed.

    \b
    Examples:
        edlab report runs/remark_optimal
    """
    artifacts = RunArtifacts(Path(run_dir))
    data = artifacts.write_report()
    print_check_table(data["checks"], f"Report: {run_dir}")

    counts = data["counts"]
    console.print(
        f"[green]{counts['PASS']} passed[/green], [red]{counts['FAIL']} failed[/red], "
        f"[yellow]{counts['INCONCLUSIVE']} inconclusive[/yellow]"
    )
    for norm in data["norms"]:
        console.print(f"[dim]L^({_fmt(norm['p'])},{_fmt(norm['q'])}) norm: {_fmt(norm['value'])}[/dim]")
    if data["verdict"] == Verdict.FAIL.value:
        sys.exit(1)


@cli.command()
@experiment_options
@click.option("--force", is_flag=True, help="Verify even when an assumption check fails")
@click.option("--jobs", "-j", default=1, type=int, help="Runs executed in parallel (default: 1)")
@lab_command
def sweep(config_path: Optional[str], out: Optional[str], grid_scale: Optional[float],
          force: bool, jobs: int):
    """Run solve, verify, decay and report for every sweep point.

    The sweep section of the config lists values of p, grid_scale and
    truncation_radius; every combination gets its own run directory.

    \b
    Examples:
        edlab sweep --config configs/convergence.yaml --jobs 4
    """
    config = load_config(config_path, out, grid_scale)
    if config.sweep.is_empty:
        raise click.UsageError("the config has no sweep section")
    print_header(config, "Sweep")
    results = SweepRunner(config, jobs=jobs, force=force, console=console).run()

    table = Table(title="Sweep")
    table.add_column("Run", style="bold")
    table.add_column("Oracle error", justify="right")
    table.add_column("Exponent", justify="right")
    table.add_column("Failed", justify="right")
    table.add_column("Exit", justify="right")
    for r in results:
        table.add_row(
            r.point.label(),
            _fmt(r.oracle_error),
            _fmt(r.fitted_exponent),
            str(r.counts.get("FAIL", "-")),
            str(r.exit_code) if not r.error else f"[red]{r.exit_code}[/red]",
        )
    console.print(table)
    worst = max((r.exit_code for r in results), default=0)
    if worst:
        sys.exit(worst)


@cli.command("init-config")
@click.argument("path", type=click.Path(), default="experiment.yaml")
def init_config(path: str):
    """Write an example experiment config.

    \b
    Examples:
        edlab init-config
        edlab init-config configs/my_run.yaml
    """
    config_path = Path(path)
    if config_path.exists():
        if not click.confirm(f"{config_path} already exists. Overwrite?"):
            console.print("[dim]Cancelled.[/dim]")
            return
    config_path.parent.mkdir(parents=True, exist_ok=True)
    create_example_config(config_path)
    console.print(f"[green]Created {config_path}[/green]")


def main():
    """Entry point for the CLI."""
    cli()


if __name__ == "__main__":
    main()
