"""End-to-end pipelines behind the solve, verify and decay commands."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from src.coefficients import CoefficientSet, builtin_family, validate_assumptions
from src.decay import (
    PREFACTOR_COLUMNS,
    decay_fit,
    decay_record,
    default_trend_radii,
    lorentz_norm,
    norm_trend,
    prefactor_rows,
    zero_report,
)
from src.errors import ConvergenceError, PreconditionError
from src.grid import DomainSpec, ScalarField, build_grid, read_field_csv, write_field_csv
from src.levels import LevelAnalysis, LevelSetFamily, build_family, region_Et
from src.log import get_logger
from src.models.reports import (
    AssumptionReport,
    ConvergenceLog,
    DecayReport,
    LorentzNorm,
    Verdict,
    VerificationRecord,
)
from src.runner.artifacts import RECORD_COLUMNS, RunArtifacts
from src.settings import ExperimentConfig, save_config
from src.solver import (
    BoundaryData,
    assemble,
    max_norm_error,
    maximum_principle_check,
    radial_oracle,
    residual,
    solve,
)
from src.verify import (
    CoareaWeight,
    chebyshev_measure_check,
    coarea_check,
    cutoff_identity_check,
    drift_flux_check,
    energy_bound_check,
    flux_balance_check,
    geometric_bound_check,
    gradient_flux_bound,
    key_lemma_check,
    mean_value_tau,
    nesting_check,
    null_set_shadow,
    topology_check,
)

logger = get_logger(__name__)

CONFIG_FILE = "config.yaml"
CURVE_COLUMNS = ["level", "component", "vertex", "x1", "x2"]
CONVERGENCE_COLUMNS = ["iteration", "residual"]
TAIL_COLUMNS = ["q", "t", "tail"]
# Per-level checks run on this many levels when none are configured
DEFAULT_CHECK_LEVELS = 3


def boundary_data_from(config: ExperimentConfig) -> BoundaryData:
    """Boundary data of a config; the matched exponent defaults to 2/p."""
    block = config.boundary
    exponent = block.decay_exponent
    if exponent is None and block.outer == "dirichlet_matched":
        exponent = 2.0 / config.p
    outer_values = block.outer_values
    if outer_values is not None:
        outer_values = np.atleast_1d(np.asarray(outer_values, dtype=float))
    return BoundaryData(
        inner_values=np.atleast_1d(np.asarray(block.inner, dtype=float)),
        outer_condition=block.outer,
        decay_exponent=exponent,
        outer_values=outer_values,
    )


def _skipped(check: str, inputs: Dict[str, float], reason: str) -> VerificationRecord:
    return VerificationRecord(
        check=check, inputs=inputs, verdict=Verdict.INCONCLUSIVE, details={"reason": reason}
    )


@dataclass
class SolveOutcome:
    """A solved field with its diagnostics.

    Attributes:
        field: Nodal solution
        log: Krylov convergence history
        residual_max: Max interior |L u| of the discrete operator
        oracle_error: Relative max-norm error against a closed form, if any
        maximum_principle: Maximum-principle record of the field
    """
    field: ScalarField
    log: ConvergenceLog
    residual_max: float
    oracle_error: Optional[float] = None
    maximum_principle: Optional[VerificationRecord] = None

    def to_dict(self) -> Dict[str, Any]:
        spec = self.field.domain
        return {
            "domain": spec.to_dict(),
            "method": self.log.method,
            "iterations": self.log.iterations,
            "attempts": self.log.attempts,
            "converged": self.log.converged,
            "residual_max": self.residual_max,
            "oracle_error": self.oracle_error,
            "maximum_principle": (
                self.maximum_principle.to_dict() if self.maximum_principle else None
            ),
        }


@dataclass
class VerifyOutcome:
    """All verification records of one run.

    Attributes:
        records: Records in emission order
        stopped: The run stopped after failed assumption checks
        t_star: min of u on |x| = R (None when stopped early)
        grad_floor: Regular-value floor used
        levels: Per-level summaries of the sampled family
    """
    records: List[VerificationRecord] = field(default_factory=list)
    stopped: bool = False
    t_star: Optional[float] = None
    grad_floor: Optional[float] = None
    levels: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def failed(self) -> List[VerificationRecord]:
        return [r for r in self.records if r.failed]

    @property
    def passed(self) -> bool:
        return not self.failed and not self.stopped

    def counts(self) -> Dict[str, int]:
        counts = {v.value: 0 for v in Verdict}
        for record in self.records:
            counts[record.verdict.value] += 1
        return counts


@dataclass
class DecayOutcome:
    """Decay fit and Lorentz norms of one field.

    Attributes:
        report: Pointwise decay fit
        norms: One norm per configured q
        trends: Truncated-norm trends per q
        zero_field: The field vanished identically
    """
    report: DecayReport
    norms: List[LorentzNorm] = field(default_factory=list)
    trends: List[Dict[str, Any]] = field(default_factory=list)
    zero_field: bool = False

    @property
    def record(self) -> VerificationRecord:
        return decay_record(self.report)


class Experiment:
    """Runs the pipelines of one experiment config into one run directory.

    The solution is shared between the commands: verify and decay reuse
    solution.csv when the run directory was produced by the same config,
    and solve first otherwise.
    """

    def __init__(
        self,
        config: ExperimentConfig,
        artifacts: Optional[RunArtifacts] = None,
        jobs: int = 1,
        force: bool = False,
    ):
        """Initialize the experiment.

        Args:
            config: Validated experiment config
            artifacts: Run directory; defaults to config.output_dir
            jobs: Worker threads for the parallel parts
            force: Continue past failed assumption checks
        """
        self.config = config
        self.artifacts = artifacts or RunArtifacts(config.output_dir)
        self.jobs = max(1, int(jobs))
        self.force = force
        self.config_hash = config.config_hash()
        self._coefficients: Optional[CoefficientSet] = None
        self._solution: Optional[ScalarField] = None

    @property
    def coefficients(self) -> CoefficientSet:
        if self._coefficients is None:
            block = self.config.coefficients
            self._coefficients = builtin_family(block.family, block.params)
        return self._coefficients

    @property
    def spec(self) -> DomainSpec:
        return self.config.domain_spec()

    def assumptions(self) -> AssumptionReport:
        v = self.config.verification
        return validate_assumptions(
            self.coefficients,
            self.spec,
            n_samples=v.n_samples,
            seed=self.config.seed,
            c4_increment_tol=v.c4_increment_tol,
        )

    def _update_manifest(self) -> None:
        """Write the resolved config next to the outputs, then refresh the manifest."""
        self.artifacts.register(save_config(self.config, self.artifacts.path(CONFIG_FILE)))
        self.artifacts.update_manifest(self.config_hash)

    # Solve

    def solve(self) -> SolveOutcome:
        """Assemble, solve and write solution.csv, convergence.csv and solve.json.

        Raises:
            ConvergenceError: After writing the residual history of every
                attempt to convergence.csv
        """
        coeffs, spec = self.coefficients, self.spec
        bdata = boundary_data_from(self.config)
        op = assemble(coeffs, spec, bdata)
        try:
            result = solve(op, tol=self.config.solver.tol, max_iter=self.config.solver.max_iter)
        except ConvergenceError as e:
            self._write_history(e.history)
            self._update_manifest()
            raise

        u = result.field
        _, res_max = residual(coeffs, spec, u)
        exact = radial_oracle(coeffs, spec, bdata)
        error = max_norm_error(u, exact) if exact is not None else None
        outcome = SolveOutcome(
            field=u,
            log=result.log,
            residual_max=res_max,
            oracle_error=error,
            maximum_principle=maximum_principle_check(u).to_record(),
        )
        if error is not None:
            logger.info("max-norm error against the closed form: %.3e", error)

        self.artifacts.register(write_field_csv(u, self.artifacts.path("solution.csv")))
        self._write_history(result.log.residuals)
        self.artifacts.write_json("solve.json", {"config_hash": self.config_hash, **outcome.to_dict()})
        self._update_manifest()
        self._solution = u
        return outcome

    def _write_history(self, history: List[float]) -> None:
        self.artifacts.write_csv(
            "convergence.csv",
            CONVERGENCE_COLUMNS,
            [[k + 1, r] for k, r in enumerate(history)],
        )

    def solution(self) -> ScalarField:
        """The solved field: cached, reloaded from the run, or solved now."""
        if self._solution is not None:
            return self._solution
        manifest = self.artifacts.load_manifest()
        if (
            manifest is not None
            and manifest.config_hash == self.config_hash
            and self.artifacts.exists("solution.csv")
        ):
            logger.info("reusing %s", self.artifacts.path("solution.csv"))
            self._solution = read_field_csv(self.artifacts.path("solution.csv"), build_grid(self.spec))
            return self._solution
        return self.solve().field

    # Verify

    def verify(self) -> VerifyOutcome:
        """Run the full verification suite and write verify.json, verify.csv and curves.csv.

        Failed assumption checks stop the run before the solve unless
        force is set.
        """
        outcome = VerifyOutcome()
        report = self.assumptions()
        outcome.records.extend(report.to_records())
        if report.failed_checks and not self.force:
            logger.warning(
                "stopping before verification: %s failed (use --force to continue)",
                ", ".join(report.failed_checks),
            )
            outcome.stopped = True
            self._write_verify(outcome, report)
            return outcome

        u = self.solution()
        outcome.records.append(maximum_principle_check(u).to_record())

        v = self.config.verification
        analysis = LevelAnalysis(u)
        analysis.grad_floor = (
            v.grad_floor if v.grad_floor is not None else v.grad_floor_fraction * analysis.grad_norm.max()
        )
        outcome.t_star = analysis.t_star()
        outcome.grad_floor = analysis.grad_floor

        family = build_family(analysis, n_levels=v.n_levels, jobs=self.jobs)
        outcome.levels = family.summary()
        outcome.records.append(topology_check(family))
        outcome.records.extend(nesting_check(analysis, family))

        usable = [
            t for t in family.tilde_regular_levels()
            if analysis.gamma(t) is not None and analysis.gamma(0.5 * t) is not None
        ]
        outcome.records.extend(self._level_checks(analysis, usable))
        self._write_verify(outcome, report)
        self._write_curves(family)
        self._update_manifest()
        return outcome

    def check_levels(self, usable: List[float]) -> List[float]:
        """Configured check levels, or three spread over the usable ones."""
        configured = self.config.verification.check_levels
        if configured:
            return sorted(float(t) for t in configured)
        if len(usable) <= DEFAULT_CHECK_LEVELS:
            return list(usable)
        picks = np.linspace(0, len(usable) - 1, DEFAULT_CHECK_LEVELS).round().astype(int)
        return [usable[k] for k in sorted(set(picks))]

    def _level_checks(self, analysis: LevelAnalysis, usable: List[float]) -> List[VerificationRecord]:
        v = self.config.verification
        p = self.config.p
        coeffs = self.coefficients
        slack = float(analysis.grid.radial_steps.max())
        records: List[VerificationRecord] = []
        if not usable:
            return [_skipped("gradient_flux_bound", {"levels": 0}, "no tilde-regular levels")]

        chosen = self.check_levels(usable)
        outside = [t for t in chosen if not 0 < t < analysis.t_star()]
        if outside:
            raise PreconditionError(
                f"verification.check_levels {outside} lie outside (0, t_star={analysis.t_star():g})"
            )
        ready = [
            t for t in chosen
            if t in usable or (analysis.gamma(t) is not None and analysis.gamma(0.5 * t) is not None)
        ]
        wanted = sorted(set(usable) | set(ready))
        with ThreadPoolExecutor(max_workers=self.jobs) as executor:
            regions = dict(zip(wanted, executor.map(lambda t: region_Et(analysis, t), wanted)))

        flux = gradient_flux_bound(analysis, usable, growth_tol=v.growth_tol)
        records.append(flux)
        c_star = flux.constant
        truncation = bool(flux.details.get("truncation_dominated"))

        for t in usable:
            region = regions[t]
            records.append(energy_bound_check(analysis, t, c_star, tol=v.coarea_tol, region=region))
            records.append(chebyshev_measure_check(analysis, t, p, tol=v.coarea_tol, region=region))
            tau, record = mean_value_tau(analysis, t, c_star, p, n_tau=v.n_tau, region=region)
            records.append(record)
            if tau is not None:
                records.append(self._geometric_bound(analysis, t, tau, slack))

        summary, per_level = key_lemma_check(
            analysis, usable, p, growth_tol=v.growth_tol, regions=regions,
            truncation_dominated=truncation,
        )
        records.append(summary)
        records.extend(per_level)

        for t in chosen:
            if t not in regions:
                reason = "gamma(t) or gamma(t/2) is missing"
                for check in ("coarea", "coarea", "null_set_shadow", "cutoff_identity", "drift_flux"):
                    records.append(_skipped(check, {"t": t}, reason))
                continue
            region = regions[t]
            records.append(coarea_check(analysis, t, CoareaWeight.ONE, v.n_tau, v.coarea_tol, region))
            records.append(coarea_check(analysis, t, CoareaWeight.GRAD, v.n_tau, v.coarea_tol, region))
            records.append(null_set_shadow(analysis, t, v.n_tau, v.coarea_tol, region))
            records.append(self._cutoff_identity(analysis, t))
            records.append(drift_flux_check(analysis, coeffs, t, tol=v.coarea_tol))

        if len(usable) >= 2:
            records.append(flux_balance_check(analysis, coeffs, usable[0], usable[-1], tol=v.coarea_tol))
        return records

    def _geometric_bound(
        self, analysis: LevelAnalysis, t: float, tau: float, slack: float
    ) -> VerificationRecord:
        try:
            return geometric_bound_check(analysis.require_gamma(t), analysis.require_gamma(tau), slack)
        except PreconditionError as e:
            logger.warning("geometric bound at t=%g: %s", t, e)
            return VerificationRecord(
                check="geometric_bound",
                inputs={"t": t, "tau": tau},
                tolerance=slack,
                verdict=Verdict.FAIL,
                details={"reason": str(e)},
            )

    def _cutoff_identity(self, analysis: LevelAnalysis, t: float) -> VerificationRecord:
        v = self.config.verification
        try:
            return cutoff_identity_check(analysis, self.coefficients, t, rho=v.rho, tol=v.identity_tol)
        except PreconditionError as e:
            if v.rho is not None:
                raise PreconditionError(f"cutoff_identity: {e}") from e
            return _skipped("cutoff_identity", {"t": t}, str(e))

    def _write_verify(self, outcome: VerifyOutcome, report: AssumptionReport) -> None:
        data = {
            "config_hash": self.config_hash,
            "family": self.coefficients.to_dict(),
            "assumptions": report.to_dict(),
            "stopped": outcome.stopped,
            "t_star": outcome.t_star,
            "grad_floor": outcome.grad_floor,
            "levels": outcome.levels,
            "counts": outcome.counts(),
            "records": [r.to_dict() for r in outcome.records],
            "verdict": Verdict.PASS.value if outcome.passed else Verdict.FAIL.value,
        }
        self.artifacts.write_json("verify.json", data)
        self.artifacts.write_rows("verify.csv", RECORD_COLUMNS, [r.csv_row() for r in outcome.records])
        if outcome.stopped:
            self._update_manifest()

    def _write_curves(self, family: LevelSetFamily) -> None:
        rows = []
        for t in family.levels:
            for k, curve in enumerate(family.entries[t].curves):
                for n, (x, y) in enumerate(curve.vertices):
                    rows.append([t, k, n, x, y])
        self.artifacts.write_csv("curves.csv", CURVE_COLUMNS, rows)

    # Decay

    def decay(self) -> DecayOutcome:
        """Decay fit, Lorentz norms and norm trends; writes decay.json, prefactor.csv, tails.csv.

        Raises:
            DecayFitError: Empty fit window or non-positive values in it
        """
        u = self.solution()
        p = self.config.p
        a = self.config.analysis
        if np.abs(u.values).max() == 0:
            logger.info("field vanishes identically; all norms are 0")
            outcome = DecayOutcome(
                report=zero_report(p),
                norms=[LorentzNorm(p=p, q=q, value=0.0) for q in a.q],
                zero_field=True,
            )
        else:
            report = decay_fit(u, p, window=tuple(a.window))
            norms = [lorentz_norm(u, p, q, jobs=self.jobs) for q in a.q]
            radii = a.trend_radii or default_trend_radii(u)
            trends = [norm_trend(u, p, q, radii, jobs=self.jobs) for q in a.q]
            outcome = DecayOutcome(report=report, norms=norms, trends=trends)

        data = {
            "config_hash": self.config_hash,
            "report": outcome.report.to_dict(),
            "norms": [n.to_dict() for n in outcome.norms],
            "trends": [_trend_dict(tr) for tr in outcome.trends],
            "records": [outcome.record.to_dict()],
            "zero_field": outcome.zero_field,
        }
        self.artifacts.write_json("decay.json", data)
        self.artifacts.write_csv("prefactor.csv", PREFACTOR_COLUMNS, prefactor_rows(outcome.report))
        self.artifacts.write_csv(
            "tails.csv",
            TAIL_COLUMNS,
            [[n.q, t, tail] for n in outcome.norms for t, tail in zip(n.levels, n.tail_profile)],
        )
        self._update_manifest()
        return outcome


def _trend_dict(trend: Dict[str, Any]) -> Dict[str, Any]:
    out = dict(trend)
    if np.isinf(out["q"]):
        out["q"] = "inf"
    return out
