"""Report data models shared by the verification, analysis and runner layers."""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional


class Verdict(Enum):
    """Outcome of a single numerical check."""
    PASS = "PASS"
    FAIL = "FAIL"
    INCONCLUSIVE = "INCONCLUSIVE"

    @classmethod
    def of(cls, holds: bool) -> "Verdict":
        """Map a boolean relation to PASS/FAIL."""
        return cls.PASS if holds else cls.FAIL


def _clean(value: Any) -> Any:
    """Convert numpy scalars and containers to plain JSON types."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, Enum):
        return value.value
    if hasattr(value, "item") and callable(value.item):
        return value.item()
    return value


@dataclass
class VerificationRecord:
    """One check of an identity or inequality.

    Attributes:
        check: Name of the check (e.g. "coarea", "key_lemma")
        inputs: Parameters the check ran with (t, tau, rho, ...)
        lhs: Left-hand value of the relation
        rhs: Right-hand value of the relation
        constant: Measured constant, if the check produces one
        tolerance: Tolerance the verdict was decided with
        verdict: PASS, FAIL or INCONCLUSIVE
        details: Extra diagnostics (term breakdowns, sequences)
    """
    check: str
    inputs: Dict[str, float] = field(default_factory=dict)
    lhs: Optional[float] = None
    rhs: Optional[float] = None
    constant: Optional[float] = None
    tolerance: Optional[float] = None
    verdict: Verdict = Verdict.INCONCLUSIVE
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        """Check whether the record passed."""
        return self.verdict == Verdict.PASS

    @property
    def failed(self) -> bool:
        """Check whether the record failed (inconclusive does not count)."""
        return self.verdict == Verdict.FAIL

    def to_dict(self) -> Dict[str, Any]:
        """Convert record to a JSON-ready dictionary."""
        return _clean({
            "check": self.check,
            "inputs": self.inputs,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "constant": self.constant,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "details": self.details,
        })

    def csv_row(self) -> List[Any]:
        """Flat row: check, t, lhs, rhs, constant, verdict."""
        return [
            self.check,
            self.inputs.get("t"),
            self.lhs,
            self.rhs,
            self.constant,
            self.verdict.value,
        ]


@dataclass
class AssumptionReport:
    """Numerical evidence for the coefficient assumptions.

    Attributes:
        family: Coefficient family name
        c1_min_eigenvalue: Smallest eigenvalue of the symmetrized matrix
        c2_decay_constants: (sup |x|·|grad a|, sup |x|·|b|) over samples
        c2_profiles: Per-radius constants behind c2_decay_constants
        c3_min_c: Smallest sampled reaction coefficient
        c4_integral: Integral of (div b - c)_- over the truncated domain
        c4_tail_trend: Partial integrals for the increasing radii
        c4_radii: Radii the partial integrals were taken at
        verdicts: Verdict per assumption key ("C1".."C4")
    """
    family: str
    c1_min_eigenvalue: float
    c2_decay_constants: List[float]
    c3_min_c: float
    c4_integral: float
    c4_tail_trend: List[float]
    c4_radii: List[float] = field(default_factory=list)
    c2_profiles: Dict[str, List[float]] = field(default_factory=dict)
    verdicts: Dict[str, Verdict] = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        """True if every assumption check passed."""
        return all(v == Verdict.PASS for v in self.verdicts.values())

    @property
    def failed_checks(self) -> List[str]:
        """Names of the failed assumptions."""
        return [k for k, v in sorted(self.verdicts.items()) if v == Verdict.FAIL]

    def to_dict(self) -> Dict[str, Any]:
        """Convert report to a JSON-ready dictionary."""
        return _clean({
            "family": self.family,
            "c1_min_eigenvalue": self.c1_min_eigenvalue,
            "c2_decay_constants": self.c2_decay_constants,
            "c2_profiles": self.c2_profiles,
            "c3_min_c": self.c3_min_c,
            "c4_integral": self.c4_integral,
            "c4_tail_trend": self.c4_tail_trend,
            "c4_radii": self.c4_radii,
            "verdicts": self.verdicts,
        })

    def to_records(self) -> List[VerificationRecord]:
        """Express the report as verification records."""
        return [
            VerificationRecord(
                check="assumption_c1",
                lhs=self.c1_min_eigenvalue,
                verdict=self.verdicts.get("C1", Verdict.INCONCLUSIVE),
            ),
            VerificationRecord(
                check="assumption_c2",
                lhs=self.c2_decay_constants[0],
                rhs=self.c2_decay_constants[1],
                verdict=self.verdicts.get("C2", Verdict.INCONCLUSIVE),
            ),
            VerificationRecord(
                check="assumption_c3",
                lhs=self.c3_min_c,
                verdict=self.verdicts.get("C3", Verdict.INCONCLUSIVE),
            ),
            VerificationRecord(
                check="assumption_c4",
                lhs=self.c4_integral,
                verdict=self.verdicts.get("C4", Verdict.INCONCLUSIVE),
                details={"tail_trend": self.c4_tail_trend, "radii": self.c4_radii},
            ),
        ]


@dataclass
class LorentzNorm:
    """A Lorentz quasi-norm of a discrete field.

    Attributes:
        p: Integrability exponent (>= 1)
        q: Fine exponent (>= 1, or inf)
        value: The computed norm
        levels: t-grid used for the layer-cake quadrature
        tail_profile: t * |{u >= t}|^(1/p) on the t-grid
    """
    p: float
    q: float
    value: float
    levels: List[float] = field(default_factory=list)
    tail_profile: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        """Convert norm to a JSON-ready dictionary."""
        return _clean({
            "p": self.p,
            "q": "inf" if self.q == float("inf") else self.q,
            "value": self.value,
            "levels": self.levels,
            "tail_profile": self.tail_profile,
        })


@dataclass
class DecayReport:
    """Measured pointwise decay of a field against the |x|^(-2/p) rate.

    Attributes:
        p: Integrability exponent
        fitted_exponent: Slope of log max_theta u against log r
        theoretical_exponent: 2/p
        max_prefactor: sup over window nodes of u(x)|x|^(2/p)
        radii: Window radii
        radial_max: max over angle of u per window radius
        vanishing_trend: Prefactor max_theta u * r^(2/p) per radius
        bounded: O-verdict (prefactor bounded across the window)
        vanishing: o-verdict (prefactor decreasing by the configured drop)
        decays: False when the fitted exponent shows no decay
        spans_decade: Whether the window covers a full decade of radii
    """
    p: float
    fitted_exponent: float
    theoretical_exponent: float
    max_prefactor: float
    radii: List[float] = field(default_factory=list)
    radial_max: List[float] = field(default_factory=list)
    vanishing_trend: List[float] = field(default_factory=list)
    bounded: bool = False
    vanishing: bool = False
    decays: bool = True
    spans_decade: bool = False

    def to_dict(self) -> Dict[str, Any]:
        """Convert report to a JSON-ready dictionary."""
        return _clean({
            "p": self.p,
            "fitted_exponent": self.fitted_exponent,
            "theoretical_exponent": self.theoretical_exponent,
            "max_prefactor": self.max_prefactor,
            "radii": self.radii,
            "radial_max": self.radial_max,
            "vanishing_trend": self.vanishing_trend,
            "bounded": self.bounded,
            "vanishing": self.vanishing,
            "decays": self.decays,
            "spans_decade": self.spans_decade,
        })


@dataclass
class ConvergenceLog:
    """Iteration history of a Krylov solve.

    Attributes:
        method: Solver that produced the accepted solution
        iterations: Iteration count of the accepted attempt
        residuals: Relative residual per iteration (all attempts)
        attempts: Methods tried, in order
        converged: Whether the tolerance was met
    """
    method: str = ""
    iterations: int = 0
    residuals: List[float] = field(default_factory=list)
    attempts: List[str] = field(default_factory=list)
    converged: bool = False

    def to_dict(self) -> Dict[str, Any]:
        """Convert log to a JSON-ready dictionary."""
        return _clean({
            "method": self.method,
            "iterations": self.iterations,
            "residuals": self.residuals,
            "attempts": self.attempts,
            "converged": self.converged,
        })


@dataclass
class RunManifest:
    """Provenance of a run directory.

    Attributes:
        config_hash: SHA256 of the canonical config JSON
        tool_version: Package version that produced the run
        started_at: ISO timestamp of the first command
        updated_at: ISO timestamp of the latest command
        artifacts: Emitted files mapped to their SHA256 checksums
    """
    config_hash: str
    tool_version: str
    started_at: str
    updated_at: str
    artifacts: Dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        """Convert manifest to a JSON-ready dictionary."""
        return {
            "config_hash": self.config_hash,
            "tool_version": self.tool_version,
            "started_at": self.started_at,
            "updated_at": self.updated_at,
            "artifacts": [
                {"path": path, "sha256": digest}
                for path, digest in sorted(self.artifacts.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunManifest":
        """Rebuild a manifest from its dictionary form."""
        return cls(
            config_hash=data["config_hash"],
            tool_version=data["tool_version"],
            started_at=data["started_at"],
            updated_at=data["updated_at"],
            artifacts={a["path"]: a["sha256"] for a in data.get("artifacts", [])},
        )
