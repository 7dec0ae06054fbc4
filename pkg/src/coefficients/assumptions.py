"""Numerical evidence for the coefficient assumptions C1-C4.

C1  uniform ellipticity: a xi . xi >= lambda |xi|^2
C2  decay: grad a = O(1/|x|) and b = O(1/|x|)
C3  c >= 0
C4  (div b - c)_- integrable over the domain

The decay and integrability conditions are asymptotic; on a truncated
domain they are replaced by boundedness and Cauchy tests with explicit
tolerances.
"""
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.stats import qmc

from src.coefficients.families import CoefficientSet
from src.errors import ConfigurationError
from src.grid.domain import DomainSpec
from src.log import get_logger
from src.models.reports import AssumptionReport, Verdict

logger = get_logger(__name__)

# Slope above which a per-radius constant counts as growing
C2_GROWTH_SLOPE = 0.1
# Increments below this are treated as zero
C4_ABSOLUTE_FLOOR = 1e-10


def sample_points(spec: DomainSpec, n_samples: int, seed: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """Quasi-random points distributed uniformly by area in the annulus.

    Args:
        spec: Domain
        n_samples: Number of points
        seed: Halton scrambling seed

    Returns:
        (x1, x2) coordinate arrays
    """
    unit = qmc.Halton(d=2, scramble=True, seed=seed).random(n_samples)
    r0, r_out = spec.obstacle_radius, spec.truncation_radius
    r = np.sqrt(r0 ** 2 + unit[:, 0] * (r_out ** 2 - r0 ** 2))
    theta = 2.0 * np.pi * unit[:, 1]
    return r * np.cos(theta), r * np.sin(theta)


def check_c1(
    coeffs: CoefficientSet,
    spec: DomainSpec,
    n_samples: int = 256,
    seed: int = 0,
    tol: float = 1e-10,
) -> Tuple[float, Verdict]:
    """Smallest eigenvalue of the symmetrized matrix over sample points."""
    if n_samples < 100:
        raise ConfigurationError(
            f"need at least 100 samples, got {n_samples}", field="verification.n_samples"
        )
    x, y = sample_points(spec, n_samples, seed)
    a = coeffs.matrix(x, y)
    sym = 0.5 * (a + np.swapaxes(a, -1, -2))
    min_eig = float(np.min(np.linalg.eigvalsh(sym)[..., 0]))
    return min_eig, Verdict.of(min_eig >= coeffs.lambda_claimed - tol)


def _growth_slope(radii: np.ndarray, profile: np.ndarray) -> float:
    """Log-log slope of a per-radius profile (0 for a vanishing profile)."""
    positive = profile > 1e-14
    if positive.sum() < 2:
        return 0.0
    slope, _ = np.polyfit(np.log(radii[positive]), np.log(profile[positive]), 1)
    return float(slope)


def check_c2(
    coeffs: CoefficientSet,
    spec: DomainSpec,
    n_radii: int = 32,
    n_angles: int = 64,
) -> Tuple[List[float], Verdict, dict]:
    """Per-radius decay constants sup_theta |x| * max|grad a| and |x| * |b|.

    The verdict fails when either profile grows (log-log slope above
    C2_GROWTH_SLOPE) over the outer decade of radii, or over the outer half
    of the samples when the domain spans less than a decade beyond R.

    Returns:
        ([sup of |x| max|grad a|, sup of |x| |b|], verdict, profiles)
    """
    radii = np.geomspace(spec.enclosing_radius, spec.truncation_radius, n_radii)
    theta = 2.0 * np.pi * np.arange(n_angles) / n_angles
    rr, tt = np.meshgrid(radii, theta, indexing="ij")
    x, y = rr * np.cos(tt), rr * np.sin(tt)

    grad_a = np.abs(np.asarray(coeffs.grad_a(x, y))).reshape(rr.shape + (-1,)).max(axis=-1)
    b = np.linalg.norm(np.asarray(coeffs.b(x, y)), axis=-1)
    profile_a = radii * grad_a.max(axis=1)
    profile_b = radii * b.max(axis=1)

    if spec.truncation_radius / spec.enclosing_radius >= 10.0:
        outer = radii >= spec.truncation_radius / 10.0
    else:
        outer = np.arange(n_radii) >= n_radii // 2
    slopes = (
        _growth_slope(radii[outer], profile_a[outer]),
        _growth_slope(radii[outer], profile_b[outer]),
    )
    verdict = Verdict.of(max(slopes) <= C2_GROWTH_SLOPE)
    profiles = {
        "radii": radii.tolist(),
        "grad_a": profile_a.tolist(),
        "b": profile_b.tolist(),
        "slopes": list(slopes),
    }
    return [float(profile_a.max()), float(profile_b.max())], verdict, profiles


def check_c3(
    coeffs: CoefficientSet,
    spec: DomainSpec,
    n_samples: int = 256,
    seed: int = 0,
    tol: float = 1e-10,
) -> Tuple[float, Verdict]:
    """Smallest reaction coefficient over sample points."""
    x, y = sample_points(spec, n_samples, seed)
    min_c = float(np.min(coeffs.c(x, y)))
    return min_c, Verdict.of(min_c >= -tol)


def default_c4_radii(spec: DomainSpec) -> List[float]:
    """Doubling radii R_out / 2^k inside (R, R_out], at least two of them."""
    radii = []
    radius = spec.truncation_radius
    while radius > spec.enclosing_radius:
        radii.append(radius)
        radius /= 2.0
    if len(radii) < 2:
        radii.append(0.5 * (spec.enclosing_radius + spec.truncation_radius))
    return sorted(radii)


def check_c4(
    coeffs: CoefficientSet,
    spec: DomainSpec,
    radii_sequence: Optional[Sequence[float]] = None,
    increment_tol: float = 1e-2,
    n_angles: int = 64,
    nodes_per_segment: int = 257,
) -> Tuple[List[float], Verdict]:
    """Partial integrals of (div b - c)_- over r0 <= |x| <= R_k.

    The verdict passes when every increment is below C4_ABSOLUTE_FLOOR, or
    when the last increment is below increment_tol times the first.

    Args:
        coeffs: Coefficients
        spec: Domain
        radii_sequence: Increasing radii in (R, R_out]; default doubling radii
        increment_tol: Cauchy ratio threshold
        n_angles: Angular quadrature points
        nodes_per_segment: Radial quadrature points between consecutive radii

    Returns:
        (partial integrals, verdict)
    """
    radii = list(radii_sequence) if radii_sequence is not None else default_c4_radii(spec)
    radii_arr = np.asarray(radii, dtype=float)
    if (
        len(radii_arr) < 2
        or np.any(np.diff(radii_arr) <= 0)
        or radii_arr[0] <= spec.enclosing_radius
        or radii_arr[-1] > spec.truncation_radius
    ):
        raise ConfigurationError(
            f"radii must be increasing within ({spec.enclosing_radius}, {spec.truncation_radius}]",
            field="verification.c4_radii",
        )

    theta = 2.0 * np.pi * np.arange(n_angles) / n_angles
    bounds = np.concatenate([[spec.obstacle_radius], radii_arr])
    partial = []
    total = 0.0
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        r = np.geomspace(lo, hi, nodes_per_segment)
        rr, tt = np.meshgrid(r, theta, indexing="ij")
        x, y = rr * np.cos(tt), rr * np.sin(tt)
        f = np.maximum(0.0, -(coeffs.div_b(x, y) - coeffs.c(x, y)))
        ring = 2.0 * np.pi * f.mean(axis=1) * r
        total += float(trapezoid(ring, r))
        partial.append(total)

    increments = np.diff(np.concatenate([[0.0], partial]))
    if np.all(np.abs(increments) < C4_ABSOLUTE_FLOOR):
        verdict = Verdict.PASS
    else:
        verdict = Verdict.of(increments[-1] < increment_tol * increments[0])
    return partial, verdict


def check_derivatives(
    coeffs: CoefficientSet,
    spec: DomainSpec,
    n_samples: int = 100,
    seed: int = 1,
) -> Tuple[float, float]:
    """Compare analytic grad_a and div_b with central differences.

    The step follows the cube-root-of-epsilon rule scaled by max(1, |x|).

    Returns:
        (max relative error of grad_a, max relative error of div_b)
    """
    x, y = sample_points(spec, n_samples, seed)
    h = np.cbrt(np.finfo(float).eps) * np.maximum(1.0, np.hypot(x, y))

    da_dx = (coeffs.matrix(x + h, y) - coeffs.matrix(x - h, y)) / (2 * h)[:, None, None]
    da_dy = (coeffs.matrix(x, y + h) - coeffs.matrix(x, y - h)) / (2 * h)[:, None, None]
    numeric_grad = np.stack([da_dx, da_dy], axis=-1)
    analytic_grad = np.asarray(coeffs.grad_a(x, y))
    scale = np.maximum(1.0, np.abs(analytic_grad))
    grad_err = float(np.max(np.abs(numeric_grad - analytic_grad) / scale))

    bx = (coeffs.b(x + h, y)[:, 0] - coeffs.b(x - h, y)[:, 0]) / (2 * h)
    by = (coeffs.b(x, y + h)[:, 1] - coeffs.b(x, y - h)[:, 1]) / (2 * h)
    analytic_div = np.asarray(coeffs.div_b(x, y))
    div_err = float(np.max(np.abs(bx + by - analytic_div) / np.maximum(1.0, np.abs(analytic_div))))
    return grad_err, div_err


def validate_assumptions(
    coeffs: CoefficientSet,
    spec: DomainSpec,
    n_samples: int = 256,
    seed: int = 0,
    tol: float = 1e-10,
    c4_increment_tol: float = 1e-2,
    c4_radii: Optional[Sequence[float]] = None,
) -> AssumptionReport:
    """Run all four assumption checks.

    Args:
        coeffs: Coefficients to validate
        spec: Domain the checks sample
        n_samples: Quasi-random sample count for C1 and C3
        seed: Sampling seed
        tol: Absolute tolerance for C1 and C3
        c4_increment_tol: Cauchy ratio for C4
        c4_radii: Optional radii for the C4 partial integrals

    Returns:
        AssumptionReport with raw numbers and per-assumption verdicts
    """
    c1, v1 = check_c1(coeffs, spec, n_samples, seed, tol)
    c2, v2, profiles = check_c2(coeffs, spec)
    c3, v3 = check_c3(coeffs, spec, n_samples, seed, tol)
    radii = list(c4_radii) if c4_radii is not None else default_c4_radii(spec)
    c4_trend, v4 = check_c4(coeffs, spec, radii, c4_increment_tol)

    report = AssumptionReport(
        family=coeffs.name,
        c1_min_eigenvalue=c1,
        c2_decay_constants=c2,
        c2_profiles=profiles,
        c3_min_c=c3,
        c4_integral=c4_trend[-1],
        c4_tail_trend=c4_trend,
        c4_radii=radii,
        verdicts={"C1": v1, "C2": v2, "C3": v3, "C4": v4},
    )
    for name in report.failed_checks:
        logger.warning("assumption %s fails for family %s", name, coeffs.name)
    return report
