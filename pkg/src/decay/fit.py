"""Pointwise decay exponent and prefactor profile of a solved field."""
from typing import List, Tuple

import numpy as np

from src.errors import DecayFitError
from src.grid.domain import ScalarField
from src.log import get_logger
from src.models.reports import DecayReport, Verdict, VerificationRecord

logger = get_logger(__name__)

DEFAULT_WINDOW = (1.0 / 8.0, 3.0 / 4.0)
MIN_WINDOW_RADII = 8
# Log-log slope of the prefactor above which it counts as growing
BOUNDED_SLOPE = 0.05
# Relative drop of the prefactor across the window for the o-verdict
VANISHING_DROP = 0.2
# Fitted exponents closer to zero than this show no decay
DECAY_FLOOR = 0.05

PREFACTOR_COLUMNS = ["r", "max_u", "prefactor"]


def window_indices(u: ScalarField, window: Tuple[float, float] = DEFAULT_WINDOW) -> np.ndarray:
    """Radial layers inside [lo * R_out, hi * R_out]."""
    lo, hi = window
    if not 0 < lo < hi <= 1:
        raise DecayFitError(f"fit window must satisfy 0 < lo < hi <= 1, got {window}")
    r_out = u.domain.truncation_radius
    radii = u.grid.radii
    return np.flatnonzero((radii >= lo * r_out) & (radii <= hi * r_out))


def decay_fit(
    u: ScalarField,
    p: float,
    window: Tuple[float, float] = DEFAULT_WINDOW,
    bounded_slope: float = BOUNDED_SLOPE,
    vanishing_drop: float = VANISHING_DROP,
) -> DecayReport:
    """Fit log max_theta u(r, theta) against log r over the window.

    The prefactor max_theta u * r^(2/p) is bounded (O-verdict) when its
    log-log slope stays below bounded_slope, and vanishing (o-verdict)
    when its fitted trend drops by at least vanishing_drop across the window.

    Args:
        u: Solved field
        p: Integrability exponent; the reference rate is r^(-2/p)
        window: Fractions of R_out bounding the fit radii
        bounded_slope: Slope tolerance for the O-verdict
        vanishing_drop: Relative drop for the o-verdict

    Returns:
        DecayReport

    Raises:
        DecayFitError: Fewer than two radii in the window, or a
            non-positive value in it
    """
    index = window_indices(u, window)
    if len(index) < 2:
        raise DecayFitError(f"fit window {window} holds {len(index)} radii")
    if len(index) < MIN_WINDOW_RADII:
        logger.warning("fit window holds only %d radii", len(index))
    radii = u.grid.radii[index]
    rows = u.values[index]
    if np.any(rows <= 0):
        raise DecayFitError("field has non-positive values in the fit window")

    radial_max = rows.max(axis=1)
    log_r = np.log(radii)
    slope, _ = np.polyfit(log_r, np.log(radial_max), 1)

    rate = 2.0 / p
    prefactor = radial_max * radii ** rate
    pf_slope, pf_icpt = np.polyfit(log_r, np.log(prefactor), 1)
    trend = np.exp(pf_icpt + pf_slope * log_r[[0, -1]])

    report = DecayReport(
        p=float(p),
        fitted_exponent=float(slope),
        theoretical_exponent=rate,
        max_prefactor=float((rows * radii[:, None] ** rate).max()),
        radii=radii.tolist(),
        radial_max=radial_max.tolist(),
        vanishing_trend=prefactor.tolist(),
        bounded=bool(pf_slope <= bounded_slope),
        vanishing=bool(trend[1] <= (1.0 - vanishing_drop) * trend[0]),
        decays=bool(slope < -DECAY_FLOOR),
        spans_decade=bool(radii[-1] >= 10.0 * radii[0]),
    )
    if not report.decays:
        logger.warning("no decay within the fit window (exponent %.3f)", slope)
    return report


def zero_report(p: float) -> DecayReport:
    """Report for an identically zero field."""
    return DecayReport(
        p=float(p),
        fitted_exponent=0.0,
        theoretical_exponent=2.0 / p,
        max_prefactor=0.0,
        bounded=True,
        vanishing=False,
        decays=False,
    )


def prefactor_rows(report: DecayReport) -> List[List[float]]:
    """CSV rows (r, max_theta u, prefactor)."""
    return [list(row) for row in zip(report.radii, report.radial_max, report.vanishing_trend)]


def decay_record(report: DecayReport) -> VerificationRecord:
    """The O-bound as a record.

    PASS when the prefactor stays bounded, FAIL when it grows, and
    INCONCLUSIVE when the field shows no decay inside the window (a
    profile set by the truncation radius rather than by the equation).
    """
    if not report.decays:
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.of(report.bounded)
    return VerificationRecord(
        check="decay_bound",
        inputs={"p": report.p},
        lhs=report.fitted_exponent,
        rhs=-report.theoretical_exponent,
        constant=report.max_prefactor,
        tolerance=BOUNDED_SLOPE,
        verdict=verdict,
        details={
            "bounded": report.bounded,
            "vanishing": report.vanishing,
            "spans_decade": report.spans_decade,
        },
    )
