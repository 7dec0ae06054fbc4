"""Distribution functions and Lorentz quasi-norms of nodal fields.

||u||_{L^{p,q}} = (p * int_0^inf t^q |{|u| >= t}|^(q/p) dt/t)^(1/q) for q < inf,
||u||_{L^{p,inf}} = sup_t t |{|u| >= t}|^(1/p).

Level-set measures come from the radial sub-cell coverage of each dual
cell, and the t integral is the trapezoid rule in log t on a geometric
grid below max |u|.
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid

from src.errors import ConfigurationError
from src.grid.domain import ScalarField, band_coverage, integrate
from src.log import get_logger
from src.models.reports import LorentzNorm

logger = get_logger(__name__)

NORM_LEVELS = 64
DYNAMIC_RANGE = 1e-4
# Relative growth per step for a norm sequence to count as diverging
DIVERGENCE_STEP = 0.02


def _restriction(u: ScalarField, max_radius: Optional[float]) -> Optional[np.ndarray]:
    if max_radius is None:
        return None
    return (u.grid.r <= max_radius).astype(float)


def distribution_function(u: ScalarField, t: float, max_radius: Optional[float] = None) -> float:
    """|{x : u(x) > t}| within the truncated domain.

    Args:
        u: Field
        t: Level, > 0
        max_radius: Restrict to |x| <= max_radius

    Returns:
        Measure of the super-level set
    """
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    weights = band_coverage(u, t)
    restriction = _restriction(u, max_radius)
    if restriction is not None:
        weights = weights * restriction
    return integrate(u.with_values(np.ones(u.grid.shape)), weights)


def _measure_at_least(magnitude: ScalarField, t: float, restriction: Optional[np.ndarray]) -> float:
    # {|u| >= t}; the strict band test is applied just below t so plateaus count
    weights = band_coverage(magnitude, np.nextafter(t, -np.inf))
    if restriction is not None:
        weights = weights * restriction
    return integrate(magnitude.with_values(np.ones(magnitude.grid.shape)), weights)


def _validate(p: float, q: float) -> None:
    if not (1.0 <= p < np.inf):
        raise ConfigurationError(f"p must lie in [1, inf), got {p}", field="analysis.p")
    if not q >= 1.0:
        raise ConfigurationError(f"q must lie in [1, inf], got {q}", field="analysis.q")


def lorentz_norm(
    u: ScalarField,
    p: float,
    q: float,
    n_levels: int = NORM_LEVELS,
    dynamic_range: float = DYNAMIC_RANGE,
    max_radius: Optional[float] = None,
    jobs: int = 1,
) -> LorentzNorm:
    """Lorentz quasi-norm ||u||_{L^{p,q}} of a nodal field.

    Args:
        u: Field
        p: Integrability exponent in [1, inf)
        q: Fine exponent in [1, inf]
        n_levels: Geometric t levels from max |u| down to max |u| * dynamic_range
        dynamic_range: Ratio of the smallest to the largest level
        max_radius: Restrict the field to |x| <= max_radius
        jobs: Worker threads for the level measures

    Returns:
        LorentzNorm with the t-grid and tail profile t |{|u| >= t}|^(1/p)
    """
    _validate(p, q)
    magnitude = u.with_values(np.abs(u.values))
    top = magnitude.max()
    if top <= 0:
        return LorentzNorm(p=p, q=q, value=0.0)

    levels = np.geomspace(top, top * dynamic_range, n_levels)
    restriction = _restriction(u, max_radius)
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as executor:
        measures = np.array(list(executor.map(
            lambda t: _measure_at_least(magnitude, float(t), restriction), levels
        )))
    tail = levels * measures ** (1.0 / p)

    if np.isinf(q):
        value = float(tail.max())
    else:
        # p int t^q m(t)^(q/p) dt/t = p int tail^q d(ln t)
        log_t = np.log(levels[::-1])
        value = float((p * trapezoid(tail[::-1] ** q, log_t)) ** (1.0 / q))
    return LorentzNorm(
        p=float(p),
        q=float(q),
        value=value,
        levels=levels.tolist(),
        tail_profile=tail.tolist(),
    )


def norm_trend(
    u: ScalarField,
    p: float,
    q: float,
    radii: Sequence[float],
    min_step: float = DIVERGENCE_STEP,
    **kwargs,
) -> Dict[str, object]:
    """Norms of u restricted to |x| <= R_k for increasing R_k.

    A sequence that grows by more than min_step (relative) at every step
    is flagged as diverging: the signature of a field in L^{p,inf} but
    not in L^{p,q}.

    Returns:
        Dict with "radii", "values" and "diverging"
    """
    radii = sorted(float(r) for r in radii)
    values: List[float] = [lorentz_norm(u, p, q, max_radius=r, **kwargs).value for r in radii]
    steps = [
        (b - a) / a if a > 0 else 0.0 for a, b in zip(values[:-1], values[1:])
    ]
    diverging = len(values) >= 2 and all(s > min_step for s in steps)
    if diverging:
        logger.info("L^{%g,%g} norm grows with the truncation radius: %s", p, q, values)
    return {"p": float(p), "q": float(q), "radii": radii, "values": values, "diverging": bool(diverging)}


def default_trend_radii(u: ScalarField, base: float = 8.0) -> List[float]:
    """Doubling radii from base up to R_out (at least two entries)."""
    r_out = u.domain.truncation_radius
    radii = []
    r = base
    while r <= r_out * (1.0 + 1e-12):
        radii.append(r)
        r *= 2.0
    if len(radii) < 2:
        radii = [r_out / 2.0, r_out]
    return radii
