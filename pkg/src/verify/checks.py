"""Checks of the level-set identities and inequalities behind the decay bound.

Every check returns a VerificationRecord. A relation that does not hold
is a FAIL verdict, never an exception; exceptions are reserved for
violated preconditions (a missing gamma, a cut-off that reaches gamma).
"""
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import trapezoid

from src.coefficients.families import CoefficientSet
from src.errors import PreconditionError
from src.grid.domain import integrate
from src.levels.region import RegionEt, interior_weights, omega_t_weights, region_Et
from src.levels.topology import LevelAnalysis, LevelCurve, LevelSetFamily, g_of_t
from src.log import get_logger
from src.models.reports import VerificationRecord, Verdict
from src.verify.cutoff import CutoffFunction
from src.verify.integrals import GradientSampler, line_integral, normal_agreement, segment_geometry

logger = get_logger(__name__)

IDENTITY_TOL = 5e-2
COAREA_TOL = 2e-2
GROWTH_TOL = 0.05
MIN_FLUX_LEVELS = 10
MIN_TAU_SAMPLES = 4
TAU_SAMPLES = 17
# Relative spread of the level fluxes below which all flux leaves through R_out
CONSERVED_FLUX_SPREAD = 2e-2


class CoareaWeight(Enum):
    """Integrand f of the coarea identity."""
    ONE = "one"
    GRAD = "grad"


NodalFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]


def relative_gap(lhs: float, rhs: float) -> float:
    scale = max(abs(lhs), abs(rhs))
    return abs(lhs - rhs) / scale if scale > 0 else 0.0


def sequence_grows(levels: Sequence[float], values: Sequence[float], growth_tol: float = GROWTH_TOL) -> bool:
    """Whether values grow monotonically as t decreases over the smallest decade.

    Args:
        levels: Sampled levels t
        values: One value per level
        growth_tol: Minimal relative growth that counts

    Returns:
        True when the sequence increases at every step towards smaller t
        and ends more than growth_tol above where it started
    """
    if len(levels) < 2:
        return False
    order = np.argsort(levels)[::-1]
    t = np.asarray(levels, dtype=float)[order]
    v = np.asarray(values, dtype=float)[order]
    window = t <= 10.0 * t[-1]
    if window.sum() < 2:
        window[-2:] = True
    tail = v[window]
    return bool(np.all(np.diff(tail) > 0) and tail[-1] > (1.0 + growth_tol) * tail[0])


def decades(levels: Sequence[float]) -> float:
    levels = np.asarray(levels, dtype=float)
    return float(np.log10(levels.max() / levels.min())) if len(levels) else 0.0


def _region(analysis: LevelAnalysis, t: float, region: Optional[RegionEt]) -> RegionEt:
    return region if region is not None else region_Et(analysis, t)


def _nodal(analysis: LevelAnalysis, values: np.ndarray, weights: np.ndarray) -> float:
    return integrate(analysis.u.with_values(values), weights)


def _skip(check: str, inputs: dict, reason: str) -> VerificationRecord:
    logger.info("%s inconclusive at %s: %s", check, inputs, reason)
    return VerificationRecord(check=check, inputs=inputs, verdict=Verdict.INCONCLUSIVE, details={"reason": reason})


# Flux through level curves

def level_flux(analysis: LevelAnalysis, t: float) -> float:
    """Integral of |grad u| over gamma(t)."""
    return line_integral(analysis.require_gamma(t), analysis.grad_interp)


def flux_is_conserved(fluxes: Sequence[float], spread: float = CONSERVED_FLUX_SPREAD) -> bool:
    """Level fluxes equal within spread: the profile is log-like and set by R_out."""
    fluxes = np.asarray(fluxes, dtype=float)
    if len(fluxes) < 2 or not np.all(fluxes > 0):
        return False
    return bool((fluxes.max() - fluxes.min()) / fluxes.max() < spread)


def gradient_flux_bound(
    analysis: LevelAnalysis,
    levels: Sequence[float],
    growth_tol: float = GROWTH_TOL,
    min_levels: int = MIN_FLUX_LEVELS,
) -> VerificationRecord:
    """Measure C_* = sup_t (1/t) * integral of |grad u| over gamma(t).

    Args:
        analysis: Level analysis of the field
        levels: Tilde-regular levels
        growth_tol: Growth that makes the sequence unbounded
        min_levels: Fewer levels give an inconclusive verdict

    Returns:
        Record with the constant and the per-level ratios in details
    """
    levels = sorted(float(t) for t in levels)
    fluxes = [level_flux(analysis, t) for t in levels]
    ratios = [f / t for f, t in zip(fluxes, levels)]
    conserved = flux_is_conserved(fluxes)
    details = {
        "levels": levels,
        "fluxes": fluxes,
        "ratios": ratios,
        "decades": decades(levels),
        "truncation_dominated": conserved,
    }
    constant = max(ratios) if ratios else None
    if len(levels) < min_levels:
        verdict = Verdict.INCONCLUSIVE
        details["reason"] = f"{len(levels)} tilde-regular levels, need {min_levels}"
    elif sequence_grows(levels, ratios, growth_tol):
        if conserved:
            logger.warning("flux through gamma(t) is constant; growth of C_* is a truncation artifact")
            verdict = Verdict.INCONCLUSIVE
        else:
            verdict = Verdict.FAIL
    else:
        verdict = Verdict.PASS
    return VerificationRecord(
        check="gradient_flux_bound",
        inputs={"levels": len(levels)},
        lhs=constant,
        constant=constant,
        tolerance=growth_tol,
        verdict=verdict,
        details=details,
    )


# Coarea formula

def _coarea_integrands(analysis: LevelAnalysis, weight: Union[CoareaWeight, str, NodalFunction]):
    if callable(weight) and not isinstance(weight, CoareaWeight):
        grid = analysis.grid
        nodal = np.broadcast_to(np.asarray(weight(grid.x, grid.y), dtype=float), grid.shape)
        return "custom", nodal, weight
    weight = CoareaWeight(weight)
    if weight == CoareaWeight.ONE:
        return weight.value, np.ones(analysis.grid.shape), 1.0
    return weight.value, analysis.grad_norm.values, analysis.grad_interp


def level_side(
    analysis: LevelAnalysis, t: float, integrand, n_tau: int = TAU_SAMPLES
) -> Tuple[np.ndarray, np.ndarray]:
    """Curve integrals over gamma(tau) for regular tau sampled in [t/2, t].

    Returns:
        (taus, values) for the samples that are regular and have a gamma
    """
    taus, values = [], []
    for tau in np.linspace(0.5 * t, t, n_tau):
        tau = float(tau)
        if not analysis.is_regular(tau):
            continue
        gamma = analysis.gamma(tau)
        if gamma is None:
            continue
        taus.append(tau)
        values.append(line_integral(gamma, integrand))
    return np.asarray(taus), np.asarray(values)


def coarea_check(
    analysis: LevelAnalysis,
    t: float,
    weight: Union[CoareaWeight, str, NodalFunction] = CoareaWeight.ONE,
    n_tau: int = TAU_SAMPLES,
    tol: float = COAREA_TOL,
    region: Optional[RegionEt] = None,
) -> VerificationRecord:
    """Compare the integral of f |grad u| over E_t with the level integral.

    The level side is the trapezoid rule in tau over the regular samples
    of [t/2, t] of the integral of f over gamma(tau).
    """
    name, nodal, curve_f = _coarea_integrands(analysis, weight)
    inputs = {"t": float(t), "f": name}
    if not analysis.is_tilde_regular(t):
        return _skip("coarea", inputs, "t is not tilde-regular")
    region = _region(analysis, t, region)
    lhs = _nodal(analysis, nodal * analysis.grad_norm.values, region.weights)
    taus, values = level_side(analysis, t, curve_f, n_tau)
    if len(taus) < MIN_TAU_SAMPLES:
        return _skip("coarea", inputs, f"{len(taus)} regular tau samples")
    rhs = float(trapezoid(values, taus))
    gap = relative_gap(lhs, rhs)
    return VerificationRecord(
        check="coarea",
        inputs=inputs,
        lhs=lhs,
        rhs=rhs,
        constant=gap,
        tolerance=tol,
        verdict=Verdict.of(gap <= tol),
        details={"tau_samples": len(taus), "region_nodes": region.node_count},
    )


def null_set_shadow(
    analysis: LevelAnalysis,
    t: float,
    n_tau: int = TAU_SAMPLES,
    tol: float = COAREA_TOL,
    region: Optional[RegionEt] = None,
) -> VerificationRecord:
    """|E_t| against the coarea prediction from integrals of 1/|grad u|."""
    inputs = {"t": float(t)}
    if not analysis.is_tilde_regular(t):
        return _skip("null_set_shadow", inputs, "t is not tilde-regular")
    region = _region(analysis, t, region)
    floor = analysis.grad_floor

    def inverse_grad(x, y):
        return 1.0 / np.maximum(analysis.grad_interp(x, y), floor)

    taus, values = level_side(analysis, t, inverse_grad, n_tau)
    if len(taus) < MIN_TAU_SAMPLES:
        return _skip("null_set_shadow", inputs, f"{len(taus)} regular tau samples")
    predicted = float(trapezoid(values, taus))
    discrepancy = region.measure - predicted
    relative = discrepancy / region.measure if region.measure > 0 else 0.0
    return VerificationRecord(
        check="null_set_shadow",
        inputs=inputs,
        lhs=region.measure,
        rhs=predicted,
        constant=relative,
        tolerance=tol,
        verdict=Verdict.of(abs(relative) <= tol),
        details={"discrepancy": discrepancy},
    )


# Consequences of the flux bound

def energy_bound_check(
    analysis: LevelAnalysis,
    t: float,
    c_star: float,
    tol: float = COAREA_TOL,
    region: Optional[RegionEt] = None,
) -> VerificationRecord:
    """Integral of |grad u|^2 over E_t against C_* t^2."""
    region = _region(analysis, t, region)
    lhs = _nodal(analysis, analysis.grad_norm.values ** 2, region.weights)
    rhs = c_star * t * t
    return VerificationRecord(
        check="energy_bound",
        inputs={"t": float(t)},
        lhs=lhs,
        rhs=rhs,
        constant=lhs / (t * t),
        tolerance=tol,
        verdict=Verdict.of(lhs <= rhs * (1.0 + tol)),
    )


def chebyshev_measure_check(
    analysis: LevelAnalysis,
    t: float,
    p: float,
    tol: float = COAREA_TOL,
    region: Optional[RegionEt] = None,
) -> VerificationRecord:
    """|E_t| <= 2^p t^-p * integral of u^p over E_t, since u > t/2 there."""
    region = _region(analysis, t, region)
    power = _nodal(analysis, np.abs(analysis.u.values) ** p, region.weights)
    rhs = 2.0 ** p * t ** (-p) * power
    return VerificationRecord(
        check="chebyshev_measure",
        inputs={"t": float(t), "p": float(p)},
        lhs=region.measure,
        rhs=rhs,
        tolerance=tol,
        verdict=Verdict.of(region.measure <= rhs * (1.0 + tol)),
    )


def mean_value_tau(
    analysis: LevelAnalysis,
    t: float,
    c_star: float,
    p: float,
    n_tau: int = TAU_SAMPLES,
    region: Optional[RegionEt] = None,
) -> Tuple[Optional[float], VerificationRecord]:
    """Pick tau in [t/2, t] with the shortest gamma(tau) and test

    (t/2) H^1(gamma(tau)) <= (2^p C_* t^(2-p) * integral of u^p over E_t)^(1/2).

    Returns:
        (tau or None, record)
    """
    region = _region(analysis, t, region)
    power = _nodal(analysis, np.abs(analysis.u.values) ** p, region.weights)
    rhs = float(np.sqrt(2.0 ** p * c_star * t ** (2.0 - p) * power))

    candidates = []
    for tau in np.linspace(0.5 * t, t, n_tau):
        tau = float(tau)
        if not analysis.is_regular(tau):
            continue
        gamma = analysis.gamma(tau)
        if gamma is not None:
            candidates.append((gamma.length, tau))
    inputs = {"t": float(t), "p": float(p)}
    if not candidates:
        return None, VerificationRecord(
            check="mean_value_tau", inputs=inputs, rhs=rhs, verdict=Verdict.FAIL,
            details={"reason": "no regular tau sample with a gamma"},
        )
    length, tau = min(candidates)
    lhs = 0.5 * t * length
    inputs["tau"] = tau
    return tau, VerificationRecord(
        check="mean_value_tau",
        inputs=inputs,
        lhs=lhs,
        rhs=rhs,
        constant=c_star,
        verdict=Verdict.of(lhs <= rhs),
        details={"samples": len(candidates), "length": length},
    )


def distance_to_polyline(points: np.ndarray, polyline: np.ndarray) -> np.ndarray:
    """Euclidean distance from each point to the nearest segment."""
    pts = np.atleast_2d(points)[:, None, :]
    a = polyline[:-1][None, :, :]
    d = (polyline[1:] - polyline[:-1])[None, :, :]
    denom = np.maximum(np.sum(d * d, axis=-1), 1e-300)
    s = np.clip(np.sum((pts - a) * d, axis=-1) / denom, 0.0, 1.0)
    nearest = a + s[..., None] * d
    return np.sqrt(np.sum((pts - nearest) ** 2, axis=-1)).min(axis=1)


def geometric_bound_check(
    gamma_t: LevelCurve, gamma_tau: LevelCurve, slack: float = 0.0
) -> VerificationRecord:
    """2 g(t) <= H^1(gamma(tau)) for gamma(t) inside gamma(tau).

    Raises:
        PreconditionError: A vertex of gamma(t) lies outside gamma(tau)
            by more than the slack
    """
    points = gamma_t.vertices[:-1]
    outside = ~gamma_tau.contains(points)
    if outside.any():
        gap = float(distance_to_polyline(points[outside], gamma_tau.vertices).max())
        if gap > max(slack, 1e-9 * gamma_tau.max_radius):
            raise PreconditionError(
                f"gamma({gamma_t.level:g}) leaves Int gamma({gamma_tau.level:g}) by {gap:.3e}"
            )
    lhs = 2.0 * g_of_t(gamma_t)
    rhs = gamma_tau.length
    return VerificationRecord(
        check="geometric_bound",
        inputs={"t": gamma_t.level, "tau": gamma_tau.level},
        lhs=lhs,
        rhs=rhs,
        constant=lhs / rhs if rhs > 0 else None,
        tolerance=slack,
        verdict=Verdict.of(lhs <= rhs + slack),
    )


def key_lemma_check(
    analysis: LevelAnalysis,
    levels: Sequence[float],
    p: float,
    growth_tol: float = GROWTH_TOL,
    regions: Optional[dict] = None,
    truncation_dominated: bool = False,
) -> Tuple[VerificationRecord, List[VerificationRecord]]:
    """Empirical constant of u(x) <= C |x|^(-2/p) (integral of u^p over E_t)^(1/p).

    For every level and every vertex x of gamma(t) the ratio
    u(x) |x|^(2/p) / (integral of u^p over E_t)^(1/p) is formed; the per-level
    sup is the level's constant. A level passes when its constant is within
    growth_tol of the aggregate constant (the sup over levels).

    Returns:
        (summary record with the sup over levels, per-level records)
    """
    regions = regions or {}
    per_level, used, constants = [], [], []
    for t in sorted(float(t) for t in levels):
        region = regions.get(t) or region_Et(analysis, t)
        inputs = {"t": t, "p": float(p)}
        if region.is_empty:
            per_level.append(_skip("key_lemma", inputs, "E_t has no nodes"))
            continue
        power = _nodal(analysis, np.abs(analysis.u.values) ** p, region.weights)
        gamma = analysis.require_gamma(t)
        vertices = gamma.vertices[:-1]
        radii = np.hypot(vertices[:, 0], vertices[:, 1])
        ratios = analysis.interp.at_points(vertices) * radii ** (2.0 / p) / power ** (1.0 / p)
        peak = int(np.argmax(ratios))
        constant = float(ratios[peak])
        used.append(t)
        constants.append(constant)
        per_level.append(VerificationRecord(
            check="key_lemma",
            inputs=inputs,
            lhs=float(t * g_of_t(gamma) ** (2.0 / p)),
            rhs=float(power ** (1.0 / p)),
            constant=constant,
            tolerance=growth_tol,
            details={"peak_radius": float(radii[peak]), "g": g_of_t(gamma)},
        ))

    aggregate = max(constants) if constants else None
    for record in per_level:
        if record.constant is None:
            continue
        deviation = (aggregate - record.constant) / aggregate
        record.details["deviation"] = deviation
        record.verdict = Verdict.of(deviation <= growth_tol)
        if record.verdict == Verdict.FAIL and truncation_dominated:
            record.verdict = Verdict.INCONCLUSIVE

    inputs = {"p": float(p), "levels": len(used)}
    if len(used) < 2:
        summary = _skip("key_lemma_constant", inputs, f"{len(used)} usable levels")
        summary.constant = aggregate
        return summary, per_level
    grows = sequence_grows(used, constants, growth_tol)
    if grows and truncation_dominated:
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.of(not grows)
    spread = (max(constants) - min(constants)) / max(constants)
    summary = VerificationRecord(
        check="key_lemma_constant",
        inputs=inputs,
        lhs=aggregate,
        constant=aggregate,
        tolerance=growth_tol,
        verdict=verdict,
        details={
            "levels": used,
            "constants": constants,
            "spread": spread,
            "decades": decades(used),
            "truncation_dominated": truncation_dominated,
        },
    )
    return summary, per_level


# The integrated equation against the cut-off

def cutoff_identity_check(
    analysis: LevelAnalysis,
    coeffs: CoefficientSet,
    t: float,
    rho: Optional[float] = None,
    tol: float = IDENTITY_TOL,
) -> VerificationRecord:
    """Evaluate the six terms of the integrated equation over Omega_t.

    With n = grad u / |grad u| on gamma(t):
      1. -int_gamma (a grad u . n) eta dS
      2.  int_gamma (a n . grad eta) u dS   (zero since grad eta = 0 on gamma)
      3. -int_Omega_t d_j(a_ij d_i eta) u dx
      4.  int_gamma (n . b) u eta dS
      5. -int_Omega_t u b . grad eta dx
      6.  int_Omega_t (-div b + c) u eta dx
    The terms sum to zero for a solution of L u = 0.

    Args:
        analysis: Level analysis of the solved field
        coeffs: Coefficients the field solves
        t: Level with a gamma(t)
        rho: Cut-off scale; default sqrt(g(t) R_out / 2)
        tol: Pass iff |sum| <= tol * max |term|

    Raises:
        PreconditionError: gamma(t) is not inside B_rho or 2 rho > R_out
    """
    gamma = analysis.require_gamma(t)
    g = g_of_t(gamma)
    r_out = analysis.u.domain.truncation_radius
    if rho is None:
        rho = float(np.sqrt(g * r_out / 2.0))
    if not g < rho:
        raise PreconditionError(f"gamma({t:g}) reaches |x| = {g:.4g}, not inside B_rho (rho = {rho:.4g})")
    if 2.0 * rho > r_out * (1.0 + 1e-12):
        raise PreconditionError(f"2 rho = {2 * rho:.4g} exceeds the truncation radius {r_out:g}")
    inputs = {"t": float(t), "rho": float(rho)}
    if not analysis.is_regular(t):
        return _skip("cutoff_identity", inputs, "t is not regular")

    eta = CutoffFunction(rho)
    sampler = GradientSampler(analysis.grad)
    mids, lengths, _ = segment_geometry(gamma)
    mx, my = mids[:, 0], mids[:, 1]
    normals = sampler.normals(mids)
    a_mid = coeffs.matrix(mx, my)
    conormal = np.einsum("ni,nij,nj->n", normals, a_mid, sampler.at(mids))
    eta_mid = eta(mx, my)
    u_mid = analysis.interp.at_points(mids)

    if np.any(eta.gradient(mx, my) != 0.0):
        raise PreconditionError("grad eta does not vanish on gamma(t)")

    grid = analysis.grid
    x, y = grid.x, grid.y
    u = analysis.u.values
    weights = omega_t_weights(analysis, t)
    d_eta = eta.gradient(x, y)
    div_a = np.einsum("...ijj->...i", coeffs.grad_a(x, y))
    second = np.einsum("...i,...i->...", div_a, d_eta) + np.einsum(
        "...ij,...ij->...", coeffs.matrix(x, y), eta.hessian(x, y)
    )
    drift = np.einsum("...i,...i->...", coeffs.b(x, y), d_eta)

    terms = {
        "term1": float(-np.sum(conormal * eta_mid * lengths)),
        "term2": 0.0,
        "term3": _nodal(analysis, -second * u, weights),
        "term4": float(np.sum(np.einsum("ni,ni->n", normals, coeffs.b(mx, my)) * u_mid * eta_mid * lengths)),
        "term5": _nodal(analysis, -u * drift, weights),
        "term6": _nodal(analysis, (coeffs.c(x, y) - coeffs.div_b(x, y)) * u * eta(x, y), weights),
    }
    total = float(sum(terms.values()))
    scale = max(abs(v) for v in terms.values())
    return VerificationRecord(
        check="cutoff_identity",
        inputs=inputs,
        lhs=total,
        rhs=0.0,
        constant=abs(total) / scale if scale > 0 else 0.0,
        tolerance=tol,
        verdict=Verdict.of(abs(total) <= tol * scale),
        details={**terms, "g": g, "normal_agreement": normal_agreement(gamma, normals)},
    )


def drift_flux_check(
    analysis: LevelAnalysis, coeffs: CoefficientSet, t: float, tol: float = COAREA_TOL
) -> VerificationRecord:
    """Divergence theorem for the drift line term.

    int_gamma n . b dS = -int_{Int gamma} div b dx + int_{|x|=r0} n_obstacle . b dS,
    with n_obstacle = -e_r the outward normal of the domain on the obstacle.
    """
    gamma = analysis.require_gamma(t)
    mids, lengths, _ = segment_geometry(gamma)
    normals = GradientSampler(analysis.grad).normals(mids)
    b_mid = coeffs.b(mids[:, 0], mids[:, 1])
    lhs = float(np.sum(np.einsum("ni,ni->n", normals, b_mid) * lengths))
    scale = float(np.sum(np.hypot(b_mid[:, 0], b_mid[:, 1]) * lengths))

    grid = analysis.grid
    volume = _nodal(analysis, coeffs.div_b(grid.x, grid.y), interior_weights(analysis, t))
    r0 = grid.radii[0]
    cos_t, sin_t = np.cos(grid.angles), np.sin(grid.angles)
    b_obstacle = coeffs.b(r0 * cos_t, r0 * sin_t)
    boundary = float(np.sum(-(b_obstacle[:, 0] * cos_t + b_obstacle[:, 1] * sin_t)) * r0 * grid.dtheta)
    rhs = -volume + boundary

    reference = max(abs(lhs), abs(rhs), scale)
    gap = abs(lhs - rhs) / reference if reference > 0 else 0.0
    return VerificationRecord(
        check="drift_flux",
        inputs={"t": float(t)},
        lhs=lhs,
        rhs=rhs,
        constant=gap,
        tolerance=tol,
        verdict=Verdict.of(gap <= tol),
        details={"volume": volume, "obstacle": boundary},
    )


def conormal_flux(analysis: LevelAnalysis, coeffs: CoefficientSet, t: float) -> float:
    """int_gamma(t) a grad u . n dS with n = grad u / |grad u|."""
    gamma = analysis.require_gamma(t)
    mids, lengths, _ = segment_geometry(gamma)
    sampler = GradientSampler(analysis.grad)
    conormal = np.einsum(
        "ni,nij,nj->n", sampler.normals(mids), coeffs.matrix(mids[:, 0], mids[:, 1]), sampler.at(mids)
    )
    return float(np.sum(conormal * lengths))


def flux_balance_check(
    analysis: LevelAnalysis,
    coeffs: CoefficientSet,
    t1: float,
    t2: float,
    tol: float = COAREA_TOL,
) -> VerificationRecord:
    """Equal conormal fluxes through gamma(t1) and gamma(t2) when b = 0 and c = 0."""
    inputs = {"t": float(t1), "t2": float(t2)}
    grid = analysis.grid
    if np.any(coeffs.b(grid.x, grid.y) != 0) or np.any(coeffs.c(grid.x, grid.y) != 0):
        return _skip("flux_balance", inputs, "needs b = 0 and c = 0")
    lhs = conormal_flux(analysis, coeffs, t1)
    rhs = conormal_flux(analysis, coeffs, t2)
    gap = relative_gap(lhs, rhs)
    return VerificationRecord(
        check="flux_balance",
        inputs=inputs,
        lhs=lhs,
        rhs=rhs,
        constant=gap,
        tolerance=tol,
        verdict=Verdict.of(gap <= tol),
    )


# Topology diagnostics

def topology_check(family: LevelSetFamily) -> VerificationRecord:
    """Unique enclosing component and nothing in its exterior, at every regular level."""
    regular = family.regular_levels()
    if not regular:
        return _skip("unique_component", {"levels": 0}, "no regular levels")
    failing = [t for t in regular if family.entries[t].classification.verdict != Verdict.PASS]
    for t in failing:
        cls = family.entries[t].classification
        logger.warning(
            "level %g: %d enclosing curves, %d exterior curves", t, len(cls.enclosing), len(cls.exterior)
        )
    return VerificationRecord(
        check="unique_component",
        inputs={"levels": len(regular)},
        lhs=float(len(failing)),
        rhs=0.0,
        verdict=Verdict.of(not failing),
        details={"failing_levels": failing},
    )


def nesting_check(
    analysis: LevelAnalysis, family: LevelSetFamily, slack: Optional[float] = None
) -> List[VerificationRecord]:
    """Nesting of gamma(t/2) outside gamma(t), monotone g, and the isoperimetric bound.

    Returns:
        Records "nesting", "g_monotone" and "isoperimetric"
    """
    h = float(analysis.grid.radial_steps.max()) if slack is None else slack

    outside_violations = 0
    for t in family.tilde_regular_levels():
        inner, outer = analysis.require_gamma(t), analysis.require_gamma(0.5 * t)
        points = outer.vertices[:-1]
        stray = inner.contains(points)
        if stray.any():
            far = distance_to_polyline(points[stray], inner.vertices) > h
            outside_violations += int(np.count_nonzero(far))

    with_gamma = [t for t in family.regular_levels() if family.entries[t].gamma is not None]
    g_values = [g_of_t(family.entries[t].gamma) for t in with_gamma]
    monotone_violations = sum(
        1 for k in range(len(with_gamma) - 1) if g_values[k + 1] > g_values[k] + h
    )

    iso_violations = []
    for t in with_gamma:
        gamma = family.entries[t].gamma
        if gamma.length ** 2 < 4.0 * np.pi * gamma.enclosed_area * (1.0 - 1e-2):
            iso_violations.append(t)

    return [
        VerificationRecord(
            check="nesting",
            inputs={"levels": len(family.tilde_regular_levels())},
            lhs=float(outside_violations),
            rhs=0.0,
            tolerance=h,
            verdict=Verdict.of(outside_violations == 0),
        ),
        VerificationRecord(
            check="g_monotone",
            inputs={"levels": len(with_gamma)},
            lhs=float(monotone_violations),
            rhs=0.0,
            tolerance=h,
            verdict=Verdict.of(monotone_violations == 0),
            details={"levels": with_gamma, "g": g_values},
        ),
        VerificationRecord(
            check="isoperimetric",
            inputs={"levels": len(with_gamma)},
            lhs=float(len(iso_violations)),
            rhs=0.0,
            tolerance=1e-2,
            verdict=Verdict.of(not iso_violations),
            details={"failing_levels": iso_violations},
        ),
    ]
