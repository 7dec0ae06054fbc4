"""Closed-form radial solutions used as accuracy oracles."""
from typing import Optional

import numpy as np

from src.coefficients.families import CoefficientSet
from src.grid.domain import DomainSpec, Grid, ScalarField, build_grid, sample_function
from src.solver.assembly import BoundaryData, OuterCondition


def harmonic_profile(grid: Grid, inner: float, outer: float) -> ScalarField:
    """A + B ln r matching inner at r0 and outer at R_out."""
    r0, r_out = grid.radii[0], grid.radii[-1]
    slope = (outer - inner) / np.log(r_out / r0)
    return sample_function(
        grid, lambda x, y: inner + slope * np.log(np.hypot(x, y) / r0), oracle="harmonic"
    )


def power_profile(grid: Grid, inner: float, exponent: float) -> ScalarField:
    """inner * (r / r0)^(-exponent)."""
    r0 = grid.radii[0]
    return sample_function(
        grid, lambda x, y: inner * (np.hypot(x, y) / r0) ** (-exponent), oracle="power"
    )


def radial_oracle(
    coeffs: CoefficientSet, spec: DomainSpec, bdata: BoundaryData
) -> Optional[ScalarField]:
    """Exact solution for radial problems with a closed form, else None.

    Covers the Laplace family with constant Dirichlet data on both circles
    (logarithmic profile) and the optimal drift family with outer data
    matched to its own exponent 2/p (power profile).
    """
    grid = build_grid(spec)
    inner = bdata.inner_on(grid)
    if not np.allclose(inner, inner[0]):
        return None
    outer = bdata.outer_on(grid)
    if coeffs.name == "laplace" and np.allclose(outer, outer[0]):
        return harmonic_profile(grid, float(inner[0]), float(outer[0]))
    if coeffs.name == "remark_optimal":
        exponent = 2.0 / coeffs.params["p"]
        if (
            bdata.outer_condition == OuterCondition.DIRICHLET_MATCHED
            and np.isclose(bdata.decay_exponent, exponent)
        ):
            return power_profile(grid, float(inner[0]), exponent)
    return None


def max_norm_error(u: ScalarField, exact: ScalarField) -> float:
    """max |u - exact| / max |exact| (absolute when exact vanishes)."""
    scale = float(np.abs(exact.values).max())
    err = float(np.abs(u.values - exact.values).max())
    return err / scale if scale > 0 else err


def convergence_order(errors, spacings) -> float:
    """Least-squares slope of log error against log mesh size."""
    errors = np.asarray(errors, dtype=float)
    spacings = np.asarray(spacings, dtype=float)
    slope, _ = np.polyfit(np.log(spacings), np.log(errors), 1)
    return float(slope)
