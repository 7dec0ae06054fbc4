"""Discrete maximum principle and positivity checks on solved fields."""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.grid.domain import ScalarField
from src.models.reports import Verdict, VerificationRecord


@dataclass
class MaximumPrincipleReport:
    """Where a field peaks inside the domain, compared with its boundary.

    Attributes:
        interior_max: Largest interior value
        interior_max_location: (r, theta) of that value
        interior_min: Smallest interior value
        interior_min_location: (r, theta) of that value
        boundary_max: Largest value on the two circles
        tolerance: Absolute tolerance used
        verdict: PASS iff max <= boundary max + tol and min >= -tol
    """
    interior_max: float
    interior_max_location: Tuple[float, float]
    interior_min: float
    interior_min_location: Tuple[float, float]
    boundary_max: float
    tolerance: float
    verdict: Verdict

    def to_record(self) -> VerificationRecord:
        return VerificationRecord(
            check="maximum_principle",
            lhs=self.interior_max,
            rhs=self.boundary_max,
            tolerance=self.tolerance,
            verdict=self.verdict,
            details={
                "interior_max_location": list(self.interior_max_location),
                "interior_min": self.interior_min,
                "interior_min_location": list(self.interior_min_location),
            },
        )


def maximum_principle_check(u: ScalarField, tol: float = 1e-8) -> MaximumPrincipleReport:
    """Compare interior extremes with the boundary maximum.

    Args:
        u: Solved field
        tol: Tolerance relative to the field scale max(1, max|u|)

    Returns:
        MaximumPrincipleReport
    """
    grid = u.grid
    interior = u.values[1:-1]
    boundary_max = float(max(u.values[0].max(), u.values[-1].max()))
    abs_tol = tol * max(1.0, float(np.abs(u.values).max()))

    i_max, j_max = np.unravel_index(np.argmax(interior), interior.shape)
    i_min, j_min = np.unravel_index(np.argmin(interior), interior.shape)
    interior_max = float(interior[i_max, j_max])
    interior_min = float(interior[i_min, j_min])
    holds = interior_max <= boundary_max + abs_tol and interior_min >= -abs_tol
    return MaximumPrincipleReport(
        interior_max=interior_max,
        interior_max_location=(float(grid.radii[i_max + 1]), float(grid.angles[j_max])),
        interior_min=interior_min,
        interior_min_location=(float(grid.radii[i_min + 1]), float(grid.angles[j_min])),
        boundary_max=boundary_max,
        tolerance=abs_tol,
        verdict=Verdict.of(holds),
    )
