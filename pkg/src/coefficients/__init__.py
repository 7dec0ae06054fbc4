# Coefficient families and assumption validators
from src.coefficients.families import (
    CoefficientSet,
    FAMILIES,
    builtin_family,
)
from src.coefficients.assumptions import (
    sample_points,
    check_c1,
    check_c2,
    check_c3,
    check_c4,
    check_derivatives,
    default_c4_radii,
    validate_assumptions,
)

__all__ = [
    "CoefficientSet",
    "FAMILIES",
    "builtin_family",
    "sample_points",
    "check_c1",
    "check_c2",
    "check_c3",
    "check_c4",
    "check_derivatives",
    "default_c4_radii",
    "validate_assumptions",
]
