# Polar grids on truncated exterior domains
from src.grid.domain import (
    RadialSpacing,
    DomainSpec,
    Grid,
    ScalarField,
    VectorField,
    build_grid,
    sample_function,
    polar_derivatives,
    gradient,
    integrate,
    band_coverage,
)
from src.grid.interpolation import GridInterpolator
from src.grid.export import write_field_csv, read_field_csv, write_table

__all__ = [
    "RadialSpacing",
    "DomainSpec",
    "Grid",
    "ScalarField",
    "VectorField",
    "build_grid",
    "sample_function",
    "polar_derivatives",
    "gradient",
    "integrate",
    "band_coverage",
    "GridInterpolator",
    "write_field_csv",
    "read_field_csv",
    "write_table",
]
