# Decay analysis: Lorentz norms and the pointwise decay exponent
from .fit import (
    PREFACTOR_COLUMNS,
    decay_fit,
    decay_record,
    prefactor_rows,
    window_indices,
    zero_report,
)
from .lorentz import default_trend_radii, distribution_function, lorentz_norm, norm_trend

__all__ = [
    "PREFACTOR_COLUMNS",
    "decay_fit",
    "decay_record",
    "prefactor_rows",
    "window_indices",
    "zero_report",
    "default_trend_radii",
    "distribution_function",
    "lorentz_norm",
    "norm_trend",
]
