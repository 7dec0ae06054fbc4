# Numerical checks of the level-set identities and inequalities
from .checks import (
    CoareaWeight,
    chebyshev_measure_check,
    coarea_check,
    conormal_flux,
    cutoff_identity_check,
    drift_flux_check,
    energy_bound_check,
    flux_balance_check,
    flux_is_conserved,
    geometric_bound_check,
    gradient_flux_bound,
    key_lemma_check,
    level_flux,
    mean_value_tau,
    nesting_check,
    null_set_shadow,
    sequence_grows,
    topology_check,
)
from .cutoff import CutoffFunction, smoothstep
from .integrals import GradientSampler, line_integral, normal_agreement

__all__ = [
    "CoareaWeight",
    "chebyshev_measure_check",
    "coarea_check",
    "conormal_flux",
    "cutoff_identity_check",
    "drift_flux_check",
    "energy_bound_check",
    "flux_balance_check",
    "flux_is_conserved",
    "geometric_bound_check",
    "gradient_flux_bound",
    "key_lemma_check",
    "level_flux",
    "mean_value_tau",
    "nesting_check",
    "null_set_shadow",
    "sequence_grows",
    "topology_check",
    "CutoffFunction",
    "smoothstep",
    "GradientSampler",
    "line_integral",
    "normal_agreement",
]
