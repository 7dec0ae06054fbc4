# Discrete elliptic operator, Krylov solve and structural checks
from src.solver.assembly import (
    OuterCondition,
    BoundaryData,
    Stencil,
    DiscreteOperator,
    assemble,
    assemble_stencil,
    residual,
    radial_face_flux,
)
from src.solver.krylov import SOLVER_LADDER, SolveResult, KrylovSolver, solve
from src.solver.maximum import MaximumPrincipleReport, maximum_principle_check
from src.solver.oracles import (
    harmonic_profile,
    power_profile,
    radial_oracle,
    max_norm_error,
    convergence_order,
)

__all__ = [
    "OuterCondition",
    "BoundaryData",
    "Stencil",
    "DiscreteOperator",
    "assemble",
    "assemble_stencil",
    "residual",
    "radial_face_flux",
    "SOLVER_LADDER",
    "SolveResult",
    "KrylovSolver",
    "solve",
    "MaximumPrincipleReport",
    "maximum_principle_check",
    "harmonic_profile",
    "power_profile",
    "radial_oracle",
    "max_norm_error",
    "convergence_order",
]
