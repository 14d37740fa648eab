"""Gas absorption with an instantaneous reaction A + B -> 2E in a liquid layer."""

from .correlations import (
    CorrelationRangeError,
    CorrelationValue,
    correlation_hp,
    correlation_liquid_mtc,
    correlation_product_decay,
    correlation_surface_A,
    correlation_tp,
)
from .laplace import (
    LaplaceCoefficients,
    PhaseError,
    compute_tstar,
    derive_laplace_coefficients,
    max_product_surface_conc,
    pre_tstar_profiles,
    surface_concentrations,
)
from .moving_plane import (
    DomainTruncationError,
    InterfaceConvergenceError,
    MovingPlaneSolution,
    solve_moving_plane,
)
from .params import (
    NU_E,
    DegenerateMatrixError,
    DiffusionMatrix,
    IllPosedMatrixError,
    SorptionParams,
    default_params,
)

__all__ = [
    "NU_E",
    "CorrelationRangeError",
    "CorrelationValue",
    "DegenerateMatrixError",
    "DiffusionMatrix",
    "DomainTruncationError",
    "IllPosedMatrixError",
    "InterfaceConvergenceError",
    "LaplaceCoefficients",
    "MovingPlaneSolution",
    "PhaseError",
    "SorptionParams",
    "compute_tstar",
    "correlation_hp",
    "correlation_liquid_mtc",
    "correlation_product_decay",
    "correlation_surface_A",
    "correlation_tp",
    "default_params",
    "derive_laplace_coefficients",
    "max_product_surface_conc",
    "pre_tstar_profiles",
    "solve_moving_plane",
    "surface_concentrations",
]
