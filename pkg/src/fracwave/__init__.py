"""fracwave: contour-integral functional calculus for almost sectorial
operators and Caputo wave-type Volterra equations (1 < alpha < 2)."""

__version__ = "0.1.0"

from .mittag_leffler import (
    BoundReport,
    MLParams,
    ml_derivative,
    ml_eval,
    ml_eval_many,
    ml_sector_bound_check,
    reciprocal_gamma,
)
from .fractional import (
    Kernel,
    TimeGrid,
    Trajectory,
    caputo_derivative,
    duhamel_convolve,
    g_kernel,
    rl_integral,
    trajectory_from_csv,
    trajectory_to_csv,
)
from .operator_model import (
    AlmostSectorialModel,
    SectorProfile,
    build_ladder_model,
    build_scalar_model,
    graph_norm,
    model_from_text,
    model_norm_of_function,
    model_to_text,
    power,
    resolvent_apply,
    resolvent_norm,
    spectral_apply,
    spectral_matrices,
    verify_resolvent_bound,
)
from .contour import (
    ContourSpec,
    HankelSpec,
    calculus_apply,
    default_contour,
    hankel_propagator,
    integrand_profile,
    resolvent_of_power_sum,
)
from .propagators import (
    DecayReport,
    PropagatorHandle,
    a_prop_apply,
    a_prop_norm_decay,
    conv_norm_decay,
    decay_report_to_csv,
    derivative_identity_check,
    laplace_check,
    make_propagator,
    prop_apply,
    prop_matrices,
    prop_norm_decay,
    prop_time_derivative,
    strong_continuity_check,
    uno_identity_check,
)
from .solvers import (
    ForcingSpec,
    HoelderEstimate,
    PicardError,
    RegimeReport,
    ResidualReport,
    WaveProblem,
    hoelder_modulus,
    propagator_snapshots,
    residual_report_to_csv,
    solve_homogeneous,
    solve_linear,
    solve_semilinear,
    validate_regime,
    verify_classical,
)

__all__ = [
    "__version__",
    # special functions
    "BoundReport",
    "MLParams",
    "ml_derivative",
    "ml_eval",
    "ml_eval_many",
    "ml_sector_bound_check",
    "reciprocal_gamma",
    # fractional time
    "Kernel",
    "TimeGrid",
    "Trajectory",
    "caputo_derivative",
    "duhamel_convolve",
    "g_kernel",
    "rl_integral",
    "trajectory_from_csv",
    "trajectory_to_csv",
    # operator model
    "AlmostSectorialModel",
    "SectorProfile",
    "build_ladder_model",
    "build_scalar_model",
    "graph_norm",
    "model_from_text",
    "model_norm_of_function",
    "model_to_text",
    "power",
    "resolvent_apply",
    "resolvent_norm",
    "spectral_apply",
    "spectral_matrices",
    "verify_resolvent_bound",
    # contour calculus
    "ContourSpec",
    "HankelSpec",
    "calculus_apply",
    "default_contour",
    "hankel_propagator",
    "integrand_profile",
    "resolvent_of_power_sum",
    # propagators
    "DecayReport",
    "PropagatorHandle",
    "a_prop_apply",
    "a_prop_norm_decay",
    "conv_norm_decay",
    "decay_report_to_csv",
    "derivative_identity_check",
    "laplace_check",
    "make_propagator",
    "prop_apply",
    "prop_matrices",
    "prop_norm_decay",
    "prop_time_derivative",
    "strong_continuity_check",
    "uno_identity_check",
    # solvers
    "ForcingSpec",
    "HoelderEstimate",
    "PicardError",
    "RegimeReport",
    "ResidualReport",
    "WaveProblem",
    "hoelder_modulus",
    "propagator_snapshots",
    "residual_report_to_csv",
    "solve_homogeneous",
    "solve_linear",
    "solve_semilinear",
    "validate_regime",
    "verify_classical",
]
