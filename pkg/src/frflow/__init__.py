"""Fisher-Rao gradient flows of f-divergences on simplices and 1D grids.

The package verifies and falsifies convexity and gradient-dominance
criteria for f-divergence energies under the Fisher-Rao geometry: exact
geodesics, Hessian quadratic forms, two-point/K-point inequality scans,
dual bounds anchored at the reverse chi-square distance, closed-form
counterexample families, and an RK4 flow integrator with dissipation
accounting.
"""

from .density import (
    DensityPair,
    GridSpec,
    gaussian_grid_pair,
    make_two_point,
    mollified_two_value,
    pair_from_spec,
    sample_random_pair,
    simplex_pair,
    two_value_radius,
)
from .divergences import (
    FGenerator,
    chi2,
    conjugate,
    divergence,
    f_ratio,
    get_generator,
    kl,
    normalize_slope,
    power_family,
    reverse_chi2,
    reverse_kl,
)
from .errors import (
    BlowUpError,
    DomainError,
    FRFlowError,
    InvalidDensityError,
    StepSizeError,
)
from .flow import (
    FlowTrace,
    flow_rhs,
    flow_summary,
    integrate_flow,
    kl_explicit_solution,
    measure_decay_rate,
    write_flow_csv,
)
from .geometry import (
    GeodesicState,
    TangentField,
    bhattacharyya,
    fr_distance_sq,
    fr_gradient,
    geodesic_point,
    geodesic_speed,
    grad_norm_sq,
    hellinger_sq,
    hessian_quadratic_form,
    integrate_geodesic,
    metric,
    shooting_potential,
)
from .counterexamples import (
    CounterexampleResult,
    centered_log_moment,
    gaussian_hessian_H,
    gaussian_hessian_H_quadrature,
    gaussian_hessian_result,
    gaussian_kl_closed,
    gaussian_log_moment2,
    gaussian_log_moment3,
    gaussian_negativity_threshold,
    gdc_gaussian_result,
    gdc_ratio_gaussian,
    gdc_ratio_twovalue,
    gdc_twovalue_result,
    hessian_H_moments,
    twovalue_G,
    twovalue_hessian,
    twovalue_hessian_result,
    twovalue_kl,
)
from .inequalities import (
    InequalityReport,
    convexity_check,
    convexity_h,
    default_two_point_grids,
    dual_alpha_recipe,
    dual_chi2_check,
    dual_chi2_lhs,
    dual_conjugate_check,
    dual_delta_f,
    dual_pointwise_check,
    gdc_check,
    gdc_sampled_check,
    kpoint_check,
    lemma_gdc_neighborhood_check,
    scan_two_point,
    strong_convexity_check,
    strong_delta_f,
    sufficient_alpha_s,
    support_reduction_probe,
    two_point_ratio,
)

__version__ = "0.1.0"

__all__ = [
    "BlowUpError",
    "CounterexampleResult",
    "DensityPair",
    "DomainError",
    "FGenerator",
    "FRFlowError",
    "FlowTrace",
    "GeodesicState",
    "GridSpec",
    "InequalityReport",
    "InvalidDensityError",
    "StepSizeError",
    "TangentField",
    "bhattacharyya",
    "centered_log_moment",
    "chi2",
    "conjugate",
    "convexity_check",
    "convexity_h",
    "default_two_point_grids",
    "divergence",
    "dual_alpha_recipe",
    "dual_chi2_check",
    "dual_chi2_lhs",
    "dual_conjugate_check",
    "dual_delta_f",
    "dual_pointwise_check",
    "f_ratio",
    "flow_rhs",
    "flow_summary",
    "fr_distance_sq",
    "fr_gradient",
    "gaussian_grid_pair",
    "gaussian_hessian_H",
    "gaussian_hessian_H_quadrature",
    "gaussian_hessian_result",
    "gaussian_kl_closed",
    "gaussian_log_moment2",
    "gaussian_log_moment3",
    "gaussian_negativity_threshold",
    "gdc_check",
    "gdc_gaussian_result",
    "gdc_ratio_gaussian",
    "gdc_ratio_twovalue",
    "gdc_sampled_check",
    "gdc_twovalue_result",
    "geodesic_point",
    "geodesic_speed",
    "get_generator",
    "grad_norm_sq",
    "hellinger_sq",
    "hessian_H_moments",
    "hessian_quadratic_form",
    "integrate_flow",
    "integrate_geodesic",
    "kl",
    "kl_explicit_solution",
    "kpoint_check",
    "lemma_gdc_neighborhood_check",
    "make_two_point",
    "measure_decay_rate",
    "metric",
    "mollified_two_value",
    "normalize_slope",
    "pair_from_spec",
    "power_family",
    "reverse_chi2",
    "reverse_kl",
    "sample_random_pair",
    "scan_two_point",
    "shooting_potential",
    "simplex_pair",
    "strong_convexity_check",
    "strong_delta_f",
    "sufficient_alpha_s",
    "support_reduction_probe",
    "two_point_ratio",
    "two_value_radius",
    "twovalue_G",
    "twovalue_hessian",
    "twovalue_hessian_result",
    "twovalue_kl",
    "write_flow_csv",
]
