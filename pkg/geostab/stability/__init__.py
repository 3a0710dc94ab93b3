"""
Stability analysis: KCC invariants, Lyapunov exponents and the Jacobi-Maupertuis comparison.
"""
from .kcc import (
    SprayData, BerwaldData, LocalStabilityVerdict, LocalStabilityReport, nonlinear_connection,
    berwald_coefficients, deviation_tensor_P, epsilon_defect, rtilde_operator, classify_local_stability,
    local_stability_track, kcc_residual
)
from .lyapunov import (
    SeminormFamily, ExponentEstimate, SpectrumEstimate, seminorm, lyapunov_exponent, lyapunov_spectrum,
    classify_global_stability, convergence_spread
)
from .maupertuis import (
    JacobiTranslation, FrameSplit, BoundaryDiagnostics, PictureReport, ComparisonReport, jacobi_metric,
    time_reparametrization, geodesic_flow, affine_initial_state, jacobi_geodesic, translate_trajectory,
    round_trip_error, jacobi_deviation, parallel_frame_split, shift_mode_exponents, boundary_diagnostics,
    jacobi_metric_discrepancy, energy_projection, compare_stability
)

__all__ = [
    'SprayData',
    'BerwaldData',
    'LocalStabilityVerdict',
    'LocalStabilityReport',
    'nonlinear_connection',
    'berwald_coefficients',
    'deviation_tensor_P',
    'epsilon_defect',
    'rtilde_operator',
    'classify_local_stability',
    'local_stability_track',
    'kcc_residual',
    'SeminormFamily',
    'ExponentEstimate',
    'SpectrumEstimate',
    'seminorm',
    'lyapunov_exponent',
    'lyapunov_spectrum',
    'classify_global_stability',
    'convergence_spread',
    'JacobiTranslation',
    'FrameSplit',
    'BoundaryDiagnostics',
    'PictureReport',
    'ComparisonReport',
    'jacobi_metric',
    'time_reparametrization',
    'geodesic_flow',
    'affine_initial_state',
    'jacobi_geodesic',
    'translate_trajectory',
    'round_trip_error',
    'jacobi_deviation',
    'parallel_frame_split',
    'shift_mode_exponents',
    'boundary_diagnostics',
    'jacobi_metric_discrepancy',
    'energy_projection',
    'compare_stability'
]
