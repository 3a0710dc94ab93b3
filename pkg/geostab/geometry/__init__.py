"""
Riemannian geometry on configuration space.
"""
from .metric import (
    MetricField, christoffel, connection_coefficients, geodesic_acceleration, riemann, ricci_tensor,
    ricci_scalar, conformal_ricci, covariant_hessian, raised_gradient, metric_compatibility_defect
)
from .transport import FrameTransport, parallel_transport_frame

__all__ = [
    'MetricField',
    'christoffel',
    'connection_coefficients',
    'geodesic_acceleration',
    'riemann',
    'ricci_tensor',
    'ricci_scalar',
    'conformal_ricci',
    'covariant_hessian',
    'raised_gradient',
    'metric_compatibility_defect',
    'FrameTransport',
    'parallel_transport_frame'
]
