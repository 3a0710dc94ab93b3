"""
Parallel transport of frames along sampled curves.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .metric import MetricField, christoffel
from ..dynamics.flow import IntegratorSettings, Trajectory, solve
from ..errors import ConfigurationError, DimensionMismatch

logger = logging.getLogger(__name__)

ORTHONORMALITY_TOL = 1e-8


@dataclass(frozen=True)
class FrameTransport:
    parameters: np.ndarray
    frames: np.ndarray
    max_drift: float

    def frame_at(self, index: int) -> np.ndarray:
        return self.frames[index]

    def to_dict(self):
        return {
            "parameters": self.parameters.tolist(),
            "frames": self.frames.tolist(),
            "max_drift": self.max_drift,
        }


def _curve_velocity(curve: Trajectory, n: int, s: float) -> np.ndarray:
    if curve.configuration_dimension == n:
        return curve.interpolate(s)[n:]
    return curve.interpolate_derivative(s)[:n]


def parallel_transport_frame(
    metric: MetricField,
    curve: Trajectory,
    initial_frame: Sequence[Sequence[float]],
    settings: Optional[IntegratorSettings] = None,
) -> FrameTransport:
    """
    Transport a metric-orthonormal frame along a curve by integrating ∇_ẋ e = 0.

    The curve's configuration is its first n state components. For phase-space
    curves (x, u) the velocity is read from the u block, otherwise it is the
    derivative of the Hermite interpolant.

    Returns:
        FrameTransport sampled at the curve's parameters, with the largest
        deviation of the Gram matrix from its initial value

    Raises:
        DegenerateMetric: the metric degenerates along the curve
    """
    n = metric.dimension
    E0 = np.array(initial_frame, dtype=float)
    if E0.ndim == 1:
        E0 = E0[None, :]
    if E0.shape[1] != n or curve.dimension < n:
        raise DimensionMismatch(f"Frame {E0.shape} / curve dimension {curve.dimension} vs metric dimension {n}")
    m = E0.shape[0]
    x0 = curve.states[0][:n]
    gram0 = E0 @ metric.at(x0) @ E0.T
    if np.max(np.abs(gram0 - np.eye(m))) > ORTHONORMALITY_TOL:
        raise ConfigurationError("Initial frame is not orthonormal for the metric", {"gram": gram0})

    def rhs(s, y):
        x = curve.interpolate(s)[:n]
        v = _curve_velocity(curve, n, s)
        gamma = christoffel(metric, x)
        E = y.reshape(m, n)
        return (-np.einsum("abc,b,kc->ka", gamma, v, E)).ravel()

    settings = (settings or IntegratorSettings()).replace(sample_times=tuple(curve.times[1:].tolist()), events=())
    solution = solve(rhs, E0.ravel(), (curve.times[0], curve.times[-1]), settings, curve.parameter)
    frames = solution.states.reshape(len(solution), m, n)
    drift = 0.0
    for s, E in zip(solution.times, frames):
        x = curve.interpolate(s)[:n]
        gram = E @ metric.at(x) @ E.T
        drift = max(drift, float(np.max(np.abs(gram - np.eye(m)))))
    logger.debug("parallel transport over %d samples, drift %.3e", len(solution), drift)
    return FrameTransport(solution.times, frames, drift)
