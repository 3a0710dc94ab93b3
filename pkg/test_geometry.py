"""
Tests for metrics, curvature and parallel transport
Run with: pytest test_geometry.py
"""
import math

import numpy as np
import pytest

from geostab.core.expr import SymbolTable, parse
from geostab.dynamics.flow import IntegratorSettings, integrate
from geostab.errors import BoundaryPoint, ConfigurationError, DegenerateMetric
from geostab.geometry.metric import (
    MetricField, christoffel, conformal_ricci, covariant_hessian, metric_compatibility_defect,
    raised_gradient, ricci_scalar, riemann
)
from geostab.geometry.transport import parallel_transport_frame
from geostab.stability.maupertuis import geodesic_flow

SPHERE = MetricField.from_entries([[1, 0], [0, "sin(x1)^2"]], name="sphere")
JACOBI_R2 = MetricField.diagonal(["2*(1 - x1^2 - x2^2)", "2*(1 - x1^2 - x2^2)"], name="jacobi-r2")


# construction

def test_asymmetric_entries_rejected():
    with pytest.raises(ConfigurationError):
        MetricField.from_entries([[1, "x1"], [0, 1]])


def test_degenerate_metric():
    metric = MetricField.diagonal(["x1^2", 1])
    with pytest.raises(DegenerateMetric):
        christoffel(metric, [0.0, 0.3])


# connection

def test_flat_christoffel():
    assert np.all(christoffel(MetricField.euclidean(3), [0.1, 0.2, 0.3]) == 0.0)


def test_jacobi_metric_christoffel_vanishes_at_origin():
    assert christoffel(JACOBI_R2, [0.0, 0.0]) == pytest.approx(np.zeros((2, 2, 2)), abs=1e-14)


def test_sphere_christoffel():
    gamma = christoffel(SPHERE, [math.pi / 4, 0.0])
    assert gamma[0][1][1] == pytest.approx(-0.5)
    assert gamma[1][0][1] == pytest.approx(1.0)
    assert gamma[1][1][0] == gamma[1][0][1]


def test_christoffel_against_finite_differences():
    metric = MetricField.from_entries([["1 + x2^2", "x1*x2"], ["x1*x2", "2 + sin(x1)"]])
    x = np.array([0.3, -0.4])
    h = 1e-5
    dg = np.zeros((2, 2, 2))
    for c in range(2):
        step = np.zeros(2)
        step[c] = h
        dg[c] = (metric.at(x + step) - metric.at(x - step)) / (2 * h)
    lower = 0.5 * (np.einsum("bac->abc", dg) + np.einsum("cab->abc", dg) - dg)
    expected = np.einsum("ad,dbc->abc", np.linalg.inv(metric.at(x)), lower)
    assert christoffel(metric, x) == pytest.approx(expected, rel=1e-6, abs=1e-9)


def test_levi_civita_is_metric_compatible():
    assert metric_compatibility_defect(SPHERE, [1.1, 0.4], [0.3, -0.7]) < 1e-12


# curvature

def test_flat_riemann():
    assert np.all(riemann(MetricField.euclidean(2), [0.5, 0.5]) == 0.0)


def test_sphere_sectional_curvature():
    theta = math.pi / 3
    x = [theta, 0.2]
    R = riemann(SPHERE, x)
    g = SPHERE.at(x)
    lowered = np.einsum("ae,ebcd->abcd", g, R)
    assert lowered[0][1][0][1] / (g[0][0] * g[1][1]) == pytest.approx(1.0, abs=1e-8)
    assert R[0][1][0][1] == -R[0][1][1][0]


def test_one_dimensional_metric_is_flat():
    metric = MetricField.from_entries([["2 + sin(x1)"]])
    assert riemann(metric, [0.7]) == pytest.approx(np.zeros((1, 1, 1, 1)))
    assert ricci_scalar(metric, [0.7]) == 0.0


def test_ricci_scalar():
    assert ricci_scalar(MetricField.euclidean(2), [0.3, 0.1]) == 0.0
    assert ricci_scalar(SPHERE, [1.0, 0.0]) == pytest.approx(2.0)
    assert ricci_scalar(JACOBI_R2, [0.0, 0.0]) == pytest.approx(2.0)
    assert ricci_scalar(JACOBI_R2, [0.5, 0.0]) == pytest.approx(2.0 / 0.75 ** 3)


def test_conformal_ricci_identity_rescaling():
    one = parse("1", SymbolTable.state(2))
    assert conformal_ricci(SPHERE, one, [1.2, 0.0]) == pytest.approx(ricci_scalar(SPHERE, [1.2, 0.0]))


def test_conformal_ricci_radial_example():
    sigma2 = parse("2*(1 - x1^2 - x2^2)", SymbolTable.state(2))
    assert conformal_ricci(MetricField.euclidean(2), sigma2, [0.0, 0.0]) == pytest.approx(2.0)


def test_conformal_ricci_matches_direct_curvature():
    text = "exp(0.3*x1 - 0.2*x2^2) + 0.5"
    sigma2 = parse(text, SymbolTable.state(2))
    direct = MetricField.conformal(text, n=2)
    rng = np.random.default_rng(5)
    for x in rng.uniform(-1.0, 1.0, (5, 2)):
        assert conformal_ricci(MetricField.euclidean(2), sigma2, x) == pytest.approx(
            ricci_scalar(direct, x), rel=1e-7, abs=1e-10
        )


def test_conformal_ricci_boundary():
    sigma2 = parse("1 - x1^2", SymbolTable.state(2))
    with pytest.raises(BoundaryPoint):
        conformal_ricci(MetricField.euclidean(2), sigma2, [1.0, 0.0])


def test_covariant_hessian_and_gradient():
    f = parse("x1^2 + x1*x2", SymbolTable.state(2))
    hessian = covariant_hessian(MetricField.euclidean(2), f, [1.0, 2.0])
    assert hessian == pytest.approx(np.array([[2.0, 1.0], [1.0, 0.0]]))
    phi = parse("x2", SymbolTable.state(2))
    theta = 0.6
    assert raised_gradient(SPHERE, phi, [theta, 0.0]) == pytest.approx([0.0, 1.0 / math.sin(theta) ** 2])


# geodesics and transport

def test_great_circle_closes():
    """A unit-speed tilted great circle returns after 2π."""
    state = [math.pi / 2, 0.0, 0.6, 0.8]
    traj = integrate(geodesic_flow(SPHERE), state, (0.0, 2 * math.pi))
    expected = np.array([math.pi / 2, 2 * math.pi, 0.6, 0.8])
    assert traj.final_state == pytest.approx(expected, abs=1e-5)


def test_flat_transport_keeps_frame():
    flat = MetricField.euclidean(2)
    line = integrate(geodesic_flow(flat), [0.0, 0.0, 1.0, 0.5], (0.0, 3.0))
    transport = parallel_transport_frame(flat, line, np.eye(2))
    for frame in transport.frames:
        assert frame == pytest.approx(np.eye(2), abs=1e-12)


def test_equator_transport():
    """Along the equator the tangent stays parallel and the frame stays orthonormal."""
    settings = IntegratorSettings(sample_times=tuple(np.linspace(0.0, 2 * math.pi, 41)[1:].tolist()))
    equator = integrate(geodesic_flow(SPHERE), [math.pi / 2, 0.0, 0.0, 1.0], (0.0, 2 * math.pi), settings)
    transport = parallel_transport_frame(SPHERE, equator, [[0.0, 1.0], [1.0, 0.0]])
    quarter = int(np.argmin(np.abs(transport.parameters - math.pi / 2)))
    assert transport.frames[quarter][0] == pytest.approx([0.0, 1.0], abs=1e-8)
    assert transport.frames[-1][0] == pytest.approx(equator.final_state[2:], abs=1e-8)
    assert transport.max_drift < 1e-6


def test_transport_needs_orthonormal_frame():
    flat = MetricField.euclidean(2)
    line = integrate(geodesic_flow(flat), [0.0, 0.0, 1.0, 0.0], (0.0, 1.0))
    with pytest.raises(ConfigurationError):
        parallel_transport_frame(flat, line, [[2.0, 0.0], [0.0, 1.0]])
