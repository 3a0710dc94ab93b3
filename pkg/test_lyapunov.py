"""
Tests for seminorm families and Lyapunov exponent estimates
Run with: pytest test_lyapunov.py
"""
import math

import numpy as np
import pytest

from geostab.dynamics.flow import VectorFlowSystem, lift_second_order
from geostab.dynamics.lagrangian import LagrangianSystem
from geostab.errors import DegenerateSeminorm, DegenerateStart, DimensionMismatch, NegativeForm, RankDeficient
from geostab.geometry.metric import MetricField
from geostab.stability.lyapunov import (
    SeminormFamily, classify_global_stability, convergence_spread, lyapunov_exponent, lyapunov_spectrum, seminorm
)
from geostab.stability.maupertuis import geodesic_flow

INVERTED = lift_second_order(1, ["mu^2*x1"], {"mu": 1.0}, "inverted-oscillator")
EUCLIDEAN = SeminormFamily.euclidean()


# seminorms

def test_euclidean_seminorm():
    assert seminorm(EUCLIDEAN, [0.0, 0.0], [3.0, 4.0]) == pytest.approx(5.0)


def test_vertical_lift_ignores_velocities():
    family = SeminormFamily.vertical_lift(MetricField.euclidean(1))
    assert seminorm(family, [0.3, 1.0], [1.0, 5.0]) == pytest.approx(1.0)
    assert family.degenerate
    assert family.describe() == "vertical_lift(vertical)"
    diagonal = SeminormFamily.vertical_lift(MetricField.euclidean(1), lift="diagonal")
    assert not diagonal.degenerate
    assert diagonal.form([0.3, 1.0]) == pytest.approx(np.eye(2))


def test_custom_seminorm():
    family = SeminormFamily.custom([[2, 0], [0, 0]], 2)
    assert seminorm(family, [0.1, 0.2], [1.0, 1.0]) == pytest.approx(2.0 / math.sqrt(2.0))
    assert not family.degenerate


def test_lagrange_metric_family():
    L = LagrangianSystem.from_expression("0.5*(1 + x1^2)*u1^2", 1)
    family = SeminormFamily.lagrange_metric(L)
    assert family.form([2.0, 0.5]) == pytest.approx(np.array([[5.0, 0.0], [0.0, 0.0]]))


def test_negative_form_rejected():
    family = SeminormFamily.custom([[-1, 0], [0, 1]], 2)
    with pytest.raises(NegativeForm):
        seminorm(family, [0.0, 0.0], [1.0, 0.0])


def test_custom_form_shape_checked():
    with pytest.raises(DimensionMismatch):
        SeminormFamily.custom([[1, 0, 0], [0, 1, 0], [0, 0, 1]], 2)


# exponents

def test_inverted_oscillator_spectrum():
    spectrum = lyapunov_spectrum(INVERTED, [1.0, -1.0], np.eye(2), EUCLIDEAN, horizon=50.0)
    assert spectrum.exponents[0] == pytest.approx(1.0, abs=0.05)
    assert spectrum.exponents[1] == pytest.approx(-1.0, abs=0.05)
    assert spectrum.renormalizations == 100
    assert classify_global_stability(spectrum) == "unstable"


def test_inverted_oscillator_exponent():
    estimate = lyapunov_exponent(INVERTED, [1.0, -1.0], [0.3, 0.7], EUCLIDEAN)
    assert estimate.value == pytest.approx(1.0, abs=0.02)
    assert estimate.flags == ()
    assert estimate.horizon == pytest.approx(100.0)
    assert convergence_spread(estimate.series) < 0.05


def test_compact_metric_hides_the_instability():
    """(x² + 1)⁻¹dx⊗dx on the configuration block grows no faster than the orbit itself."""
    compact = SeminormFamily.custom([["1/(x1^2 + 1)"]], 2, configuration_dimension=1)
    estimate = lyapunov_exponent(INVERTED, [1.0, 0.0], [1.0, 0.0], compact, horizon=50.0)
    assert estimate.value == pytest.approx(0.0, abs=0.05)
    assert "degenerate-seminorm" in estimate.flags
    spectrum = lyapunov_spectrum(INVERTED, [1.0, 0.0], np.eye(2), EUCLIDEAN, horizon=50.0)
    assert classify_global_stability(estimate, tol=0.05) == "stable"
    assert classify_global_stability(spectrum, tol=0.05) == "unstable"


def test_exponent_depends_on_seminorm():
    """A configuration-only form sees a frozen direction while the full norm sees growth."""
    system = VectorFlowSystem.from_expressions(["0", "x2"])
    frozen = SeminormFamily.custom([[1]], 2, configuration_dimension=1)
    partial = lyapunov_exponent(system, [0.5, 0.0], [1.0, 1.0], frozen, horizon=50.0)
    full = lyapunov_exponent(system, [0.5, 0.0], [1.0, 1.0], EUCLIDEAN, horizon=50.0)
    assert partial.value == pytest.approx(0.0, abs=0.05)
    assert "degenerate-seminorm" in partial.flags
    assert full.value == pytest.approx(1.0, abs=0.05)
    assert classify_global_stability(partial, tol=0.05) == "stable"
    assert classify_global_stability(full, tol=0.05) == "unstable"


def test_stable_oscillator_has_zero_exponent():
    oscillator = lift_second_order(1, ["-x1"])
    estimate = lyapunov_exponent(oscillator, [1.0, 0.0], [1.0, 0.0], EUCLIDEAN, horizon=100.0)
    assert estimate.value == pytest.approx(0.0, abs=0.02)


def test_contracting_linear_spectrum():
    system = VectorFlowSystem.from_expressions(["-x1", "-2*x2"])
    spectrum = lyapunov_spectrum(system, [1.0, 1.0], np.eye(2), EUCLIDEAN, horizon=20.0)
    assert spectrum.exponents == pytest.approx((-1.0, -2.0), abs=1e-6)
    assert classify_global_stability(spectrum) == "stable"


def test_flat_geodesic_flow_has_zero_spectrum():
    flow = geodesic_flow(MetricField.euclidean(2))
    spectrum = lyapunov_spectrum(flow, [0.0, 0.0, 1.0, 0.5], np.eye(4), EUCLIDEAN, horizon=100.0)
    assert spectrum.exponents == pytest.approx((0.0, 0.0, 0.0, 0.0), abs=0.1)


def test_classify_global_stability():
    assert classify_global_stability([-0.1, 0.0]) == "stable"
    assert classify_global_stability([0.01]) == "unstable"
    assert classify_global_stability([0.01], tol=0.05) == "stable"


# failures

def test_zero_perturbation_is_degenerate_start():
    with pytest.raises(DegenerateStart):
        lyapunov_exponent(INVERTED, [1.0, 0.0], [0.0, 0.0], EUCLIDEAN)


def test_invisible_perturbation_is_degenerate_start():
    family = SeminormFamily.vertical_lift(MetricField.euclidean(1))
    with pytest.raises(DegenerateStart):
        lyapunov_exponent(INVERTED, [1.0, 0.0], [0.0, 1.0], family)


def test_reject_policy():
    family = SeminormFamily.vertical_lift(MetricField.euclidean(1), policy="reject")
    with pytest.raises(DegenerateSeminorm):
        lyapunov_exponent(INVERTED, [1.0, 0.0], [1.0, 0.0], family)


def test_spectrum_needs_definite_form():
    family = SeminormFamily.vertical_lift(MetricField.euclidean(1))
    with pytest.raises(DegenerateSeminorm):
        lyapunov_spectrum(INVERTED, [1.0, 0.0], np.eye(2), family)


def test_spectrum_rank_deficient_frame():
    with pytest.raises(RankDeficient):
        lyapunov_spectrum(INVERTED, [1.0, 0.0], [[1.0, 1.0], [2.0, 2.0]], EUCLIDEAN)


def test_family_dimension_checked():
    family = SeminormFamily.vertical_lift(MetricField.euclidean(2))
    with pytest.raises(DimensionMismatch):
        lyapunov_exponent(INVERTED, [1.0, 0.0], [1.0, 0.0], family)
