"""
Tests for the Jacobi-Maupertuis translation and the two-picture comparison
Run with: pytest test_maupertuis.py
"""
import dataclasses
import math

import numpy as np
import pytest

from geostab.dynamics.flow import IntegratorSettings, integrate
from geostab.dynamics.lagrangian import NaturalLagrangian, perturbation_operator_natural
from geostab.errors import BoundaryPoint, ConfigurationError, DegenerateStart, FixedPointUntranslatable
from geostab.geometry.metric import MetricField, conformal_ricci, ricci_scalar
from geostab.runner.scenarios import V_MINUS, V_PLUS
from geostab.stability.maupertuis import (
    JacobiTranslation, affine_initial_state, boundary_diagnostics, compare_stability, energy_projection,
    geodesic_flow, jacobi_deviation, jacobi_geodesic, jacobi_metric, jacobi_metric_discrepancy,
    parallel_frame_split, round_trip_error, shift_mode_exponents, time_reparametrization, translate_trajectory
)

FLAT = [[1, 0], [0, 1]]
RADIAL = NaturalLagrangian.from_strings(FLAT, "x1^2 + x2^2", name="radial-r2")
SPHERE = MetricField.from_entries([[1, 0], [0, "sin(x1)^2"]], name="sphere")

# E = 1 orbit with angular momentum 0.27 that turns well inside the boundary
ORBIT_X0 = [0.3, 0.0]
ORBIT_U0 = [1.0, math.sqrt(0.82)]
# circular E = 1 orbit at r² = ½: unit speed, dt/dτ = 1
CIRCLE_X0 = [math.sqrt(0.5), 0.0]
CIRCLE_U0 = [0.0, 1.0]


def _samples(horizon, count):
    return IntegratorSettings(sample_times=tuple(np.linspace(0.0, horizon, count + 1)[1:].tolist()))


# metric and reparametrization

@pytest.mark.parametrize("r", [0.0, 0.3, 0.6, 0.9])
def test_radial_jacobi_metric(r):
    x = [r, 0.0]
    translation = JacobiTranslation.build(RADIAL, 1.0, 2.0)
    assert jacobi_metric(RADIAL, 1.0, 2.0, x) == pytest.approx(2.0 * (1.0 - r * r) * np.eye(2))
    expected = 2.0 / (1.0 - r * r) ** 3
    assert conformal_ricci(RADIAL.kinetic, translation.conformal_factor, x) == pytest.approx(expected, rel=1e-8)
    assert ricci_scalar(translation.metric, x) == pytest.approx(expected, rel=1e-8)


def test_time_reparametrization():
    assert time_reparametrization(RADIAL, 1.0, 2.0, [0.0, 0.0]) == pytest.approx(0.5)
    with pytest.raises(BoundaryPoint):
        time_reparametrization(RADIAL, 1.0, 2.0, [1.0, 0.0])


def test_metric_degenerates_on_the_boundary():
    translation = JacobiTranslation.build(RADIAL, 1.0)
    assert translation.boundary([0.6, 0.8]) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(BoundaryPoint):
        translation.metric_at([0.6, 0.8])


def test_bad_jacobi_constant():
    with pytest.raises(ConfigurationError):
        JacobiTranslation.build(RADIAL, 1.0, 0.0)


# geodesics

def test_radial_geodesic_hits_boundary():
    translation = JacobiTranslation.build(RADIAL, 1.0)
    geodesic = jacobi_geodesic(translation, [0.0, 0.0], [math.sqrt(2.0), 0.0], 100.0)
    assert geodesic.parameter == "tau"
    assert geodesic.terminated_by == "boundary"
    diagnostics = boundary_diagnostics(translation, geodesic)
    assert diagnostics.hit
    assert diagnostics.impact_parameter == pytest.approx(geodesic.final_time)
    assert [level for level, _, _ in diagnostics.ricci_samples] == [1e-1, 1e-2, 1e-3]
    assert diagnostics.diverging
    assert diagnostics.ricci_samples[-1][2] > 1e8


def test_non_radial_orbit_stays_inside():
    """Angular momentum 0.1 keeps the turning points off the boundary."""
    translation = JacobiTranslation.build(RADIAL, 1.0)
    geodesic = jacobi_geodesic(translation, [0.5, 0.0], [math.sqrt(1.46), 0.2], 100.0)
    assert geodesic.terminated_by is None
    assert geodesic.final_time == pytest.approx(100.0)
    diagnostics = boundary_diagnostics(translation, geodesic)
    assert not diagnostics.hit
    assert diagnostics.impact_parameter is None
    assert diagnostics.min_distance > translation.band


def test_free_particle_time_is_affine_parameter():
    """V = 0, E = ½, C = 2: dt/dτ = 1."""
    free = NaturalLagrangian.from_strings(FLAT, "0", name="free")
    translation = JacobiTranslation.build(free, 0.5, 2.0)
    geodesic = jacobi_geodesic(translation, [0.0, 0.0], [0.6, 0.8], 5.0, _samples(5.0, 25))
    motion = translate_trajectory(geodesic, translation, "to_time")
    assert motion.parameter == "t"
    assert motion.times == pytest.approx(geodesic.times, abs=1e-10)
    assert motion.states == pytest.approx(geodesic.states, abs=1e-10)


def test_one_dimensional_translation_matches_motion():
    """Inverted oscillator at E = −½ from (cosh 1, sinh 1): x = cosh(1 + t)."""
    nat = NaturalLagrangian.from_strings([[1]], "-0.5*x1^2", name="inverted")
    translation = JacobiTranslation.build(nat, -0.5)
    geodesic = jacobi_geodesic(translation, [math.cosh(1.0)], [math.sinh(1.0)], 5.0, _samples(5.0, 25))
    motion = translate_trajectory(geodesic, translation, "to_time")
    assert motion.terminated_by is None
    for t, state in zip(motion.times, motion.states):
        assert state[0] == pytest.approx(math.cosh(1.0 + t), rel=1e-6)
        assert state[1] == pytest.approx(math.sinh(1.0 + t), rel=1e-6)


def test_circular_orbit_period():
    """r = ½ at E = ½: period π√2 in t, dt/dτ = 2 so π/√2 in τ."""
    translation = JacobiTranslation.build(RADIAL, 0.5)
    x0, u0 = [0.5, 0.0], [0.0, math.sqrt(0.5)]
    assert translation.dt_dtau(x0) == pytest.approx(2.0)
    period = math.pi / math.sqrt(2.0)
    geodesic = jacobi_geodesic(translation, x0, u0, period, _samples(period, 40))
    radii = np.hypot(geodesic.states[:, 0], geodesic.states[:, 1])
    assert radii == pytest.approx(np.full(41, 0.5), abs=1e-7)
    assert geodesic.final_state[:2] == pytest.approx(x0, abs=1e-6)
    motion = translate_trajectory(geodesic, translation, "to_time")
    assert motion.final_time == pytest.approx(math.pi * math.sqrt(2.0), abs=1e-6)
    assert motion.final_state[2:] == pytest.approx(u0, abs=1e-6)


def test_translation_reads_only_the_first_sample():
    translation = JacobiTranslation.build(RADIAL, 1.0)
    geodesic = jacobi_geodesic(translation, ORBIT_X0, ORBIT_U0, 3.0, _samples(3.0, 10))
    scrambled = geodesic.states.copy()
    scrambled[1:] += 0.01
    motion = translate_trajectory(geodesic, translation, "to_time")
    other = translate_trajectory(dataclasses.replace(geodesic, states=scrambled), translation, "to_time")
    assert other.times == pytest.approx(motion.times)
    assert other.states == pytest.approx(motion.states)


@pytest.mark.parametrize("L", [0.1, 0.2, 0.3])
def test_round_trip_for_non_radial_orbits(L):
    translation = JacobiTranslation.build(RADIAL, 1.0)
    u0 = [math.sqrt(1.5 - 4.0 * L * L), 2.0 * L]
    assert round_trip_error(translation, [0.5, 0.0], u0, horizon=5.0) < 1e-6


def test_round_trip_recovers_motion():
    translation = JacobiTranslation.build(RADIAL, 1.0)
    assert round_trip_error(translation, ORBIT_X0, ORBIT_U0, horizon=5.0) < 1e-6


def test_geodesic_speed_is_constant():
    translation = JacobiTranslation.build(RADIAL, 1.0)
    geodesic = jacobi_geodesic(translation, ORBIT_X0, ORBIT_U0, 10.0, _samples(10.0, 50))
    speeds = [translation.metric.inner(s[:2], s[2:], s[2:]) for s in geodesic.states]
    assert max(speeds) - min(speeds) < 1e-7


def test_shared_jacobi_metric():
    """V± agree inside the unit disc at E = 1 and differ outside."""
    plus = NaturalLagrangian.from_strings(FLAT, V_PLUS, name="v-plus")
    minus = NaturalLagrangian.from_strings(FLAT, V_MINUS, name="v-minus")
    points = [[r * math.cos(a), r * math.sin(a)] for r in np.linspace(0.0, 0.95, 20) for a in (0.0, 0.7, 2.0)]
    assert jacobi_metric_discrepancy(plus, minus, 1.0, points) < 1e-12
    x, u = [1.2, 0.0], [0.1, 0.3]
    gap = perturbation_operator_natural(plus, x, u) - perturbation_operator_natural(minus, x, u)
    assert np.max(np.abs(gap)) > 0.1


def test_shift_modes():
    translation = JacobiTranslation.build(RADIAL, 1.0)
    horizon = 50.0
    along, scaling = shift_mode_exponents(translation, CIRCLE_X0, CIRCLE_U0, horizon=horizon)
    assert along.value == pytest.approx(0.0, abs=0.05)
    # linear growth: the estimate decays like ln T / T
    assert 0.0 < scaling.value < math.log(horizon) / horizon + 0.05


# Jacobi fields and the parallel frame

def test_sphere_jacobi_field():
    """Along the equator J = sin τ ∂θ."""
    equator = integrate(geodesic_flow(SPHERE), [math.pi / 2, 0.0, 0.0, 1.0], (0.0, math.pi), _samples(math.pi, 40))
    field = jacobi_deviation(SPHERE, equator, [0.0, 0.0], [1.0, 0.0])
    for tau, state in zip(field.times, field.states):
        assert state[0] == pytest.approx(math.sin(tau), abs=1e-6)
        assert state[2] == pytest.approx(math.cos(tau), abs=1e-6)


def test_parallel_frame_split_on_sphere():
    equator = integrate(geodesic_flow(SPHERE), [math.pi / 2, 0.0, 0.0, 1.0], (0.0, 3.0), _samples(3.0, 30))
    split = parallel_frame_split(SPHERE, equator)
    assert split.curvature[:, 0, :] == pytest.approx(np.zeros((31, 2)), abs=1e-8)
    assert split.curvature[:, 1, 1] == pytest.approx(np.ones(31), abs=1e-8)
    assert split.max_drift < 1e-6
    reduced = split.reduced_solution([0.0, 0.0], [0.5, 1.0])
    for tau, state in zip(reduced.times, reduced.states):
        assert state[0] == pytest.approx(0.5 * tau, abs=1e-8)
        assert state[1] == pytest.approx(math.sin(tau), abs=1e-6)


def test_frame_split_needs_motion():
    still = integrate(geodesic_flow(SPHERE), [1.0, 0.0, 0.0, 0.0], (0.0, 1.0))
    with pytest.raises(DegenerateStart):
        parallel_frame_split(SPHERE, still)


# translation failures

def test_fixed_point_is_untranslatable():
    translation = JacobiTranslation.build(RADIAL, 0.0)
    with pytest.raises(FixedPointUntranslatable):
        affine_initial_state(translation, [0.0, 0.0], [0.0, 0.0])


def test_energy_mismatch():
    translation = JacobiTranslation.build(RADIAL, 1.0)
    with pytest.raises(ConfigurationError):
        affine_initial_state(translation, [0.5, 0.0], [0.0, 0.0])


def test_energy_projection():
    excluded, projected = energy_projection(RADIAL, [0.5, 0.0], [math.sqrt(1.5), 0.0], np.eye(4))
    assert excluded == 2
    dE = np.array([1.0, 0.0, math.sqrt(1.5), 0.0])
    assert projected @ dE == pytest.approx(np.zeros(4), abs=1e-12)


# comparison

def test_one_dimensional_comparison():
    """The inverted oscillator at E = −½: unstable intrinsically, flat as a geodesic."""
    nat = NaturalLagrangian.from_strings([[1]], "-0.5*x1^2", name="inverted")
    report = compare_stability(nat, -0.5, [math.cosh(1.0)], [math.sinh(1.0)], horizon=30.0)
    assert "one-dimensional" in report.flags
    assert "verdicts-disagree" in report.flags
    assert "energy-perturbations-excluded" in report.flags
    assert report.intrinsic.exponents[0] == pytest.approx(1.0, abs=0.1)
    assert report.intrinsic.global_verdict == "unstable"
    assert report.geodesic.global_verdict == "stable"
    assert report.geodesic.exponents == (0.0, 0.0)
    assert "flat" in report.geodesic.notes
    assert len(report.geodesic.measured) == 2
    assert max(abs(v) for v in report.geodesic.measured) < 0.5
    assert report.intrinsic.local.verdict == "unstable"
    assert report.geodesic.local.verdict == "marginal"
    assert report.round_trip_error is not None
    header, rows = report.to_rows()
    assert header == ["picture", "index", "exponent"]
    assert len(rows) == 4


def test_fixed_point_comparison():
    report = compare_stability(RADIAL, 0.0, [0.0, 0.0], [0.0, 0.0], horizon=5.0)
    assert "fixed-point" in report.flags
    assert report.geodesic.notes == ("untranslatable",)
    assert report.energy_excluded == 0
    assert report.to_dict()["boundary"]["fixed_point"]


def test_comparison_energy_mismatch():
    with pytest.raises(ConfigurationError):
        compare_stability(RADIAL, 2.0, [0.5, 0.0], [0.0, 0.0], horizon=5.0)
