"""
Tests for flows, the integrator and the variational equation
Run with: pytest test_flow.py
"""
import math

import numpy as np
import pytest

from geostab.dynamics.flow import (
    EventSpec, IntegratorSettings, Trajectory, VectorFlowSystem, integrate, lift_second_order,
    variational_integrate
)
from geostab.errors import ConfigurationError, DimensionMismatch, EvaluationError, MaxStepsExceeded, StepUnderflow
from geostab.integrators.router import StepperRouter

INVERTED = lift_second_order(1, ["mu^2*x1"], {"mu": 1.0}, "inverted-oscillator")


# integrate

def test_exponential_growth():
    growth = VectorFlowSystem.from_expressions(["x1"])
    traj = integrate(growth, [1.0], (0.0, 1.0))
    assert traj.final_state[0] == pytest.approx(math.e, abs=1e-8)
    assert traj.parameter == "t"


def test_zero_flow_is_constant():
    still = VectorFlowSystem.from_expressions(["0", "0"])
    traj = integrate(still, [0.3, -0.2], (0.0, 5.0))
    assert np.all(traj.states == np.array([0.3, -0.2]))


def test_inverted_oscillator_growing_mode():
    traj = integrate(INVERTED, [1.0, 1.0], (0.0, 2.0))
    assert traj.final_state[0] == pytest.approx(math.exp(2.0), abs=1e-6)
    assert traj.configuration_dimension == 1
    assert traj.state_names() == ["x1", "u1"]


def test_rk4_fixed_step():
    growth = VectorFlowSystem.from_expressions(["x1"])
    traj = integrate(growth, [1.0], (0.0, 1.0), IntegratorSettings(method="rk4", step=0.01))
    assert traj.final_state[0] == pytest.approx(math.e, abs=1e-8)
    assert traj.final_time == 1.0


def test_sample_times():
    settings = IntegratorSettings(sample_times=(0.5, 1.0, 1.5, 2.0))
    traj = integrate(INVERTED, [1.0, 1.0], (0.0, 2.0), settings)
    assert traj.times.tolist() == [0.0, 0.5, 1.0, 1.5, 2.0]
    assert traj.states[2][0] == pytest.approx(math.e, abs=1e-7)


def test_hermite_interpolation():
    traj = integrate(INVERTED, [1.0, 1.0], (0.0, 2.0), IntegratorSettings(sample_times=(1.0, 2.0)))
    assert traj.interpolate(1.5)[0] == pytest.approx(math.exp(1.5), rel=2e-2)
    with pytest.raises(ConfigurationError):
        traj.interpolate(3.0)


def test_free_motion_is_straight():
    free = lift_second_order(2, ["0", "0"])
    traj = integrate(free, [0.0, 1.0, 2.0, -1.0], (0.0, 3.0))
    assert traj.final_state == pytest.approx([6.0, -2.0, 2.0, -1.0])


def test_circular_orbit_keeps_radius():
    """V = r²: centripetal balance u² = 2r² holds for every radius."""
    orbit = lift_second_order(2, ["-2*x1", "-2*x2"])
    r = 0.7
    omega = math.sqrt(2.0)
    period = 2 * math.pi / omega
    settings = IntegratorSettings(sample_times=tuple(np.linspace(0.0, period, 51)[1:].tolist()))
    traj = integrate(orbit, [r, 0.0, 0.0, r * omega], (0.0, period), settings)
    radii = np.hypot(traj.states[:, 0], traj.states[:, 1])
    assert np.max(np.abs(radii - r)) < 1e-6


# events

def test_terminal_event_stops_at_crossing():
    drift = VectorFlowSystem.from_expressions(["1"])
    settings = IntegratorSettings(events=(EventSpec("half", lambda y: y[0] - 0.5, direction=1),))
    traj = integrate(drift, [0.0], (0.0, 2.0), settings)
    assert traj.terminated_by == "half"
    assert traj.final_time == pytest.approx(0.5, abs=1e-9)
    assert traj.events_of("half")[0].state[0] == pytest.approx(0.5, abs=1e-9)


def test_non_terminal_event_records_all_crossings():
    rotation = VectorFlowSystem.from_expressions(["-x2", "x1"])
    settings = IntegratorSettings(events=(EventSpec("axis", lambda y: y[1], direction=0, terminal=False),))
    traj = integrate(rotation, [1.0, 0.0], (0.0, 10.0), settings)
    crossings = [e.parameter for e in traj.events_of("axis")]
    assert crossings == pytest.approx([math.pi, 2 * math.pi, 3 * math.pi], abs=1e-8)
    assert traj.terminated_by is None


def test_event_direction_filter():
    rotation = VectorFlowSystem.from_expressions(["-x2", "x1"])
    settings = IntegratorSettings(events=(EventSpec("down", lambda y: y[1], direction=-1, terminal=False),))
    traj = integrate(rotation, [1.0, 0.0], (0.0, 10.0), settings)
    assert [e.parameter for e in traj.events_of("down")] == pytest.approx([math.pi, 3 * math.pi], abs=1e-8)


# failures

def test_blow_up_underflows():
    """ẋ = x² from 1 blows up at t = 1."""
    blow = VectorFlowSystem.from_expressions(["x1^2"])
    with pytest.raises((StepUnderflow, MaxStepsExceeded)):
        integrate(blow, [1.0], (0.0, 2.0), IntegratorSettings(max_steps=100_000))


def test_max_steps():
    with pytest.raises(MaxStepsExceeded):
        integrate(INVERTED, [1.0, 0.0], (0.0, 10.0), IntegratorSettings(method="rk4", step=0.01, max_steps=50))


def test_bad_initial_state():
    with pytest.raises(DimensionMismatch):
        integrate(INVERTED, [1.0], (0.0, 1.0))
    singular = VectorFlowSystem.from_expressions(["log(x1)"])
    with pytest.raises(EvaluationError):
        integrate(singular, [-1.0], (0.0, 1.0))


def test_decreasing_span_rejected():
    with pytest.raises(ConfigurationError):
        integrate(INVERTED, [1.0, 0.0], (1.0, 0.0))


def test_lift_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        lift_second_order(2, ["x1"])


def test_trajectory_requires_increasing_times():
    with pytest.raises(ConfigurationError):
        Trajectory("t", [0.0, 0.0], [[1.0], [1.0]])


def test_router_caches_steppers():
    router = StepperRouter()
    assert router.get_stepper("rk4") is router.get_stepper("rk4")
    assert router.get_stepper().adaptive
    with pytest.raises(ValueError):
        router.get_stepper("euler")


# variational equation

def test_zero_perturbation_stays_zero():
    traj = variational_integrate(INVERTED, [1.0, 0.0], [[0.0, 0.0]], (0.0, 3.0))
    assert np.all(traj.frames == 0.0)


def test_linear_flow_eigenvector():
    traj = variational_integrate(INVERTED, [0.3, -0.2], [[1.0, 1.0]], (0.0, 1.0))
    assert traj.frames[-1][0] == pytest.approx([math.e, math.e], abs=1e-7)


def test_renormalization_callback():
    calls = []

    def renormalize(t, x, frame):
        calls.append(t)
        return frame / np.linalg.norm(frame[0])

    traj = variational_integrate(INVERTED, [1.0, 0.0], [[1.0, 0.0]], (0.0, 2.0), renormalize=renormalize,
                                 interval=0.5)
    assert calls == pytest.approx([0.5, 1.0, 1.5, 2.0])
    assert traj.times.tolist() == pytest.approx([0.0, 0.5, 1.0, 1.5, 2.0])
    assert len(traj.events_of("renormalization")) == 4
    # frames hold the propagated vector before rescaling
    assert np.linalg.norm(traj.frames[1][0]) > 1.0


@pytest.mark.parametrize("components,x0,xi0", [
    (["x2", "-sin(x1)"], [1.0, 0.0], [1.0, 0.5]),
    (["x2", "x1 - x1^3 - 0.1*x2"], [0.5, 0.2], [0.3, -1.0]),
    (["x2", "(1 - x1^2)*x2 - x1"], [2.0, 0.0], [0.0, 1.0]),
])
def test_variational_matches_finite_differences(components, x0, xi0):
    system = VectorFlowSystem.from_expressions(components)
    settings = IntegratorSettings(method="rk4", step=1e-3)
    eps = 1e-6
    base = integrate(system, x0, (0.0, 5.0), settings).final_state
    shifted = integrate(system, np.add(x0, eps * np.asarray(xi0)), (0.0, 5.0), settings).final_state
    fd = (shifted - base) / eps
    xi = variational_integrate(system, x0, [xi0], (0.0, 5.0), settings).frames[-1][0]
    assert np.linalg.norm(xi - fd) <= 1e-4 * np.linalg.norm(xi)
