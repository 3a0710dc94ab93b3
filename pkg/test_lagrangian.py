"""
Tests for Lagrangian systems and natural Lagrangians
Run with: pytest test_lagrangian.py
"""
import math

import numpy as np
import pytest

from geostab.dynamics.flow import IntegratorSettings, integrate
from geostab.dynamics.lagrangian import (
    LagrangianSystem, NaturalLagrangian, energy, energy_drift, evolve_perturbation_natural,
    hamiltonian_constraint, lagrange_metric, perturbation_operator_natural, semispray_from_lagrangian, spray_G
)
from geostab.errors import DegenerateLagrangian

INVERTED = LagrangianSystem.from_expression("0.5*(u1^2 + mu^2*x1^2)", 1, {"mu": 1.0}, "inverted-oscillator")
CURVED = NaturalLagrangian.from_strings([[1, 0], [0, "1 + x1^2"]], "0.3*x1^2 + x2^4", name="curved")


def _samples(horizon, count):
    return IntegratorSettings(sample_times=tuple(np.linspace(0.0, horizon, count + 1)[1:].tolist()))


# Lagrange metric and energy

def test_free_particle_metric():
    free = LagrangianSystem.from_expression("0.5*u1^2", 1)
    assert lagrange_metric(free, [0.4], [2.0]) == pytest.approx(np.array([[1.0]]))


def test_natural_metric_is_kinetic():
    x, u = [0.7, -0.2], [0.3, 1.1]
    assert lagrange_metric(CURVED.lagrangian(), x, u) == pytest.approx(CURVED.kinetic.at(x))


def test_linear_lagrangian_is_degenerate():
    with pytest.raises(DegenerateLagrangian):
        lagrange_metric(LagrangianSystem.from_expression("u1", 1), [0.0], [1.0])


def test_energy():
    free = LagrangianSystem.from_expression("0.5*u1^2", 1)
    assert energy(free, [0.0], [3.0]) == pytest.approx(4.5)
    # the inverted oscillator has E = ½(u² − x²)
    assert energy(INVERTED, [1.0], [1.0]) == pytest.approx(0.0)


def test_hamiltonian_constraint_matches_energy():
    x, u = [0.4, 0.9], [-0.5, 0.25]
    assert hamiltonian_constraint(CURVED, x, u) == pytest.approx(energy(CURVED.lagrangian(), x, u))


# semisprays

def test_free_semispray_is_zero():
    flow = semispray_from_lagrangian(LagrangianSystem.from_expression("0.5*u1^2", 1))
    assert flow([0.5, 2.0]) == pytest.approx([2.0, 0.0])


def test_oscillator_semispray():
    flow = semispray_from_lagrangian(INVERTED)
    assert flow([0.8, -0.3]) == pytest.approx([-0.3, 0.8])


def test_natural_semispray_matches_euler_lagrange():
    direct = CURVED.semispray()
    generic = semispray_from_lagrangian(CURVED.lagrangian())
    rng = np.random.default_rng(2)
    for state in rng.uniform(-1.0, 1.0, (10, 4)):
        assert direct(state) == pytest.approx(generic(state), rel=1e-10, abs=1e-12)


def test_degenerate_semispray_raises_on_evaluation():
    flow = semispray_from_lagrangian(LagrangianSystem.from_expression("u1 + x1^2", 1))
    with pytest.raises(DegenerateLagrangian):
        flow([0.1, 0.2])


def test_spray_coefficients():
    mu = 1.0
    x = 0.6
    assert spray_G(INVERTED, [x], [0.0]) == pytest.approx([-0.5 * mu ** 2 * x])
    assert spray_G(CURVED, [0.1, 0.2], [0.3, 0.4]) == pytest.approx(
        -0.5 * CURVED.semispray()([0.1, 0.2, 0.3, 0.4])[2:]
    )


# perturbations

def test_perturbation_operator_inverted_oscillator():
    nat = NaturalLagrangian.from_strings([[1]], "-0.5*mu^2*x1^2", {"mu": 1.0})
    assert perturbation_operator_natural(nat, [0.3], [0.2]) == pytest.approx(np.array([[1.0]]))


def test_perturbation_operator_flat_oscillator():
    omega = 1.5
    nat = NaturalLagrangian.from_strings([[1, 0], [0, 1]], "0.5*w^2*(x1^2 + x2^2)", {"w": omega})
    P = perturbation_operator_natural(nat, [0.2, -0.4], [1.0, 0.5])
    assert P == pytest.approx(np.diag([-omega ** 2, -omega ** 2]))


def test_evolve_inverted_perturbation():
    """ξ'' = ξ from ξ = 1, ξ̇ = 0 is cosh t."""
    nat = NaturalLagrangian.from_strings([[1]], "-0.5*x1^2")
    base = integrate(nat.semispray(), [0.2, 0.1], (0.0, 2.0), _samples(2.0, 20))
    perturbation = evolve_perturbation_natural(nat, base, [1.0], [0.0])
    for t, state in zip(perturbation.times, perturbation.states):
        assert state[0] == pytest.approx(math.cosh(t), rel=1e-7)
        assert state[1] == pytest.approx(math.sinh(t), abs=1e-7)


def test_evolve_oscillator_perturbation():
    omega = 2.0
    nat = NaturalLagrangian.from_strings([[1, 0], [0, 1]], "0.5*w^2*(x1^2 + x2^2)", {"w": omega})
    base = integrate(nat.semispray(), [0.5, 0.0, 0.0, 0.3], (0.0, 3.0), _samples(3.0, 30))
    perturbation = evolve_perturbation_natural(nat, base, [1.0, 0.0], [0.0, 0.0])
    for t, state in zip(perturbation.times, perturbation.states):
        assert state[0] == pytest.approx(math.cos(omega * t), abs=1e-7)
        assert state[1] == pytest.approx(0.0, abs=1e-9)


def test_energy_is_conserved():
    traj = integrate(CURVED.semispray(), [0.3, 0.2, 0.5, -0.4], (0.0, 10.0), _samples(10.0, 100))
    assert energy_drift(CURVED, traj) < 1e-7
    assert energy_drift(CURVED.lagrangian(), traj) < 1e-7
