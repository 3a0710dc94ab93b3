"""
Tests for sprays, the deviation tensor and local stability verdicts
Run with: pytest test_kcc.py
"""
import math

import numpy as np
import pytest

from geostab.core.linalg import eigenvalues
from geostab.dynamics.flow import IntegratorSettings, integrate
from geostab.dynamics.lagrangian import NaturalLagrangian, perturbation_operator_natural
from geostab.errors import DimensionMismatch
from geostab.geometry.metric import MetricField, christoffel
from geostab.stability.kcc import (
    SprayData, berwald_coefficients, classify_local_stability, deviation_tensor_P, epsilon_defect,
    kcc_residual, local_stability_track, nonlinear_connection, rtilde_operator
)

INVERTED = SprayData.from_expressions(["-0.5*mu^2*x1"], 1, {"mu": 1.0}, "inverted-oscillator")
SPHERE = MetricField.from_entries([[1, 0], [0, "sin(x1)^2"]], name="sphere")


def _samples(horizon, count):
    return IntegratorSettings(sample_times=tuple(np.linspace(0.0, horizon, count + 1)[1:].tolist()))


def _real_spectrum(matrix):
    return sorted(v.real for v in eigenvalues(matrix).values)


# deviation tensor

def test_inverted_oscillator_deviation():
    P = deviation_tensor_P(INVERTED, [0.4], [-1.2])
    assert P == pytest.approx(np.array([[1.0]]), abs=1e-10)
    traj = integrate(INVERTED.flow(), [1.0, 0.0], (0.0, 2.0), _samples(2.0, 10))
    report = local_stability_track(INVERTED, traj)
    assert report.verdict.verdict == "unstable"
    assert report.verdict.max_real == pytest.approx(1.0)
    assert len(report.spectra) == 11


@pytest.mark.parametrize("nat", [
    NaturalLagrangian.from_strings([[1, 0], [0, 1]], "0.5*w^2*(x1^2 + x2^2)", {"w": 1.3}),
    NaturalLagrangian.from_strings([[1, 0], [0, "1 + x1^2"]], "0"),
    NaturalLagrangian.from_strings([["2 + x2^2", "0.5*x1"], ["0.5*x1", 1]], "x1^2*x2 + 0.1*x2^4"),
])
def test_natural_deviation_matches_covariant_operator(nat):
    """For natural systems P equals −R(·, u)u − k⁻¹∇∇V."""
    spray = SprayData.from_natural(nat)
    rng = np.random.default_rng(17)
    for state in rng.uniform(-0.8, 0.8, (20, 4)):
        x, u = state[:2], state[2:]
        assert deviation_tensor_P(spray, x, u) == pytest.approx(
            perturbation_operator_natural(nat, x, u), rel=1e-8, abs=1e-8
        )


def test_spray_constructors_agree():
    nat = NaturalLagrangian.from_strings([[1, 0], [0, "1 + x1^2"]], "0.2*x2^2")
    direct = SprayData.from_natural(nat)
    generic = SprayData.from_lagrangian(nat.lagrangian())
    x, u = [0.3, -0.5], [1.0, 0.4]
    assert deviation_tensor_P(direct, x, u) == pytest.approx(deviation_tensor_P(generic, x, u), rel=1e-9)
    assert SprayData.from_expressions(["x1", "u2"], 2).dimension == 2
    with pytest.raises(DimensionMismatch):
        SprayData.from_expressions(["x1"], 2)


# linear connection

def test_sphere_deviation_spectrum():
    """Unit-speed geodesics on the unit sphere: P has eigenvalues 0 and −1."""
    spray = SprayData.from_metric(SPHERE)
    theta = 1.1
    u = np.array([0.6, 0.8 / math.sin(theta)])
    P = deviation_tensor_P(spray, [theta, 0.3], u)
    assert _real_spectrum(P) == pytest.approx([-1.0, 0.0], abs=1e-8)
    flat_potential = NaturalLagrangian.from_strings([[1, 0], [0, "sin(x1)^2"]], "0")
    assert P == pytest.approx(perturbation_operator_natural(flat_potential, [theta, 0.3], u), abs=1e-8)


def test_sphere_connection_is_levi_civita():
    spray = SprayData.from_metric(SPHERE)
    x, u = [0.9, 0.2], [0.5, -1.5]
    gamma = christoffel(SPHERE, x)
    berwald = berwald_coefficients(spray, x, u)
    assert berwald.coefficients == pytest.approx(gamma, abs=1e-12)
    assert berwald.symmetry_defect < 1e-12
    assert nonlinear_connection(spray, x, u) == pytest.approx(np.einsum("abc,c->ab", gamma, u), abs=1e-12)
    assert set(berwald.to_dict()) == {"connection", "coefficients", "point"}


def test_quadratic_spray_has_no_epsilon_defect():
    spray = SprayData.from_metric(SPHERE)
    _, d, worst = epsilon_defect(spray, [0.7, 0.1], [0.4, 1.2])
    assert worst < 1e-10
    assert d == pytest.approx(np.zeros((2, 2)), abs=1e-10)


def test_cubic_spray_epsilon_defect():
    """G = u³: N = 3u², ε = −u³ and ∂̄ε = −3u²."""
    spray = SprayData.from_expressions(["u1^3"], 1)
    e, d, worst = epsilon_defect(spray, [0.0], [1.0])
    assert e == pytest.approx([-1.0])
    assert d == pytest.approx(np.array([[-3.0]]))
    assert worst == pytest.approx(3.0)


# R̃ operator

def test_rtilde_of_linear_spray_doubles_P():
    spray = SprayData.from_expressions(["-0.5*(2*x1 + x2)", "-0.5*(x1 - x2)"], 2)
    x, u = [0.2, 0.7], [-0.4, 0.1]
    P = deviation_tensor_P(spray, x, u)
    R = rtilde_operator(spray, x, u)
    assert R.shape == (4, 4)
    doubled = sorted(_real_spectrum(P) * 2)
    assert _real_spectrum(R) == pytest.approx(doubled, abs=1e-7)


@pytest.mark.parametrize("nat", [
    NaturalLagrangian.from_strings([[1, 0], [0, 1]], "0.5*w^2*(x1^2 + x2^2)", {"w": 1.3}),
    NaturalLagrangian.from_strings([[1, 0], [0, "1 + x1^2"]], "0"),
])
def test_rtilde_of_natural_spray_doubles_P(nat):
    spray = SprayData.from_natural(nat)
    rng = np.random.default_rng(23)
    for state in rng.uniform(-0.8, 0.8, (5, 4)):
        x, u = state[:2], state[2:]
        _, _, worst = epsilon_defect(spray, x, u)
        assert worst < 1e-10
        doubled = sorted(_real_spectrum(deviation_tensor_P(spray, x, u)) * 2)
        assert _real_spectrum(rtilde_operator(spray, x, u)) == pytest.approx(doubled, abs=1e-7)


def test_damped_oscillator_is_mixed_complex():
    damped = SprayData.from_expressions(["0.5*(g*u1 + x1)"], 1, {"g": 0.1}, "damped")
    assert deviation_tensor_P(damped, [0.5], [0.1]) == pytest.approx(np.array([[-1.0 + 0.0025]]))
    traj = integrate(damped.flow(), [1.0, 0.0], (0.0, 5.0), _samples(5.0, 10))
    report = local_stability_track(damped, traj, "rtilde")
    assert report.verdict.mixed_complex
    assert report.verdict.verdict == "stable"
    header, rows = report.to_rows()
    assert header == ["parameter", "re1", "im1", "re2", "im2"]
    assert len(rows) == 11


# verdicts

def test_classify_local_stability():
    track = [eigenvalues([[-1.0, 0.0], [0.0, -2.0]])]
    assert classify_local_stability(track).verdict == "stable"
    assert classify_local_stability([eigenvalues([[0.0]])]).verdict == "marginal"
    assert classify_local_stability(track + [eigenvalues([[0.5]])]).verdict == "unstable"
    verdict = classify_local_stability([eigenvalues([[1e-9]])], tol=1e-6)
    assert verdict.verdict == "marginal" and verdict.tolerance == 1e-6


def test_kcc_residual_vanishes_for_variational_perturbations():
    vdp = SprayData.from_expressions(["-0.5*((1 - x1^2)*u1 - x1)"], 1, name="van-der-pol")
    assert kcc_residual(vdp, [1.3], [-0.4], [0.7], [0.2]) == pytest.approx([0.0], abs=1e-10)
    sphere = SprayData.from_metric(SPHERE)
    assert kcc_residual(sphere, [1.0, 0.5], [0.3, 0.9], [0.1, -0.2], [0.5, 0.4]) == pytest.approx(
        [0.0, 0.0], abs=1e-10
    )
