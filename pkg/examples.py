"""
Example usage of geostab
Walks through the main analyses on small systems
"""
import math

import numpy as np

from geostab.dynamics import NaturalLagrangian, lift_second_order
from geostab.stability import (
    JacobiTranslation, SeminormFamily, SprayData, boundary_diagnostics, compare_stability, deviation_tensor_P,
    jacobi_geodesic, jacobi_metric_discrepancy, lyapunov_exponent, lyapunov_spectrum
)


def example_1_seminorm_dependence():
    """Example 1: one orbit, two seminorms, two verdicts."""

    print("Example 1: Inverted oscillator")
    print("-" * 60)

    flow = lift_second_order(1, ["mu^2*x1"], {"mu": 1.0}, "inverted-oscillator")
    spectrum = lyapunov_spectrum(flow, [1.0, 0.0], np.eye(2), SeminormFamily.euclidean(), horizon=50.0)
    print(f"Euclidean spectrum: {spectrum.exponents}")

    compact = SeminormFamily.custom([["1/(x1^2 + 1)"]], 2, 1)
    estimate = lyapunov_exponent(flow, [1.0, 0.0], [1.0, 0.0], compact, horizon=50.0)
    print(f"Bounded-metric exponent: {estimate.value:.4f} {estimate.flags}")
    print("\n")


def example_2_deviation_tensor():
    """Example 2: KCC deviation tensor of the inverted oscillator."""

    print("Example 2: Deviation tensor")
    print("-" * 60)

    spray = SprayData.from_expressions(["-0.5*mu^2*x1"], 1, {"mu": 1.0})
    print(f"P at (1, 0): {deviation_tensor_P(spray, [1.0], [0.0])}")
    print("\n")


def example_3_boundary():
    """Example 3: a radial Jacobi geodesic runs into the boundary."""

    print("Example 3: Radial geodesic of V = r^2")
    print("-" * 60)

    nat = NaturalLagrangian.from_strings([[1, 0], [0, 1]], "x1^2 + x2^2")
    translation = JacobiTranslation.build(nat, 1.0)
    geodesic = jacobi_geodesic(translation, [0.0, 0.0], [math.sqrt(2.0), 0.0], horizon=5.0)
    diagnostics = boundary_diagnostics(translation, geodesic)
    print(f"Stopped by: {geodesic.terminated_by} at tau={diagnostics.impact_parameter}")
    for level, tau, ricci in diagnostics.ricci_samples:
        print(f"  |E - V| = {level:g}: R = {ricci:.6g}")
    print("\n")


def example_4_shared_metric():
    """Example 4: two potentials, one Jacobi metric."""

    print("Example 4: V+ and V-")
    print("-" * 60)

    r2 = "(x1^2 + x2^2)"
    plus = NaturalLagrangian.from_strings([[1, 0], [0, 1]], f"2*{r2} - {r2}^2 + 2*step({r2} - 1)*({r2} - 1)^2")
    minus = NaturalLagrangian.from_strings([[1, 0], [0, 1]], f"2*{r2} - {r2}^2 - 2*step({r2} - 1)*({r2} - 1)^2")
    grid = [[r * math.cos(a), r * math.sin(a)] for r in np.linspace(0.0, 0.95, 5) for a in (0.0, 1.0)]
    print(f"Jacobi metric discrepancy: {jacobi_metric_discrepancy(plus, minus, 1.0, grid):.3e}")
    print("\n")


def example_5_comparison():
    """Example 5: both pictures of a one-dimensional system."""

    print("Example 5: One-dimensional comparison")
    print("-" * 60)

    nat = NaturalLagrangian.from_strings([[1]], "-0.5*x1^2")
    report = compare_stability(nat, -0.5, [math.cosh(1.0)], [math.sinh(1.0)], horizon=20.0)
    print(f"Intrinsic: {report.intrinsic.global_verdict}, geodesic: {report.geodesic.global_verdict}")
    print(f"Flags: {report.flags}")
    print("\n")


def main():
    """Run all examples."""
    print("=" * 60)
    print("geostab examples")
    print("=" * 60)
    example_1_seminorm_dependence()
    example_2_deviation_tensor()
    example_3_boundary()
    example_4_shared_metric()
    example_5_comparison()


if __name__ == "__main__":
    main()
