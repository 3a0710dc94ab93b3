"""
Lagrangian systems on TM.

A LagrangianSystem turns L(x, u) into the semispray whose integral curves solve
the Euler-Lagrange equations. NaturalLagrangian is the special case
L = ½k_ab(x)u^a u^b − V(x), for which the connection and perturbation operator
have closed forms in terms of the kinetic metric k.
"""
import logging
from dataclasses import dataclass
from typing import Any, List, Mapping, Optional, Sequence, Union

import numpy as np

from .flow import IntegratorSettings, Trajectory, VectorFlowSystem, second_order_system, solve
from ..config import DEGENERACY_THRESHOLD
from ..core import dual
from ..core.expr import Expression, SymbolTable, as_expression
from ..core.linalg import scaled_determinant, solve_linear
from ..errors import DegenerateLagrangian, DimensionMismatch, SingularMatrix
from ..geometry.metric import (
    MetricField, christoffel, connection_coefficients, covariant_hessian, riemann
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LagrangianSystem:
    """L: Expression over (x1..xn, u1..un)."""

    dimension: int
    expression: Expression
    name: str = "lagrangian"

    @classmethod
    def from_expression(cls, text: Union[str, Expression], n: int,
                        parameters: Optional[Mapping[str, float]] = None, name: str = "lagrangian"
                        ) -> "LagrangianSystem":
        return cls(n, as_expression(text, SymbolTable.phase(n, parameters)), name)

    def __call__(self, z: Sequence[Any]):
        return self.expression(list(z))


@dataclass(frozen=True)
class NaturalLagrangian:
    """L = ½k_ab(x)u^a u^b − V(x)."""

    kinetic: MetricField
    potential: Expression
    name: str = "natural"

    @classmethod
    def from_strings(cls, kinetic: Sequence[Sequence[Any]], potential: Union[str, Expression],
                     parameters: Optional[Mapping[str, float]] = None, name: str = "natural"
                     ) -> "NaturalLagrangian":
        k = MetricField.from_entries(kinetic, parameters, name="kinetic")
        V = as_expression(potential, SymbolTable.state(k.dimension, parameters))
        return cls(k, V, name)

    def __post_init__(self):
        if len(self.potential.symbols.names) != self.kinetic.dimension:
            raise DimensionMismatch(
                f"Potential over {self.potential.symbols.names} for a kinetic metric of dimension {self.kinetic.dimension}"
            )

    @property
    def dimension(self) -> int:
        return self.kinetic.dimension

    @property
    def parameters(self) -> dict:
        params = dict(self.kinetic.symbols.parameter_map)
        params.update(self.potential.symbols.parameter_map)
        return params

    def lagrangian(self) -> LagrangianSystem:
        """Expression form of L over the phase symbols."""
        n = self.dimension
        table = SymbolTable.phase(n, self.parameters)
        u = [as_expression(f"u{a + 1}", table) for a in range(n)]
        total = -self.potential.rebind(table)
        for a in range(n):
            for b in range(n):
                k_ab = self.kinetic.components[a][b]
                if k_ab.is_constant and k_ab([0.0] * n) == 0.0:
                    continue
                total = total + 0.5 * k_ab.rebind(table) * u[a] * u[b]
        return LagrangianSystem(n, total, self.name)

    def acceleration(self, x: Sequence[Any], u: Sequence[Any]) -> List[Any]:
        """X₂ = −Γ_(k)uu − k⁻¹∂V, generic over number-likes."""
        n = self.dimension
        x = list(x)
        gamma = connection_coefficients(self.kinetic, x)
        grad_v = dual.gradient(self.potential, x)
        force = solve_linear(self.kinetic.matrix(x), grad_v)
        if isinstance(force, np.ndarray):
            force = force.tolist()
        out = []
        for a in range(n):
            acc = force[a]
            for b in range(n):
                for c in range(n):
                    acc = acc + gamma[a][b][c] * u[b] * u[c]
            out.append(-acc)
        return out

    def semispray(self) -> VectorFlowSystem:
        return second_order_system(self.dimension, self.acceleration, self.name)


def _metric_and_force(L: LagrangianSystem, z: List[Any]):
    n = L.dimension
    velocity = list(range(n, 2 * n))
    J = dual.jacobian(lambda w: dual.gradient(L, w, velocity), z)
    g = [[J[a][n + b] for b in range(n)] for a in range(n)]
    grad_x = dual.gradient(L, z, list(range(n)))
    force = []
    for a in range(n):
        acc = grad_x[a]
        for b in range(n):
            acc = acc - J[a][b] * z[n + b]
        force.append(acc)
    return g, force


def _check_regular(L: LagrangianSystem, g, z) -> None:
    det = scaled_determinant(g)
    if abs(det) <= DEGENERACY_THRESHOLD:
        raise DegenerateLagrangian(
            f"Lagrangian {L.name} is degenerate (scaled det of ∂²L/∂u∂u is {det:.3e})",
            {"state": [dual.primal(v) for v in z], "determinant": det},
        )


def lagrange_metric(L: LagrangianSystem, x: Sequence[float], u: Sequence[float]) -> np.ndarray:
    """
    g_ab = ∂²L/∂u^a∂u^b.

    Raises:
        DegenerateLagrangian: rank below n
    """
    n = L.dimension
    z = np.concatenate([np.asarray(x, dtype=float), np.asarray(u, dtype=float)]).tolist()
    if len(z) != 2 * n:
        raise DimensionMismatch(f"Expected {n} coordinates and {n} velocities")
    g = dual.hessian(L, z, list(range(n, 2 * n)))
    _check_regular(L, g, z)
    return np.array(g, dtype=float)


def energy(L: LagrangianSystem, x: Sequence[float], u: Sequence[float]) -> float:
    """E = u^a ∂L/∂u^a − L."""
    n = L.dimension
    z = np.concatenate([np.asarray(x, dtype=float), np.asarray(u, dtype=float)]).tolist()
    p = dual.gradient(L, z, list(range(n, 2 * n)))
    return float(sum(p[a] * z[n + a] for a in range(n)) - L(z))


def semispray_from_lagrangian(L: LagrangianSystem) -> VectorFlowSystem:
    """
    Euler-Lagrange semispray: g_ab X₂^b = ∂L/∂x^a − (∂²L/∂x^b∂u^a)u^b, solved at every evaluation.

    Raises (on evaluation):
        DegenerateLagrangian
    """
    n = L.dimension

    def acceleration(x, u):
        z = list(x) + list(u)
        g, force = _metric_and_force(L, z)
        _check_regular(L, g, z)
        try:
            accel = solve_linear(g, force)
            return accel.tolist() if isinstance(accel, np.ndarray) else accel
        except SingularMatrix as e:
            raise DegenerateLagrangian(f"Lagrangian {L.name} is degenerate: {e.message}") from None

    return second_order_system(n, acceleration, L.name)


SprayOwner = Union[LagrangianSystem, NaturalLagrangian, VectorFlowSystem]


def spray_G(system: SprayOwner, x: Sequence[float], u: Sequence[float]) -> np.ndarray:
    """G^a = −½X₂^a for a Lagrangian, natural or second-order flow system."""
    if isinstance(system, LagrangianSystem):
        flow = semispray_from_lagrangian(system)
    elif isinstance(system, NaturalLagrangian):
        flow = system.semispray()
    else:
        flow = system
    if not flow.second_order:
        raise DimensionMismatch(f"{flow.name} is not a second-order system")
    n = flow.configuration_dimension
    state = np.concatenate([np.asarray(x, dtype=float), np.asarray(u, dtype=float)])
    return -0.5 * flow(state)[n:]


def hamiltonian_constraint(nat: NaturalLagrangian, x: Sequence[float], u: Sequence[float]) -> float:
    """½k(u, u) + V, the energy of a natural system."""
    point = np.asarray(x, dtype=float).tolist()
    v = np.asarray(u, dtype=float)
    return float(0.5 * v @ nat.kinetic.at(point) @ v + nat.potential(point))


def perturbation_operator_natural(nat: NaturalLagrangian, x: Sequence[float], u: Sequence[float]) -> np.ndarray:
    """
    P^a_b = −R^a_{pbq}u^p u^q − k^{ac}∇_c∇_b V.

    Raises:
        DegenerateMetric
    """
    point = np.asarray(x, dtype=float).tolist()
    v = np.asarray(u, dtype=float)
    R = riemann(nat.kinetic, point)
    curvature = np.einsum("apbq,p,q->ab", R, v, v)
    hess = covariant_hessian(nat.kinetic, nat.potential, point)
    return -curvature - np.linalg.solve(nat.kinetic.at(point), hess)


def evolve_perturbation_natural(
    nat: NaturalLagrangian,
    trajectory: Trajectory,
    xi0: Sequence[float],
    xi_dot0: Sequence[float],
    settings: Optional[IntegratorSettings] = None,
) -> Trajectory:
    """
    Integrate ∇∇ξ = Pξ along the motion starting from the trajectory's first state.

    The base motion is co-integrated with the perturbation in covariant
    first-order form (ξ, η = ∇_ẋξ):

        ξ' = η − Γ(ẋ, ξ),   η' = Pξ − Γ(ẋ, η)

    Returns:
        Trajectory of (ξ, ξ̇) sampled at the trajectory's parameters
    """
    n = nat.dimension
    if trajectory.dimension != 2 * n:
        raise DimensionMismatch(f"Expected a phase trajectory of dimension {2 * n}")
    xi0 = np.asarray(xi0, dtype=float)
    xi_dot0 = np.asarray(xi_dot0, dtype=float)
    if xi0.shape != (n,) or xi_dot0.shape != (n,):
        raise DimensionMismatch(f"Perturbation data must have {n} components")
    x0, u0 = trajectory.states[0][:n], trajectory.states[0][n:]
    eta0 = xi_dot0 + np.einsum("abc,b,c->a", christoffel(nat.kinetic, x0), u0, xi0)

    def rhs(t, y):
        x, u, xi, eta = y[:n], y[n:2 * n], y[2 * n:3 * n], y[3 * n:]
        gamma = christoffel(nat.kinetic, x)
        acc = np.array(nat.acceleration(x.tolist(), u.tolist()), dtype=float)
        P = perturbation_operator_natural(nat, x, u)
        return np.concatenate([
            u,
            acc,
            eta - np.einsum("abc,b,c->a", gamma, u, xi),
            P @ xi - np.einsum("abc,b,c->a", gamma, u, eta),
        ])

    settings = (settings or IntegratorSettings()).replace(sample_times=tuple(trajectory.times[1:].tolist()))
    y0 = np.concatenate([x0, u0, xi0, eta0])
    joint = solve(rhs, y0, (trajectory.times[0], trajectory.times[-1]), settings, trajectory.parameter)
    states = []
    for y in joint.states:
        x, u, xi, eta = y[:n], y[n:2 * n], y[2 * n:3 * n], y[3 * n:]
        states.append(np.concatenate([xi, eta - np.einsum("abc,b,c->a", christoffel(nat.kinetic, x), u, xi)]))
    return Trajectory(joint.parameter, joint.times, np.array(states), configuration_dimension=n)


def energy_drift(system: Union[LagrangianSystem, NaturalLagrangian], trajectory: Trajectory) -> float:
    """sup_t |E(γ(t)) − E(γ(0))| along a phase trajectory."""
    n = trajectory.configuration_dimension or trajectory.dimension // 2
    if isinstance(system, NaturalLagrangian):
        values = [hamiltonian_constraint(system, s[:n], s[n:]) for s in trajectory.states]
    else:
        values = [energy(system, s[:n], s[n:]) for s in trajectory.states]
    return float(max(abs(v - values[0]) for v in values))
