"""
Local stability from the geometry of a semispray.

A spray X = u∂ₓ − 2G∂ᵤ determines a nonlinear connection N^a_b = ∂G^a/∂u^b,
a Berwald-type linear connection Γ^c_{ba} = ∂²G^c/∂u^b∂u^a and the deviation
tensor P. The R̃ operator is assembled in the coordinate basis of TTM, where
coordinate brackets vanish and torsion is the antisymmetric part of the
connection coefficients.
"""
import logging
from dataclasses import dataclass
from typing import Any, Callable, List, Literal, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from ..config import LOCAL_STABILITY_TOL
from ..core import dual
from ..core.expr import Expression, SymbolTable, as_expression
from ..core.linalg import ComplexEigenSet, eigenvalues
from ..dynamics.flow import Trajectory, VectorFlowSystem
from ..dynamics.lagrangian import LagrangianSystem, NaturalLagrangian, semispray_from_lagrangian
from ..errors import DimensionMismatch
from ..geometry.metric import MetricField, connection_coefficients

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SprayData:
    """
    G^a(x, u) for a second-order system ẍ = −2G(x, ẋ).

    `G` takes the phase point z = (x, u) as a list of number-likes and returns
    the n components, so every quantity below is an AD derivative of it.
    """

    dimension: int
    G: Callable[[List[Any]], List[Any]]
    name: str = "spray"

    @classmethod
    def from_expressions(cls, components: Sequence[Union[str, Expression]], n: Optional[int] = None,
                         parameters: Optional[Mapping[str, float]] = None, name: str = "spray") -> "SprayData":
        n = len(components) if n is None else n
        if len(components) != n:
            raise DimensionMismatch(f"Expected {n} spray components, got {len(components)}")
        table = SymbolTable.phase(n, parameters)
        exprs = [as_expression(c, table) for c in components]
        return cls(n, lambda z: [e(z) for e in exprs], name)

    @classmethod
    def from_flow(cls, system: VectorFlowSystem) -> "SprayData":
        """G = −½X₂ of a second-order flow."""
        if not system.second_order:
            raise DimensionMismatch(f"{system.name} is not a second-order system")
        n = system.configuration_dimension

        def G(z):
            return [-0.5 * v for v in system.field(list(z))[n:]]

        return cls(n, G, system.name)

    @classmethod
    def from_lagrangian(cls, L: LagrangianSystem) -> "SprayData":
        return cls.from_flow(semispray_from_lagrangian(L))

    @classmethod
    def from_natural(cls, nat: NaturalLagrangian) -> "SprayData":
        return cls.from_flow(nat.semispray())

    @classmethod
    def from_metric(cls, metric: MetricField) -> "SprayData":
        """Geodesic spray G^a = ½Γ^a_{bc}u^b u^c."""
        n = metric.dimension

        def G(z):
            x, u = z[:n], z[n:]
            gamma = connection_coefficients(metric, x)
            out = []
            for a in range(n):
                acc = 0.0
                for b in range(n):
                    for c in range(n):
                        acc = acc + gamma[a][b][c] * u[b] * u[c]
                out.append(0.5 * acc)
            return out

        return cls(n, G, f"geodesic-{metric.name}")

    def flow_field(self, z: Sequence[Any]) -> List[Any]:
        """X = (u, −2G) at z."""
        n = self.dimension
        z = list(z)
        return z[n:] + [-2.0 * g for g in self.G(z)]

    def flow(self) -> VectorFlowSystem:
        return VectorFlowSystem(2 * self.dimension, self.flow_field, self.dimension, None, self.name)


@dataclass(frozen=True)
class BerwaldData:
    connection: np.ndarray
    coefficients: np.ndarray
    point: Tuple[float, ...]

    @property
    def symmetry_defect(self) -> float:
        """max |Γ^c_{ba} − Γ^c_{ab}|."""
        return float(np.max(np.abs(self.coefficients - np.swapaxes(self.coefficients, 1, 2)))) \
            if self.coefficients.size else 0.0

    def to_dict(self):
        return {
            "connection": self.connection.tolist(),
            "coefficients": self.coefficients.tolist(),
            "point": list(self.point),
        }


def _phase_point(spray: SprayData, x, u) -> List[float]:
    z = np.concatenate([np.asarray(x, dtype=float), np.asarray(u, dtype=float)])
    if z.shape != (2 * spray.dimension,):
        raise DimensionMismatch(f"Expected {spray.dimension} coordinates and {spray.dimension} velocities")
    return z.tolist()


def _velocity(spray: SprayData) -> List[int]:
    n = spray.dimension
    return list(range(n, 2 * n))


def _connection(spray: SprayData, z: List[Any]) -> List[List[Any]]:
    return dual.jacobian(spray.G, z, _velocity(spray))


def nonlinear_connection(spray: SprayData, x: Sequence[float], u: Sequence[float]) -> np.ndarray:
    """N^a_b = ∂G^a/∂u^b."""
    z = _phase_point(spray, x, u)
    return np.array(_connection(spray, z), dtype=float)


def _berwald(spray: SprayData, z: List[Any]) -> List[List[List[Any]]]:
    """gamma[c][b][a] = ∂²G^c/∂u^b∂u^a."""
    n = spray.dimension
    dN_du = [dual.partial(lambda w: _connection(spray, w), z, n + a) for a in range(n)]
    return [[[dN_du[a][c][b] for a in range(n)] for b in range(n)] for c in range(n)]


def berwald_coefficients(spray: SprayData, x: Sequence[float], u: Sequence[float]) -> BerwaldData:
    z = _phase_point(spray, x, u)
    return BerwaldData(
        np.array(_connection(spray, z), dtype=float),
        np.array(_berwald(spray, z), dtype=float).reshape(spray.dimension, spray.dimension, spray.dimension),
        tuple(z),
    )


def deviation_tensor_P(spray: SprayData, x: Sequence[float], u: Sequence[float]) -> np.ndarray:
    """
    P^a_b = −2∂G^a/∂x^b − 2G^c∂N^a_b/∂u^c + u^c∂N^a_b/∂x^c + N^a_c N^c_b.
    """
    n = spray.dimension
    z = _phase_point(spray, x, u)
    G = np.array(spray.G(z), dtype=float)
    N = np.array(_connection(spray, z), dtype=float)
    dG_dx = np.array(dual.jacobian(spray.G, z, list(range(n))), dtype=float)
    dN = np.array([dual.partial(lambda w: _connection(spray, w), z, i) for i in range(2 * n)],
                  dtype=float).reshape(2 * n, n, n)
    dN_dx, dN_du = dN[:n], dN[n:]
    vel = np.asarray(z[n:])
    return (-2.0 * dG_dx - 2.0 * np.einsum("c,cab->ab", G, dN_du)
            + np.einsum("c,cab->ab", vel, dN_dx) + N @ N)


def epsilon_defect(spray: SprayData, x: Sequence[float], u: Sequence[float]) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    ε^a = 2G^a − N^a_b u^b and ∂̄ε = ∂ε/∂u.

    Returns:
        (ε, ∂̄ε, max |∂̄ε| entry); the defect vanishes for sprays quadratic in u
        up to a u-independent part
    """
    n = spray.dimension
    z = _phase_point(spray, x, u)

    def eps(w):
        G = spray.G(w)
        N = _connection(spray, w)
        out = []
        for a in range(n):
            acc = 2.0 * G[a]
            for b in range(n):
                acc = acc - N[a][b] * w[n + b]
            out.append(acc)
        return out

    e = np.array(eps(z), dtype=float)
    d = np.array(dual.jacobian(eps, z, _velocity(spray)), dtype=float).reshape(n, n)
    return e, d, float(np.max(np.abs(d))) if d.size else 0.0


def _coordinate_connection(spray: SprayData, z: List[Any]) -> List[List[List[Any]]]:
    """
    Berwald connection in the coordinate basis (∂_a, ∂_ā) of TTM.

    H[C][E][D] with ∇_{∂_D}∂_E = H[C][E][D]∂_C; barred indices are offset by n.
    """
    n = spray.dimension
    N = _connection(spray, z)
    dN = [dual.partial(lambda w: _connection(spray, w), z, i) for i in range(2 * n)]
    gam = [[[dN[n + d][c][b] for d in range(n)] for b in range(n)] for c in range(n)]
    m = 2 * n
    H = [[[0.0] * m for _ in range(m)] for _ in range(m)]
    for c in range(n):
        for b in range(n):
            for d in range(n):
                g = gam[c][b][d]
                H[c][b][d] = g
                H[n + c][b][n + d] = g
                H[n + c][n + b][d] = g
                acc = dN[d][c][b]
                for e in range(n):
                    acc = acc - N[c][e] * gam[e][b][d] + gam[c][e][d] * N[e][b]
                H[n + c][b][d] = acc
    return H


def _shape_operator(spray: SprayData, z: List[Any]) -> List[List[Any]]:
    """A^C_B = T(X, ∂_B)^C + ∇_B X^C."""
    m = 2 * spray.dimension
    H = _coordinate_connection(spray, z)
    X = spray.flow_field(z)
    DX = dual.jacobian(spray.flow_field, z)
    A = []
    for C in range(m):
        row = []
        for B in range(m):
            acc = DX[C][B]
            for E in range(m):
                torsion = H[C][B][E] - H[C][E][B]
                acc = acc + X[E] * torsion + H[C][E][B] * X[E]
            row.append(acc)
        A.append(row)
    return A


def rtilde_operator(spray: SprayData, x: Sequence[float], u: Sequence[float]) -> np.ndarray:
    """
    R̃ = ∇_X A + A·A with A = T(X, ·) + ∇X, a 2n×2n matrix in the coordinate basis.

    The derivative of A along X is a single directional AD pass.
    """
    z = _phase_point(spray, x, u)
    H = np.array(_coordinate_connection(spray, z), dtype=float)
    X = np.array(spray.flow_field(z), dtype=float)
    A = np.array(_shape_operator(spray, z), dtype=float)
    dA = np.array(dual.jvp(lambda w: _shape_operator(spray, w), z, X.tolist()), dtype=float)
    nabla_A = dA + np.einsum("ced,d,eb->cb", H, X, A) - np.einsum("ebd,d,ce->cb", H, X, A)
    return nabla_A + A @ A


# verdicts

@dataclass(frozen=True)
class LocalStabilityVerdict:
    verdict: Literal["stable", "unstable", "marginal"]
    mixed_complex: bool
    max_real: float
    max_modulus: float
    tolerance: float

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "mixed_complex": self.mixed_complex,
            "max_real": self.max_real,
            "max_modulus": self.max_modulus,
            "tolerance": self.tolerance,
        }


def classify_local_stability(eig_track: Sequence[ComplexEigenSet], tol: float = LOCAL_STABILITY_TOL
                             ) -> LocalStabilityVerdict:
    """
    Real-part verdict over an eigenvalue track.

    unstable if some real part exceeds tol; marginal if every real part is
    within tol of zero; stable otherwise. Complex spectra raise the
    mixed_complex flag and are still judged on their real parts.
    """
    values = [v for spectrum in eig_track for v in spectrum.values]
    if not values:
        return LocalStabilityVerdict("marginal", False, 0.0, 0.0, tol)
    max_real = max(v.real for v in values)
    max_modulus = max(abs(v) for v in values)
    mixed = any(abs(v.imag) > tol for v in values)
    if max_real > tol:
        verdict = "unstable"
    elif all(abs(v.real) <= tol for v in values):
        verdict = "marginal"
    else:
        verdict = "stable"
    if mixed:
        logger.warning("Complex eigenvalues along the track; verdict uses real parts")
    return LocalStabilityVerdict(verdict, mixed, max_real, max_modulus, tol)


@dataclass(frozen=True)
class LocalStabilityReport:
    operator: str
    parameters: Tuple[float, ...]
    spectra: Tuple[ComplexEigenSet, ...]
    verdict: LocalStabilityVerdict

    def to_dict(self):
        return {
            "operator": self.operator,
            "parameters": list(self.parameters),
            "spectra": [s.to_dict() for s in self.spectra],
            "verdict": self.verdict.to_dict(),
        }

    def to_rows(self):
        n = max((len(s) for s in self.spectra), default=0)
        header = ["parameter"]
        header += [f"{part}{k + 1}" for k in range(n) for part in ("re", "im")]
        rows = []
        for s, spectrum in zip(self.parameters, self.spectra):
            rows.append([s] + [p for v in spectrum.values for p in (v.real, v.imag)])
        return header, rows


def local_stability_track(
    spray: SprayData,
    trajectory: Trajectory,
    operator: Literal["P", "rtilde"] = "P",
    tol: float = LOCAL_STABILITY_TOL,
) -> LocalStabilityReport:
    """Eigenvalues of P (or R̃) at every trajectory sample, with their verdict."""
    n = spray.dimension
    if trajectory.dimension < 2 * n:
        raise DimensionMismatch(f"Trajectory of dimension {trajectory.dimension} for a spray with n={n}")
    build = deviation_tensor_P if operator == "P" else rtilde_operator
    spectra = tuple(eigenvalues(build(spray, s[:n], s[n:2 * n])) for s in trajectory.states)
    verdict = classify_local_stability(spectra, tol)
    return LocalStabilityReport(operator, tuple(trajectory.times.tolist()), spectra, verdict)


def kcc_residual(
    spray: SprayData,
    x: Sequence[float],
    u: Sequence[float],
    xi1: Sequence[float],
    xi2: Sequence[float],
    xi2_dot: Optional[Sequence[float]] = None,
) -> np.ndarray:
    """
    ∇ᴺ∇ᴺξ₁ − Pξ₁ for a perturbation (ξ₁, ξ₂ = ξ̇₁) at (x, u), with ∇ᴺξ = ξ̇ + Nξ.

    xi2_dot defaults to the variational equation ξ̇₂ = −2(∂G/∂x)ξ₁ − 2Nξ₂;
    pass a measured derivative to check a propagated perturbation.
    """
    n = spray.dimension
    z = _phase_point(spray, x, u)
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    G = np.array(spray.G(z), dtype=float)
    N = np.array(_connection(spray, z), dtype=float)
    if xi2_dot is None:
        dG_dx = np.array(dual.jacobian(spray.G, z, list(range(n))), dtype=float)
        xi2_dot = -2.0 * dG_dx @ xi1 - 2.0 * N @ xi2
    xi2_dot = np.asarray(xi2_dot, dtype=float)
    # Ṅ along the spray: u^c ∂_c N − 2G^c ∂̄_c N
    N_dot = np.array(dual.jvp(lambda w: _connection(spray, w), z, spray.flow_field(z)), dtype=float)
    first = xi2 + N @ xi1
    second = xi2_dot + N_dot @ xi1 + N @ xi2 + N @ first
    return second - deviation_tensor_P(spray, x, u) @ xi1
