"""
Riemannian computations on configuration space.

Everything is evaluated pointwise with forward-mode AD. The `connection_*`
helpers are generic over number-likes so that they can sit inside further
differentiation passes (semisprays, curvature); the public functions return
float arrays.
"""
import logging
from dataclasses import dataclass
from typing import Any, Callable, List, Literal, Mapping, Optional, Sequence, Union

import numpy as np

from ..config import BOUNDARY_FLOOR, DEGENERACY_THRESHOLD
from ..core import dual
from ..core.expr import Expression, SymbolTable, as_expression
from ..core.linalg import lu_factor, lu_solve, scaled_determinant, solve_linear
from ..errors import BoundaryPoint, ConfigurationError, DegenerateMetric, DimensionMismatch, SingularMatrix

logger = logging.getLogger(__name__)

Entry = Union[str, float, int, Expression]
ScalarField = Union[Expression, Callable[[List[Any]], Any]]


@dataclass(frozen=True)
class MetricField:
    """
    Symmetric n×n matrix of expressions in x1..xn.

    Entries must be symmetric under index swap; asymmetric entries are rejected
    at construction when they differ structurally.
    """

    dimension: int
    components: tuple
    signature: Literal["positive-definite", "indefinite"] = "positive-definite"
    name: str = "metric"

    def __post_init__(self):
        n = self.dimension
        if len(self.components) != n or any(len(row) != n for row in self.components):
            raise DimensionMismatch(f"Metric components must be {n}x{n}")
        for a in range(n):
            for b in range(a + 1, n):
                if self.components[a][b] != self.components[b][a]:
                    raise ConfigurationError(
                        f"Metric entries ({a + 1},{b + 1}) and ({b + 1},{a + 1}) differ: "
                        f"{self.components[a][b]} vs {self.components[b][a]}"
                    )

    @classmethod
    def from_entries(
        cls,
        entries: Sequence[Sequence[Entry]],
        parameters: Optional[Mapping[str, float]] = None,
        signature: str = "positive-definite",
        name: str = "metric",
    ) -> "MetricField":
        """Full n×n entries written over x1..xn."""
        n = len(entries)
        table = SymbolTable.state(n, parameters)
        rows = tuple(tuple(as_expression(e, table) for e in row) for row in entries)
        return cls(n, rows, signature, name)

    @classmethod
    def diagonal(cls, entries: Sequence[Entry], parameters: Optional[Mapping[str, float]] = None,
                 name: str = "metric") -> "MetricField":
        n = len(entries)
        full = [[entries[a] if a == b else 0.0 for b in range(n)] for a in range(n)]
        return cls.from_entries(full, parameters, name=name)

    @classmethod
    def euclidean(cls, n: int) -> "MetricField":
        return cls.diagonal([1.0] * n, name="euclidean")

    @classmethod
    def conformal(cls, factor: Entry, base: Optional["MetricField"] = None, n: Optional[int] = None,
                  parameters: Optional[Mapping[str, float]] = None) -> "MetricField":
        """factor·base, with base defaulting to the flat metric of dimension n."""
        if base is None:
            if n is None:
                raise ConfigurationError("Conformal metric needs a base metric or a dimension")
            base = cls.euclidean(n)
        table = base.symbols.merge(SymbolTable.state(base.dimension, parameters))
        return base.scaled(as_expression(factor, table))

    @property
    def symbols(self) -> SymbolTable:
        return self.components[0][0].symbols if self.dimension else SymbolTable()

    def scaled(self, factor: Expression, name: Optional[str] = None) -> "MetricField":
        """Entry-wise factor·g_ab; identically zero entries stay zero."""
        rows = []
        for row in self.components:
            out = []
            for c in row:
                if c.is_constant and c([0.0] * self.dimension) == 0.0:
                    out.append(c.rebind(factor.symbols) if c.symbols != factor.symbols else c)
                else:
                    out.append(factor * c)
            rows.append(tuple(out))
        return MetricField(self.dimension, tuple(rows), self.signature, name or f"scaled-{self.name}")

    def matrix(self, x: Sequence[Any]) -> List[List[Any]]:
        """Components at x as nested lists (number-likes pass through)."""
        point = list(x)
        return [[c(point) for c in row] for row in self.components]

    def at(self, x: Sequence[float]) -> np.ndarray:
        point = np.array(x, dtype=float).tolist()
        if len(point) != self.dimension:
            raise DimensionMismatch(f"Point of length {len(point)} for a metric of dimension {self.dimension}")
        return np.array(self.matrix(point), dtype=float)

    def depends_on(self, index: int) -> bool:
        name = f"x{index + 1}"
        return any(c.depends_on(name) for row in self.components for c in row)

    def is_positive_definite(self, x: Sequence[float]) -> bool:
        try:
            np.linalg.cholesky(self.at(x))
        except np.linalg.LinAlgError:
            return False
        return True

    def inner(self, x: Sequence[float], v: Sequence[float], w: Sequence[float]) -> float:
        return float(np.asarray(v, dtype=float) @ self.at(x) @ np.asarray(w, dtype=float))


def _zeros(*shape):
    if len(shape) == 1:
        return [0.0] * shape[0]
    return [_zeros(*shape[1:]) for _ in range(shape[0])]


def _check_nondegenerate(metric: MetricField, g) -> None:
    det = scaled_determinant(g)
    if abs(det) <= DEGENERACY_THRESHOLD:
        raise DegenerateMetric(f"Metric {metric.name} is degenerate (scaled det {det:.3e})", {"determinant": det})


def metric_derivatives(metric: MetricField, x: Sequence[Any]) -> List[List[List[Any]]]:
    """dg[c][a][b] = ∂_c g_ab."""
    n = metric.dimension
    return [dual.partial(metric.matrix, x, c) if metric.depends_on(c) else _zeros(n, n) for c in range(n)]


def connection_coefficients(metric: MetricField, x: Sequence[Any]) -> List[List[List[Any]]]:
    """
    Levi-Civita Γ^a_{bc} as nested lists, generic over number-likes.

    Raises:
        DegenerateMetric: |scaled det g| ≤ 1e-12 at x
    """
    n = metric.dimension
    x = list(x)
    g = metric.matrix(x)
    _check_nondegenerate(metric, g)
    dg = metric_derivatives(metric, x)
    try:
        factors = lu_factor(g)
    except SingularMatrix as e:
        raise DegenerateMetric(f"Metric {metric.name} is degenerate: {e.message}") from None
    gamma = _zeros(n, n, n)
    for b in range(n):
        for c in range(b, n):
            lower = [0.5 * (dg[b][a][c] + dg[c][a][b] - dg[a][b][c]) for a in range(n)]
            column = lu_solve(factors, lower)
            for a in range(n):
                gamma[a][b][c] = column[a]
                gamma[a][c][b] = column[a]
    return gamma


def geodesic_acceleration(metric: MetricField, x: Sequence[Any], u: Sequence[Any]) -> List[Any]:
    """−Γ^a_{bc}u^b u^c (generic)."""
    n = metric.dimension
    gamma = connection_coefficients(metric, x)
    out = []
    for a in range(n):
        acc = 0.0
        for b in range(n):
            for c in range(n):
                acc = acc + gamma[a][b][c] * u[b] * u[c]
        out.append(-acc)
    return out


def christoffel(metric: MetricField, x: Sequence[float]) -> np.ndarray:
    """
    Christoffel symbols Γ^a_{bc} at x, symmetric in b, c.

    Raises:
        DegenerateMetric
    """
    point = np.array(x, dtype=float).tolist()
    return np.array(connection_coefficients(metric, point), dtype=float)


def _riemann_lists(metric: MetricField, x: List[Any]):
    n = metric.dimension
    gamma = connection_coefficients(metric, x)
    dgamma = [dual.partial(lambda z: connection_coefficients(metric, z), x, c)
              if metric.depends_on(c) else _zeros(n, n, n) for c in range(n)]
    R = _zeros(n, n, n, n)
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(c + 1, n):
                    value = dgamma[c][a][d][b] - dgamma[d][a][c][b]
                    for e in range(n):
                        value = value + gamma[a][c][e] * gamma[e][d][b] - gamma[a][d][e] * gamma[e][c][b]
                    R[a][b][c][d] = value
                    R[a][b][d][c] = -value
    return R


def riemann(metric: MetricField, x: Sequence[float]) -> np.ndarray:
    """
    R^a_{bcd} = ∂_cΓ^a_{db} − ∂_dΓ^a_{cb} + Γ^a_{ce}Γ^e_{db} − Γ^a_{de}Γ^e_{cb}.

    Antisymmetric in (c, d) by construction. One-dimensional metrics give zero.
    """
    point = np.array(x, dtype=float).tolist()
    if metric.dimension == 1:
        _check_nondegenerate(metric, metric.matrix(point))
        return np.zeros((1, 1, 1, 1))
    return np.array(_riemann_lists(metric, point), dtype=float)


def ricci_tensor(metric: MetricField, x: Sequence[float]) -> np.ndarray:
    """R_bd = R^a_{bad}."""
    return np.einsum("abad->bd", riemann(metric, x))


def ricci_scalar(metric: MetricField, x: Sequence[float]) -> float:
    g = metric.at(x)
    _check_nondegenerate(metric, g)
    return float(np.sum(np.linalg.inv(g) * ricci_tensor(metric, x)))


def covariant_hessian(metric: MetricField, f: ScalarField, x: Sequence[float]) -> np.ndarray:
    """∇_a∇_b f = ∂_a∂_b f − Γ^c_{ab}∂_c f."""
    point = np.array(x, dtype=float).tolist()
    hess = np.array(dual.hessian(f, point), dtype=float)
    grad = np.array(dual.gradient(f, point), dtype=float)
    return hess - np.einsum("cab,c->ab", christoffel(metric, point), grad)


def raised_gradient(metric: MetricField, f: ScalarField, x: Sequence[float]) -> np.ndarray:
    """∇^a f = g^{ab}∂_b f."""
    point = np.array(x, dtype=float).tolist()
    g = metric.at(point)
    _check_nondegenerate(metric, g)
    grad = np.array(dual.gradient(f, point), dtype=float)
    return np.asarray(solve_linear(g, grad), dtype=float)


def conformal_ricci(base: MetricField, sigma2: ScalarField, x: Sequence[float], n: Optional[int] = None) -> float:
    """
    Ricci scalar of σ²k from the curvature of k and derivatives of f = ½ ln σ².

    R = σ⁻²(R_k − 2(n−1)□_k f − (n−2)(n−1)|∇f|²_k)

    Raises:
        BoundaryPoint: σ² ≤ 1e-10 at x, where the rescaled metric degenerates
    """
    n = base.dimension if n is None else n
    point = np.array(x, dtype=float).tolist()
    s2 = float(sigma2(point))
    if not s2 > BOUNDARY_FLOOR:
        raise BoundaryPoint(f"Conformal factor {s2:.3e} vanishes at {point}", {"state": point, "sigma2": s2})

    def f(z):
        return 0.5 * dual.log(sigma2(z))

    k = base.at(point)
    k_inv = np.linalg.inv(k)
    grad = np.array(dual.gradient(f, point), dtype=float)
    box = float(np.sum(k_inv * covariant_hessian(base, f, point)))
    norm2 = float(grad @ k_inv @ grad)
    r_k = ricci_scalar(base, point)
    return (r_k - 2.0 * (n - 1) * box - (n - 2) * (n - 1) * norm2) / s2


def metric_compatibility_defect(metric: MetricField, x: Sequence[float], direction: Sequence[float]) -> float:
    """max_ab |v^c(∂_c g_ab − Γ^e_{ca}g_eb − Γ^e_{cb}g_ae)|; zero for the Levi-Civita connection."""
    point = np.array(x, dtype=float).tolist()
    v = np.asarray(direction, dtype=float)
    g = metric.at(point)
    dg = np.array(metric_derivatives(metric, point), dtype=float)
    gamma = christoffel(metric, point)
    nabla = dg - np.einsum("eca,eb->cab", gamma, g) - np.einsum("ecb,ae->cab", gamma, g)
    return float(np.max(np.abs(np.einsum("c,cab->ab", v, nabla))))
