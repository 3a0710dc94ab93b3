"""
Global stability: Lyapunov exponents under a chosen seminorm family.

Perturbations are propagated with the variational equation and renormalized
at fixed intervals; the exponent is the accumulated log-stretch divided by
the elapsed time. The estimate depends on the seminorm, so the family is an
explicit argument everywhere.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Literal, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from ..config import (
    DEFAULT_HORIZON, DEFAULT_RENORM_INTERVAL, NEGATIVE_FORM_TOL, SEMINORM_COLLAPSE
)
from ..core.expr import Expression, SymbolTable, as_expression
from ..core.linalg import eigenvalues, weighted_gram_schmidt
from ..dynamics.flow import IntegratorSettings, VectorFlowSystem, variational_integrate
from ..dynamics.lagrangian import LagrangianSystem, lagrange_metric
from ..errors import (
    ConfigurationError, DegenerateSeminorm, DegenerateStart, DimensionMismatch, NegativeForm, SeminormCollapse
)
from ..geometry.metric import MetricField

logger = logging.getLogger(__name__)

SeminormKind = Literal["euclidean", "vertical_lift", "lagrange_metric", "custom"]


class SeminormFamily:
    """
    A state-dependent quadratic form Q_p on perturbation vectors.

    euclidean:        the chart's identity form on all N components
    vertical_lift:    k(x) on the configuration block, zero on velocities
                      (lift="vertical"), or on both blocks (lift="diagonal")
    lagrange_metric:  ∂²L/∂u∂u on the configuration block (lift="vertical"),
                      or on both blocks (lift="diagonal")
    custom:           an expression matrix over the state symbols, acting on all
                      components or on the configuration block only

    Forms are checked for positive semidefiniteness on first use.
    """

    def __init__(self, kind: SeminormKind, state_dimension: Optional[int] = None,
                 configuration_dimension: Optional[int] = None, metric: Optional[MetricField] = None,
                 lagrangian: Optional[LagrangianSystem] = None, entries: Optional[Tuple[Tuple[Expression, ...], ...]] = None,
                 lift: Literal["vertical", "diagonal"] = "vertical", policy: Literal["allow", "reject"] = "allow"):
        self.kind = kind
        self.state_dimension = state_dimension
        self.configuration_dimension = configuration_dimension
        self.metric = metric
        self.lagrangian = lagrangian
        self.entries = entries
        self.lift = lift
        self.policy = policy
        self._checked = False

    @classmethod
    def euclidean(cls, policy: str = "allow") -> "SeminormFamily":
        return cls("euclidean", policy=policy)

    @classmethod
    def vertical_lift(cls, metric: MetricField, lift: str = "vertical", policy: str = "allow") -> "SeminormFamily":
        if lift not in ("vertical", "diagonal"):
            raise ConfigurationError(f"Unknown lift: {lift}")
        n = metric.dimension
        return cls("vertical_lift", 2 * n, n, metric=metric, lift=lift, policy=policy)

    @classmethod
    def lagrange_metric(cls, L: LagrangianSystem, lift: str = "vertical", policy: str = "allow") -> "SeminormFamily":
        if lift not in ("vertical", "diagonal"):
            raise ConfigurationError(f"Unknown lift: {lift}")
        n = L.dimension
        return cls("lagrange_metric", 2 * n, n, lagrangian=L, lift=lift, policy=policy)

    @classmethod
    def custom(cls, entries: Sequence[Sequence[Union[str, float, Expression]]], state_dimension: int,
               configuration_dimension: Optional[int] = None, parameters: Optional[Mapping[str, float]] = None,
               policy: str = "allow") -> "SeminormFamily":
        """
        Expression matrix over x1..xN, or over x1..xn, u1..un for second-order systems.

        A matrix of size n on a second-order state acts on the configuration block.
        """
        n = configuration_dimension
        if n is not None and 2 * n != state_dimension:
            raise DimensionMismatch(f"Second-order state needs N = 2n, got N={state_dimension}, n={n}")
        table = SymbolTable.phase(n, parameters) if n is not None else SymbolTable.state(state_dimension, parameters)
        rows = tuple(tuple(as_expression(e, table) for e in row) for row in entries)
        size = len(rows)
        if any(len(row) != size for row in rows) or size not in (state_dimension, n):
            raise DimensionMismatch(f"Custom form of size {size} for state dimension {state_dimension}")
        for a in range(size):
            for b in range(a + 1, size):
                if rows[a][b] != rows[b][a]:
                    raise ConfigurationError(f"Custom form entries ({a + 1},{b + 1}) and ({b + 1},{a + 1}) differ")
        return cls("custom", state_dimension, n, entries=rows, policy=policy)

    @property
    def degenerate(self) -> bool:
        """True when the form ignores some directions by construction."""
        if self.kind in ("vertical_lift", "lagrange_metric"):
            return self.lift == "vertical"
        if self.kind == "custom":
            return len(self.entries) != self.state_dimension
        return False

    def describe(self) -> str:
        if self.kind in ("vertical_lift", "lagrange_metric"):
            return f"{self.kind}({self.lift})"
        return self.kind

    def _block_form(self, state: np.ndarray, block: np.ndarray, both: bool = False) -> np.ndarray:
        n = block.shape[0]
        Q = np.zeros((state.shape[0], state.shape[0]))
        Q[:n, :n] = block
        if both:
            Q[n:2 * n, n:2 * n] = block
        return Q

    def form(self, state: Sequence[float]) -> np.ndarray:
        """Q at a state, as an N×N matrix."""
        p = np.asarray(state, dtype=float)
        if self.state_dimension is not None and p.shape != (self.state_dimension,):
            raise DimensionMismatch(f"State of shape {p.shape} for a form on dimension {self.state_dimension}")
        n = self.configuration_dimension
        if self.kind == "euclidean":
            Q = np.eye(p.shape[0])
        elif self.kind == "vertical_lift":
            Q = self._block_form(p, self.metric.at(p[:n]), both=self.lift == "diagonal")
        elif self.kind == "lagrange_metric":
            g = lagrange_metric(self.lagrangian, p[:n], p[n:])
            Q = self._block_form(p, g, both=self.lift == "diagonal")
        else:
            values = p.tolist()
            M = np.array([[e(values) for e in row] for row in self.entries], dtype=float)
            Q = M if M.shape[0] == p.shape[0] else self._block_form(p, M)
        if not self._checked:
            self._check_semidefinite(Q, p)
        return Q

    def _check_semidefinite(self, Q: np.ndarray, state: np.ndarray) -> None:
        if Q.size:
            lowest = min(eigenvalues(0.5 * (Q + Q.T)).real_parts)
            if lowest < -NEGATIVE_FORM_TOL:
                raise NegativeForm(f"Seminorm form has a negative eigenvalue {lowest:.3e}",
                                   {"state": state, "eigenvalue": lowest})
        self._checked = True


def seminorm(family: SeminormFamily, state: Sequence[float], xi: Sequence[float]) -> float:
    """
    √Q_state(ξ, ξ).

    Raises:
        NegativeForm: Q(ξ, ξ) < −1e-12
    """
    v = np.asarray(xi, dtype=float)
    q = float(v @ family.form(state) @ v)
    if q < -NEGATIVE_FORM_TOL:
        raise NegativeForm(f"Seminorm form is negative on the perturbation: {q:.3e}", {"state": state, "value": q})
    return math.sqrt(max(q, 0.0))


@dataclass(frozen=True)
class ExponentEstimate:
    value: float
    series: Tuple[Tuple[float, float], ...]
    renormalizations: int
    flags: Tuple[str, ...] = ()
    horizon: float = 0.0

    def to_dict(self):
        return {
            "value": self.value,
            "series": [list(p) for p in self.series],
            "renormalizations": self.renormalizations,
            "flags": list(self.flags),
            "horizon": self.horizon,
        }

    def to_rows(self):
        return ["parameter", "estimate"], [list(p) for p in self.series]


@dataclass(frozen=True)
class SpectrumEstimate:
    """Exponents sorted descending; `series[k]` follows the k-th Gram-Schmidt direction."""

    exponents: Tuple[float, ...]
    series: Tuple[Tuple[Tuple[float, float], ...], ...]
    renormalizations: int
    flags: Tuple[str, ...] = ()
    horizon: float = 0.0

    def to_dict(self):
        return {
            "exponents": list(self.exponents),
            "series": [[list(p) for p in s] for s in self.series],
            "renormalizations": self.renormalizations,
            "flags": list(self.flags),
            "horizon": self.horizon,
        }

    def to_rows(self):
        """One (index, exponent) row per exponent."""
        return ["index", "exponent"], [[k + 1, v] for k, v in enumerate(self.exponents)]


def _check_system(system: VectorFlowSystem, family: SeminormFamily) -> None:
    if family.state_dimension is not None and family.state_dimension != system.dimension:
        raise DimensionMismatch(
            f"Seminorm family on dimension {family.state_dimension} for a flow of dimension {system.dimension}"
        )


def lyapunov_exponent(
    system: VectorFlowSystem,
    p0: Sequence[float],
    xi0: Sequence[float],
    family: SeminormFamily,
    horizon: float = DEFAULT_HORIZON,
    interval: float = DEFAULT_RENORM_INTERVAL,
    settings: Optional[IntegratorSettings] = None,
) -> ExponentEstimate:
    """
    Finite-horizon estimate of λ = limsup (1/t) ln‖ξ(t)‖.

    ξ0 is first scaled to unit seminorm, so the estimate does not depend on
    its length. Every `interval` the propagated ξ is rescaled to unit seminorm
    and ln(stretch) accumulated.

    Raises:
        DegenerateStart: ‖ξ0‖ = 0 at p0
        SeminormCollapse: ‖ξ‖ < 1e-300 at a renormalization; `partial` holds the estimate so far
        DegenerateSeminorm: the family is degenerate and its policy is "reject"
    """
    _check_system(system, family)
    if family.degenerate and family.policy == "reject":
        raise DegenerateSeminorm(f"Seminorm {family.describe()} is degenerate and the policy rejects it")
    if horizon <= 0.0:
        raise ConfigurationError(f"Horizon must be positive, got {horizon}")
    p0 = np.asarray(p0, dtype=float)
    xi0 = np.asarray(xi0, dtype=float)
    s0 = seminorm(family, p0, xi0)
    if not s0 > 0.0:
        raise DegenerateStart("Initial perturbation has zero seminorm", {"state": p0, "perturbation": xi0})

    log_sum = 0.0
    count = 0
    series: List[Tuple[float, float]] = []
    flags = ("degenerate-seminorm",) if family.degenerate else ()

    def renormalize(t, x, frame):
        nonlocal log_sum, count
        s = seminorm(family, x, frame[0])
        if s < SEMINORM_COLLAPSE:
            partial = ExponentEstimate(log_sum / t if t > 0 else 0.0, tuple(series), count,
                                       flags + ("seminorm-collapse",), t)
            raise SeminormCollapse(f"Perturbation seminorm collapsed at t={t:.6g}", partial, {"parameter": t})
        log_sum += math.log(s)
        count += 1
        series.append((float(t), log_sum / t))
        logger.debug("renormalization %d at t=%.4g, stretch %.6g", count, t, s)
        return frame / s

    traj = variational_integrate(system, p0, [xi0 / s0], (0.0, horizon), settings, renormalize, interval)
    elapsed = series[-1][0] if series else traj.final_time
    if traj.terminated_by:
        flags = flags + (f"terminated:{traj.terminated_by}",)
        logger.warning("Exponent estimate stopped early at t=%.6g (%s)", traj.final_time, traj.terminated_by)
    value = log_sum / elapsed if elapsed > 0 else 0.0
    return ExponentEstimate(value, tuple(series), count, flags, elapsed)


def lyapunov_spectrum(
    system: VectorFlowSystem,
    p0: Sequence[float],
    frame0: Sequence[Sequence[float]],
    family: SeminormFamily,
    horizon: float = DEFAULT_HORIZON,
    interval: float = DEFAULT_RENORM_INTERVAL,
    settings: Optional[IntegratorSettings] = None,
) -> SpectrumEstimate:
    """
    Exponents of an m-frame by repeated weighted Gram-Schmidt.

    Raises:
        DegenerateSeminorm: the family ignores some directions
        RankDeficient: the frame is dependent under the form
    """
    _check_system(system, family)
    if family.degenerate:
        raise DegenerateSeminorm(f"Seminorm {family.describe()} is degenerate; spectra need a definite form")
    if horizon <= 0.0:
        raise ConfigurationError(f"Horizon must be positive, got {horizon}")
    p0 = np.asarray(p0, dtype=float)
    frame, _ = weighted_gram_schmidt(frame0, family.form(p0))
    m = frame.shape[0]
    if m > system.dimension:
        raise DimensionMismatch(f"{m} frame vectors for a flow of dimension {system.dimension}")
    sums = np.zeros(m)
    series: List[List[Tuple[float, float]]] = [[] for _ in range(m)]
    count = 0

    def renormalize(t, x, F):
        nonlocal sums, count
        F_new, logs = weighted_gram_schmidt(F, family.form(x))
        sums = sums + logs
        count += 1
        for k in range(m):
            series[k].append((float(t), float(sums[k] / t)))
        return F_new

    traj = variational_integrate(system, p0, frame, (0.0, horizon), settings, renormalize, interval)
    elapsed = series[0][-1][0] if count else traj.final_time
    flags: Tuple[str, ...] = ()
    if traj.terminated_by:
        flags = (f"terminated:{traj.terminated_by}",)
    averages = sums / elapsed if elapsed > 0 else sums
    exponents = tuple(sorted((float(v) for v in averages), reverse=True))
    return SpectrumEstimate(exponents, tuple(tuple(s) for s in series), count, flags, elapsed)


def classify_global_stability(exponents: Union[Sequence[float], ExponentEstimate, SpectrumEstimate],
                              tol: float = 0.0) -> Literal["stable", "unstable"]:
    """stable iff every exponent ≤ tol."""
    if isinstance(exponents, ExponentEstimate):
        values = [exponents.value]
    elif isinstance(exponents, SpectrumEstimate):
        values = list(exponents.exponents)
    else:
        values = list(exponents)
    return "stable" if all(v <= tol for v in values) else "unstable"


def convergence_spread(series: Sequence[Tuple[float, float]], tail: float = 0.25) -> float:
    """max − min of the running average over the last `tail` fraction of the series."""
    if not series:
        return float("inf")
    if not 0.0 < tail <= 1.0:
        raise ConfigurationError(f"Tail fraction must be in (0, 1], got {tail}")
    k = max(1, int(math.ceil(len(series) * tail)))
    values = [v for _, v in series[-k:]]
    return float(max(values) - min(values))
