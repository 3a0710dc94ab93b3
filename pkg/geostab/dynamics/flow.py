"""
Vector flows, trajectories and the integration engine.

A VectorFlowSystem is the universal representation of ẋ = X(x). Trajectories
are produced by `integrate`; perturbations ξ̇ = (∂X/∂x)ξ are integrated jointly
by `variational_integrate`, with the Jacobian action supplied by AD at every
stage.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..config import (
    DEFAULT_ATOL, DEFAULT_MAX_STEPS, DEFAULT_METHOD, DEFAULT_RENORM_INTERVAL, DEFAULT_RTOL,
    DEFAULT_STEP, EVENT_BISECTION_ITERATIONS, EVENT_TOLERANCE
)
from ..core import dual
from ..core.expr import Expression, SymbolTable, as_expression
from ..errors import (
    ConfigurationError, DimensionMismatch, DomainError, EvaluationError, MaxStepsExceeded, StepUnderflow
)
from ..integrators import get_stepper

logger = logging.getLogger(__name__)

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class VectorFlowSystem:
    """
    ẋ = X(x) on an N-dimensional chart.

    `field` maps a list of number-likes to a list of number-likes, so it can be
    evaluated on floats and on dual numbers alike. Second-order systems carry
    their configuration dimension n (N = 2n) and have X = (u, X₂(x, u)).
    """

    dimension: int
    field: Callable[[List[Any]], List[Any]]
    configuration_dimension: Optional[int] = None
    expressions: Optional[Tuple[Expression, ...]] = None
    name: str = "flow"

    def __post_init__(self):
        n = self.configuration_dimension
        if n is not None and 2 * n != self.dimension:
            raise DimensionMismatch(f"Second-order system needs N = 2n, got N={self.dimension}, n={n}")

    @classmethod
    def from_expressions(
        cls,
        components: Sequence[Union[str, Expression]],
        parameters: Optional[dict] = None,
        symbols: Optional[SymbolTable] = None,
        name: str = "flow",
    ) -> "VectorFlowSystem":
        """Flow with components X^i written over x1..xN (or a supplied table)."""
        table = symbols or SymbolTable.state(len(components), parameters)
        exprs = tuple(as_expression(c, table) for c in components)
        if len(table.names) != len(exprs):
            raise DimensionMismatch(f"{len(exprs)} components for {len(table.names)} state symbols")
        return cls(len(exprs), lambda z: [e(z) for e in exprs], expressions=exprs, name=name)

    @property
    def second_order(self) -> bool:
        return self.configuration_dimension is not None

    def evaluate(self, state: Sequence[Any]) -> List[Any]:
        return self.field(list(state))

    def __call__(self, state: Sequence[float]) -> np.ndarray:
        values = np.array(state, dtype=float).tolist()
        return _as_vector(self.field(values))

    def jacobian(self, state: Sequence[float]) -> np.ndarray:
        """∂X^i/∂x^j at a point, by forward-mode AD."""
        point = np.array(state, dtype=float).tolist()
        return np.array(dual.jacobian(self.field, point), dtype=float)


def lift_second_order(
    n: int,
    accel: Sequence[Union[str, Expression]],
    parameters: Optional[dict] = None,
    name: str = "second-order",
) -> VectorFlowSystem:
    """
    Semispray (u, accel(x, u)) on the 2n-dimensional phase chart.

    Raises:
        DimensionMismatch: accel does not have n components
        UnknownSymbol: accel uses anything besides x1..xn, u1..un and parameters
    """
    if len(accel) != n:
        raise DimensionMismatch(f"Expected {n} acceleration components, got {len(accel)}")
    table = SymbolTable.phase(n, parameters)
    velocity = tuple(as_expression(f"u{a + 1}", table) for a in range(n))
    exprs = velocity + tuple(as_expression(a, table) for a in accel)
    return VectorFlowSystem(2 * n, lambda z: [e(z) for e in exprs], n, exprs, name)


def second_order_system(n: int, acceleration: Callable[[List[Any], List[Any]], List[Any]],
                        name: str = "second-order") -> VectorFlowSystem:
    """Semispray from a generic acceleration callable X₂(x, u)."""

    def field_fn(z):
        return list(z[n:]) + list(acceleration(z[:n], z[n:]))

    return VectorFlowSystem(2 * n, field_fn, n, None, name)


# integration settings and results

class EventSpec:
    """A scalar event function g(state) watched for sign changes."""

    __slots__ = ("name", "function", "direction", "terminal")

    def __init__(self, name: str, function: Callable[[np.ndarray], float], direction: int = 0, terminal: bool = True):
        if direction not in (-1, 0, 1):
            raise ConfigurationError(f"Event direction must be -1, 0 or 1, got {direction}")
        self.name = name
        self.function = function
        self.direction = direction
        self.terminal = terminal

    def __repr__(self) -> str:
        return f"EventSpec({self.name!r}, direction={self.direction}, terminal={self.terminal})"


class IntegratorSettings(BaseModel):
    """Integrator choice, tolerances, dense-output samples and events."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    method: Literal["rk45", "rk4"] = DEFAULT_METHOD
    step: float = Field(DEFAULT_STEP, gt=0)
    atol: float = Field(DEFAULT_ATOL, gt=0)
    rtol: float = Field(DEFAULT_RTOL, gt=0)
    max_steps: int = Field(DEFAULT_MAX_STEPS, ge=1)
    sample_times: Optional[Tuple[float, ...]] = None
    events: Tuple[EventSpec, ...] = ()

    def replace(self, **changes) -> "IntegratorSettings":
        return self.model_copy(update=changes)


@dataclass(frozen=True)
class EventRecord:
    kind: str
    parameter: float
    state: Tuple[float, ...]

    def to_dict(self):
        return {"kind": self.kind, "parameter": self.parameter, "state": list(self.state)}


@dataclass
class Trajectory:
    """Samples of a solution curve, optionally with perturbation frames and events."""

    parameter: str
    times: np.ndarray
    states: np.ndarray
    derivatives: Optional[np.ndarray] = None
    frames: Optional[np.ndarray] = None
    events: List[EventRecord] = field(default_factory=list)
    terminated_by: Optional[str] = None
    configuration_dimension: Optional[int] = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if self.states.ndim != 2 or self.states.shape[0] != self.times.shape[0]:
            raise DimensionMismatch("Trajectory samples and states are not aligned")
        if self.frames is not None and np.asarray(self.frames).shape[0] != self.times.shape[0]:
            raise DimensionMismatch("Trajectory samples and frames are not aligned")
        if np.any(np.diff(self.times) <= 0.0):
            raise ConfigurationError("Trajectory sample parameters must be strictly increasing")

    def __len__(self) -> int:
        return int(self.times.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.states.shape[1])

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    def configuration(self) -> np.ndarray:
        n = self.configuration_dimension or self.dimension
        return self.states[:, :n]

    def events_of(self, kind: str) -> List[EventRecord]:
        return [e for e in self.events if e.kind == kind]

    def _locate(self, s: float) -> int:
        if s < self.times[0] - 1e-12 or s > self.times[-1] + 1e-12:
            raise ConfigurationError(f"Parameter {s} outside sampled range [{self.times[0]}, {self.times[-1]}]")
        i = int(np.searchsorted(self.times, s, side="right")) - 1
        return min(max(i, 0), len(self.times) - 2)

    def interpolate(self, s: float) -> np.ndarray:
        """State at parameter s: cubic Hermite on recorded derivatives, linear without them."""
        if len(self.times) == 1:
            return self.states[0].copy()
        i = self._locate(s)
        t0, t1 = self.times[i], self.times[i + 1]
        h = t1 - t0
        th = (s - t0) / h
        y0, y1 = self.states[i], self.states[i + 1]
        if self.derivatives is None:
            return (1.0 - th) * y0 + th * y1
        f0, f1 = self.derivatives[i], self.derivatives[i + 1]
        h00 = 2 * th ** 3 - 3 * th ** 2 + 1
        h10 = th ** 3 - 2 * th ** 2 + th
        h01 = -2 * th ** 3 + 3 * th ** 2
        h11 = th ** 3 - th ** 2
        return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1

    def interpolate_derivative(self, s: float) -> np.ndarray:
        if len(self.times) == 1:
            return np.zeros(self.dimension) if self.derivatives is None else self.derivatives[0].copy()
        i = self._locate(s)
        t0, t1 = self.times[i], self.times[i + 1]
        h = t1 - t0
        th = (s - t0) / h
        y0, y1 = self.states[i], self.states[i + 1]
        if self.derivatives is None:
            return (y1 - y0) / h
        f0, f1 = self.derivatives[i], self.derivatives[i + 1]
        return ((6 * th ** 2 - 6 * th) / h * y0 + (3 * th ** 2 - 4 * th + 1) * f0
                + (-6 * th ** 2 + 6 * th) / h * y1 + (3 * th ** 2 - 2 * th) * f1)

    def state_names(self) -> List[str]:
        n = self.configuration_dimension
        if n is not None:
            return [f"x{a + 1}" for a in range(n)] + [f"u{a + 1}" for a in range(n)]
        return [f"x{i + 1}" for i in range(self.dimension)]

    def to_rows(self) -> Tuple[List[str], List[List[float]]]:
        """Header and rows for CSV output (frames flattened after the state)."""
        header = [self.parameter] + self.state_names()
        frames = None if self.frames is None else np.asarray(self.frames)
        if frames is not None:
            m, N = frames.shape[1], frames.shape[2]
            header += [f"xi{k + 1}_{i + 1}" for k in range(m) for i in range(N)]
        rows = []
        for j, t in enumerate(self.times):
            row = [float(t)] + self.states[j].tolist()
            if frames is not None:
                row += frames[j].ravel().tolist()
            rows.append(row)
        return header, rows


# engine

def _as_vector(values) -> np.ndarray:
    try:
        return np.array(values, dtype=float)
    except TypeError as e:
        raise EvaluationError(f"Flow returned non-numeric values: {e}") from None


def _rms(v: np.ndarray) -> float:
    return float(np.sqrt(np.mean(v * v))) if v.size else 0.0


def _crossed(g0: float, g1: float, direction: int) -> bool:
    if direction <= 0 and g0 > 0.0 and g1 <= 0.0:
        return True
    if direction >= 0 and g0 < 0.0 and g1 >= 0.0:
        return True
    return False


# degeneracy errors (metric, Lagrangian) propagate; only evaluation failures reject a step
_STAGE_FAILURES = (DomainError, EvaluationError, ArithmeticError, ValueError)


def _initial_step(rhs, t0, y0, f0, order, settings, span) -> float:
    scale = settings.atol + np.abs(y0) * settings.rtol
    d0 = _rms(y0 / scale)
    d1 = _rms(f0 / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    try:
        f1 = rhs(t0 + h0, y0 + h0 * f0)
        d2 = _rms((f1 - f0) / scale) / h0
    except _STAGE_FAILURES:
        return max(h0 * 1e-3, 1e-12)
    if not math.isfinite(d2):
        return max(h0 * 1e-3, 1e-12)
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / (order))
    return min(100.0 * h0, h1, span)


def _locate_event(event: EventSpec, stepper, rhs, t, y, f, h, g0, y_end) -> Tuple[float, np.ndarray]:
    """Bisect the trial step for the crossing; probes re-step from the step start."""
    lo, hi = 0.0, h
    glo = g0
    for _ in range(EVENT_BISECTION_ITERATIONS):
        if hi - lo <= EVENT_TOLERANCE:
            break
        mid = 0.5 * (lo + hi)
        try:
            y_mid = stepper.step(rhs, t, y, f, mid)[0]
            g_mid = float(event.function(y_mid))
            if not (np.all(np.isfinite(y_mid)) and math.isfinite(g_mid)):
                raise FloatingPointError("non-finite probe")
        except _STAGE_FAILURES:
            hi = mid
            continue
        if _crossed(glo, g_mid, event.direction):
            hi = mid
        else:
            lo, glo = mid, g_mid
    if hi == h:
        return hi, y_end
    try:
        y_hi = stepper.step(rhs, t, y, f, hi)[0]
        if np.all(np.isfinite(y_hi)):
            return hi, y_hi
    except _STAGE_FAILURES:
        pass
    return lo, stepper.step(rhs, t, y, f, lo)[0] if lo > 0.0 else y.copy()


def solve(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: Sequence[float],
    tspan: Tuple[float, float],
    settings: Optional[IntegratorSettings] = None,
    parameter: str = "t",
    configuration_dimension: Optional[int] = None,
) -> Trajectory:
    """
    Integrate y' = rhs(s, y) over tspan.

    Records every accepted step, or only the requested sample times when
    settings.sample_times is set. Terminal events stop at the located crossing.

    Raises:
        StepUnderflow, MaxStepsExceeded, EvaluationError
    """
    settings = settings or IntegratorSettings()
    stepper = get_stepper(settings.method)
    t0, t_end = float(tspan[0]), float(tspan[1])
    if not (math.isfinite(t0) and math.isfinite(t_end)):
        raise ConfigurationError(f"Integration span must be finite, got {tspan}")
    if t_end < t0:
        raise ConfigurationError(f"Integration span must be increasing, got {tspan}")
    y = np.array(y0, dtype=float)
    try:
        f = rhs(t0, y)
    except _STAGE_FAILURES as e:
        raise EvaluationError(f"Flow cannot be evaluated at the initial state: {e}",
                              {"parameter": t0, "state": y}) from None
    if not np.all(np.isfinite(f)):
        raise EvaluationError("Flow is not finite at the initial state", {"parameter": t0, "state": y})

    samples = None
    if settings.sample_times is not None:
        samples = sorted({float(s) for s in settings.sample_times if t0 < s <= t_end})
    times, states, derivs = [t0], [y.copy()], [f.copy()]
    records: List[EventRecord] = []
    terminated = None
    events = settings.events
    g_prev = [float(ev.function(y)) for ev in events]

    t = t0
    span = t_end - t0
    if span == 0.0:
        return Trajectory(parameter, np.array(times), np.array(states), np.array(derivs),
                          configuration_dimension=configuration_dimension)
    if stepper.adaptive:
        h = _initial_step(rhs, t0, y, f, stepper.order, settings, span)
    else:
        h = settings.step
    next_sample = 0
    steps = 0

    while t < t_end:
        if steps >= settings.max_steps:
            raise MaxStepsExceeded(f"Exceeded {settings.max_steps} steps at {parameter}={t:.6g}",
                                   {"parameter": t, "state": y})
        target = samples[next_sample] if samples and next_sample < len(samples) else t_end
        gap = target - t
        landing = h >= gap
        h_try = gap if landing else h
        try:
            y_new, f_new, err = stepper.step(rhs, t, y, f, h_try)
            ok = bool(np.all(np.isfinite(y_new)) and np.all(np.isfinite(f_new)))
        except _STAGE_FAILURES as e:
            logger.debug("stage failure at %s=%g: %s", parameter, t, e)
            ok = False
        if not ok:
            if not stepper.adaptive:
                raise EvaluationError(f"Flow evaluation failed near {parameter}={t:.6g}",
                                      {"parameter": t, "state": y})
            h = 0.25 * h_try
            if h < 10.0 * _EPS * max(1.0, abs(t)):
                raise StepUnderflow(f"Step size underflow at {parameter}={t:.12g}", {"parameter": t, "state": y})
            continue
        if stepper.adaptive:
            scale = settings.atol + settings.rtol * np.maximum(np.abs(y), np.abs(y_new))
            err_norm = _rms(err / scale)
            if err_norm > 1.0:
                h = h_try * max(0.2, 0.9 * err_norm ** -0.2)
                if h < 10.0 * _EPS * max(1.0, abs(t)):
                    raise StepUnderflow(f"Step size underflow at {parameter}={t:.12g}",
                                        {"parameter": t, "state": y})
                continue
            factor = 5.0 if err_norm == 0.0 else min(5.0, max(0.2, 0.9 * err_norm ** -0.2))
            h_next = h_try * factor
            if landing and h_try < h:
                h_next = max(h_next, h)
        else:
            h_next = settings.step
        t_new = target if landing else t + h_try
        steps += 1

        g_new = [float(ev.function(y_new)) for ev in events]
        crossings = []
        for i, ev in enumerate(events):
            if _crossed(g_prev[i], g_new[i], ev.direction):
                s, y_s = _locate_event(ev, stepper, rhs, t, y, f, h_try, g_prev[i], y_new)
                crossings.append((s, i, y_s))
        stop = False
        for s, i, y_s in sorted(crossings, key=lambda c: (c[0], c[1])):
            ev = events[i]
            t_ev = t + s if s < h_try else t_new
            records.append(EventRecord(ev.name, t_ev, tuple(float(v) for v in y_s)))
            logger.debug("event %s at %s=%.12g", ev.name, parameter, t_ev)
            if ev.terminal:
                if t_ev > times[-1]:
                    try:
                        f_s = rhs(t_ev, y_s)
                    except _STAGE_FAILURES:
                        f_s = f_new
                    times.append(t_ev)
                    states.append(np.array(y_s, dtype=float))
                    derivs.append(np.array(f_s, dtype=float))
                terminated = ev.name
                stop = True
                break
        if stop:
            break

        if samples is None:
            times.append(t_new)
            states.append(y_new.copy())
            derivs.append(f_new.copy())
        elif landing and next_sample < len(samples) and target == samples[next_sample]:
            times.append(t_new)
            states.append(y_new.copy())
            derivs.append(f_new.copy())
            next_sample += 1
        t, y, f, g_prev, h = t_new, y_new, f_new, g_new, h_next

    logger.debug("integration finished: %d steps, %d samples", steps, len(times))
    return Trajectory(parameter, np.array(times), np.array(states), np.array(derivs), None, records,
                      terminated, configuration_dimension)


def integrate(
    system: VectorFlowSystem,
    x0: Sequence[float],
    tspan: Tuple[float, float],
    settings: Optional[IntegratorSettings] = None,
    parameter: str = "t",
) -> Trajectory:
    """
    Integral curve of the flow through x0.

    Args:
        system: The flow
        x0: Initial state of dimension N
        tspan: (start, end) with end ≥ start
        settings: Integrator settings (adaptive RK45, atol 1e-10, rtol 1e-9 by default)

    Returns:
        Trajectory
    """
    x0 = np.array(x0, dtype=float)
    if x0.shape != (system.dimension,):
        raise DimensionMismatch(f"Initial state has shape {x0.shape}, flow dimension is {system.dimension}")

    def rhs(t, y):
        return _as_vector(system.field(y.tolist()))

    return solve(rhs, x0, tspan, settings, parameter, system.configuration_dimension)


def variational_rhs(system: VectorFlowSystem, m: int) -> Callable[[float, np.ndarray], np.ndarray]:
    """Right-hand side of the joint system (ẋ = X, ξ̇_k = DX·ξ_k) for m frame vectors."""
    N = system.dimension

    def rhs(t, Y):
        x = Y[:N].tolist()
        out = np.empty_like(Y)
        out[:N] = _as_vector(system.field(x))
        for k in range(m):
            xi = Y[N + k * N:N + (k + 1) * N].tolist()
            out[N + k * N:N + (k + 1) * N] = _as_vector(dual.jvp(system.field, x, xi))
        return out

    return rhs


def variational_integrate(
    system: VectorFlowSystem,
    x0: Sequence[float],
    frame0: Sequence[Sequence[float]],
    tspan: Tuple[float, float],
    settings: Optional[IntegratorSettings] = None,
    renormalize: Optional[Callable[[float, np.ndarray, np.ndarray], np.ndarray]] = None,
    interval: float = DEFAULT_RENORM_INTERVAL,
    parameter: str = "t",
) -> Trajectory:
    """
    Integrate the flow together with the perturbation equation for a frame.

    Args:
        system: The flow
        x0: Initial state
        frame0: m vectors of dimension N
        tspan: (start, end)
        settings: Integrator settings
        renormalize: Optional callback(s, state, frame) -> new frame, invoked
            every `interval` parameter units; recorded as "renormalization" events
        interval: Renormalization interval

    Returns:
        Trajectory with frames. With a callback, samples sit at the interval
        boundaries and hold the frame as propagated, before the callback acted.
    """
    N = system.dimension
    x0 = np.array(x0, dtype=float)
    frame = np.array(frame0, dtype=float)
    if frame.ndim == 1:
        frame = frame[None, :]
    if x0.shape != (N,) or frame.ndim != 2 or frame.shape[1] != N:
        raise DimensionMismatch(f"State {x0.shape} / frame {frame.shape} do not match flow dimension {N}")
    m = frame.shape[0]
    rhs = variational_rhs(system, m)
    n = system.configuration_dimension

    if renormalize is None:
        whole = solve(rhs, np.concatenate([x0, frame.ravel()]), tspan, settings, parameter)
        return Trajectory(
            parameter, whole.times, whole.states[:, :N], whole.derivatives[:, :N],
            whole.states[:, N:].reshape(len(whole), m, N), whole.events, whole.terminated_by, n,
        )

    if interval <= 0.0:
        raise ConfigurationError(f"Renormalization interval must be positive, got {interval}")
    settings = settings or IntegratorSettings()
    t0, t1 = float(tspan[0]), float(tspan[1])
    times, states, derivs, frames = [t0], [x0.copy()], [_as_vector(system.field(x0.tolist()))], [frame.copy()]
    records: List[EventRecord] = []
    terminated = None
    Y = np.concatenate([x0, frame.ravel()])
    t = t0
    while t1 - t > 1e-12 * max(1.0, abs(t1)):
        t_b = min(t + interval, t1)
        if t1 - t_b < 1e-9 * interval:
            t_b = t1
        part = solve(rhs, Y, (t, t_b), settings.replace(sample_times=(t_b,)), parameter)
        records.extend(part.events)
        Y = part.states[-1]
        x, F = Y[:N], Y[N:].reshape(m, N)
        times.append(float(part.times[-1]))
        states.append(x.copy())
        derivs.append(part.derivatives[-1][:N].copy())
        frames.append(F.copy())
        if part.terminated_by:
            terminated = part.terminated_by
            break
        F_new = np.array(renormalize(t_b, x.copy(), F.copy()), dtype=float).reshape(m, N)
        records.append(EventRecord("renormalization", t_b, tuple(x.tolist())))
        Y = np.concatenate([x, F_new.ravel()])
        t = t_b
    return Trajectory(parameter, np.array(times), np.array(states), np.array(derivs), np.array(frames),
                      records, terminated, n)
