"""
Jacobi-Maupertuis translation of natural Lagrangian systems.

Trajectories of L = ½k(u,u) − V with energy E are geodesics of
g_E = C|E − V|k, reparametrized by dt/dτ = 1/(√(2C)|E − V|). The translation
breaks down at the boundary V = E (a curvature singularity), at fixed points
and in one dimension; `compare_stability` runs both pictures side by side
and reports these limitations as flags.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np

from .kcc import LocalStabilityVerdict, SprayData, classify_local_stability, local_stability_track
from .lyapunov import (
    ExponentEstimate, SeminormFamily, classify_global_stability, lyapunov_exponent, lyapunov_spectrum
)
from ..config import (
    BOUNDARY_BAND, BOUNDARY_FLOOR, DEFAULT_HORIZON, DEFAULT_JACOBI_CONSTANT, DEFAULT_RENORM_INTERVAL,
    LOCAL_STABILITY_TOL
)
from ..core import dual
from ..core.expr import Expression
from ..core.linalg import ComplexEigenSet, eigenvalues, weighted_gram_schmidt
from ..dynamics.flow import (
    EventRecord, EventSpec, IntegratorSettings, Trajectory, VectorFlowSystem, integrate, second_order_system, solve
)
from ..dynamics.lagrangian import NaturalLagrangian, hamiltonian_constraint
from ..errors import (
    BoundaryPoint, ConfigurationError, DegenerateStart, DimensionMismatch, FixedPointUntranslatable, RankDeficient
)
from ..geometry.metric import MetricField, christoffel, conformal_ricci, geodesic_acceleration, riemann
from ..geometry.transport import parallel_transport_frame

logger = logging.getLogger(__name__)

RICCI_LEVELS = (1e-1, 1e-2, 1e-3)
ENERGY_MATCH_TOL = 1e-8


@dataclass(frozen=True)
class JacobiTranslation:
    """g_E = C|E − V|k for a natural system at energy E."""

    source: NaturalLagrangian
    energy: float
    constant: float
    metric: MetricField
    conformal_factor: Expression
    band: float

    @classmethod
    def build(cls, nat: NaturalLagrangian, E: float, C: float = DEFAULT_JACOBI_CONSTANT) -> "JacobiTranslation":
        if not (isinstance(C, (int, float)) and C > 0.0 and math.isfinite(C)):
            raise ConfigurationError(f"Jacobi constant must be positive, got {C}")
        if not math.isfinite(E):
            raise ConfigurationError(f"Energy must be finite, got {E}")
        sigma2 = (float(E) - nat.potential).apply("abs") * float(C)
        metric = nat.kinetic.scaled(sigma2, name=f"jacobi-{nat.name}")
        return cls(nat, float(E), float(C), metric, sigma2, BOUNDARY_BAND * (1.0 + abs(E)))

    @property
    def dimension(self) -> int:
        return self.source.dimension

    def boundary(self, x: Sequence[float]) -> float:
        """b(x) = E − V(x)."""
        return float(self.energy - self.source.potential(np.asarray(x, dtype=float).tolist()))

    def boundary_event(self) -> EventSpec:
        n = self.dimension
        return EventSpec("boundary", lambda y: abs(self.boundary(y[:n])) - self.band, direction=-1, terminal=True)

    def metric_at(self, x: Sequence[float]) -> np.ndarray:
        b = self.boundary(x)
        if abs(b) <= BOUNDARY_FLOOR:
            raise BoundaryPoint(f"E − V = {b:.3e} at {list(x)}: the Jacobi metric degenerates",
                                {"state": list(x), "boundary": b})
        return self.metric.at(x)

    def _rate(self, x: Sequence[float]) -> float:
        return 1.0 / (math.sqrt(2.0 * self.constant) * abs(self.boundary(x)))

    def dt_dtau(self, x: Sequence[float]) -> float:
        b = self.boundary(x)
        if abs(b) <= self.band:
            raise BoundaryPoint(f"E − V = {b:.3e} at {list(x)} is inside the boundary band",
                                {"state": list(x), "boundary": b})
        return self._rate(x)

    def geodesic_flow(self) -> VectorFlowSystem:
        return geodesic_flow(self.metric)


def jacobi_metric(nat: NaturalLagrangian, E: float, C: float, x: Sequence[float]) -> np.ndarray:
    """
    C|E − V(x)|k(x).

    Raises:
        BoundaryPoint: |E − V(x)| ≤ 1e-10
    """
    return JacobiTranslation.build(nat, E, C).metric_at(x)


def time_reparametrization(nat: NaturalLagrangian, E: float, C: float, x: Sequence[float]) -> float:
    """
    dt/dτ = 1/(√(2C)|E − V(x)|).

    Raises:
        BoundaryPoint: inside the boundary band
    """
    return JacobiTranslation.build(nat, E, C).dt_dtau(x)


def geodesic_flow(metric: MetricField) -> VectorFlowSystem:
    """Affinely parametrized geodesics, accel = −Γuu."""
    n = metric.dimension
    return second_order_system(n, lambda x, u: geodesic_acceleration(metric, x, u), f"geodesic-{metric.name}")


def _is_fixed_point(nat: NaturalLagrangian, x: np.ndarray, u: np.ndarray) -> bool:
    if np.any(u != 0.0):
        return False
    force = np.array(dual.gradient(nat.potential, x.tolist()), dtype=float)
    return bool(np.max(np.abs(force)) <= 1e-12) if force.size else True


def affine_initial_state(translation: JacobiTranslation, x: Sequence[float], u: Sequence[float]) -> np.ndarray:
    """
    Geodesic data (x, u·dt/dτ) for Euler-Lagrange data (x, u) at the translation's energy.

    Raises:
        FixedPointUntranslatable: (x, u) is a fixed point
        BoundaryPoint: x inside the boundary band
        ConfigurationError: the energy of (x, u) differs from E
    """
    nat = translation.source
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if x.shape != (translation.dimension,) or u.shape != (translation.dimension,):
        raise DimensionMismatch(f"Expected {translation.dimension} coordinates and velocities")
    if _is_fixed_point(nat, x, u):
        raise FixedPointUntranslatable("Fixed points have no geodesic image", {"state": np.concatenate([x, u])})
    H = hamiltonian_constraint(nat, x, u)
    if abs(H - translation.energy) > ENERGY_MATCH_TOL * (1.0 + abs(translation.energy)):
        raise ConfigurationError(f"Initial state has energy {H:.12g}, translation is for E={translation.energy:.12g}")
    return np.concatenate([x, u * translation.dt_dtau(x)])


def jacobi_geodesic(
    translation: JacobiTranslation,
    x0: Sequence[float],
    u0: Sequence[float],
    horizon: float,
    settings: Optional[IntegratorSettings] = None,
) -> Trajectory:
    """Affine geodesic of g_E through Euler-Lagrange data, stopped at the boundary band."""
    settings = settings or IntegratorSettings()
    q0 = affine_initial_state(translation, x0, u0)
    settings = settings.replace(events=tuple(settings.events) + (translation.boundary_event(),))
    traj = integrate(translation.geodesic_flow(), q0, (0.0, horizon), settings, parameter="tau")
    if traj.terminated_by == "boundary":
        logger.warning("Geodesic reached the boundary at tau=%.6g", traj.final_time)
    return traj


def translate_trajectory(
    trajectory: Trajectory,
    translation: JacobiTranslation,
    direction: Literal["to_time", "to_affine"] = "to_time",
    settings: Optional[IntegratorSettings] = None,
) -> Trajectory:
    """
    Reparametrize between affine geodesics (τ) and Euler-Lagrange motion (t).

    Only the first sample's state and the sample parameters are read: the
    motion is re-integrated from that state together with the new parameter
    (dt/dτ or dτ/dt) and sampled at the given parameters, so later states of
    `trajectory` do not enter the result. Reaching the boundary band ends the
    result early with a boundary event.

    Raises:
        BoundaryPoint: the first sample is inside the boundary band
    """
    n = translation.dimension
    if trajectory.dimension != 2 * n:
        raise DimensionMismatch(f"Expected a phase trajectory of dimension {2 * n}")
    start = trajectory.states[0]
    translation.dt_dtau(start[:n])
    if direction == "to_time":
        flow = translation.geodesic_flow()
        rate = translation._rate
        parameter = "t"
    elif direction == "to_affine":
        flow = translation.source.semispray()
        rate = lambda x: 1.0 / translation._rate(x)
        parameter = "tau"
    else:
        raise ConfigurationError(f"Unknown translation direction: {direction}")

    def rhs(s, y):
        return np.concatenate([flow(y[:2 * n]), [rate(y[:n])]])

    boundary = translation.boundary_event()
    settings = (settings or IntegratorSettings()).replace(
        sample_times=tuple(trajectory.times[1:].tolist()), events=(boundary,)
    )
    y0 = np.concatenate([start, [trajectory.times[0]]])
    joint = solve(rhs, y0, (trajectory.times[0], trajectory.times[-1]), settings, trajectory.parameter)

    def convert(y):
        x, w = y[:n], y[n:2 * n]
        scale = translation._rate(x)
        return np.concatenate([x, w / scale if direction == "to_time" else w * scale])

    states = np.array([convert(y) for y in joint.states])
    events = [EventRecord(e.kind, e.state[2 * n], tuple(convert(np.asarray(e.state)).tolist())) for e in joint.events]
    if joint.terminated_by:
        logger.warning("Translation stopped at the %s event", joint.terminated_by)
    return Trajectory(parameter, joint.states[:, 2 * n], states, None, None, events, joint.terminated_by, n)


def round_trip_error(
    translation: JacobiTranslation,
    x0: Sequence[float],
    u0: Sequence[float],
    horizon: float = 5.0,
    settings: Optional[IntegratorSettings] = None,
    samples: int = 200,
) -> float:
    """
    Sup-norm configuration error of Euler-Lagrange → affine geodesic → Euler-Lagrange.

    The returned trajectory is compared with a direct integration sampled at
    exactly the recovered times.
    """
    settings = settings or IntegratorSettings()
    n = translation.dimension
    flow = translation.source.semispray()
    p0 = np.concatenate([np.asarray(x0, dtype=float), np.asarray(u0, dtype=float)])
    grid = tuple(np.linspace(0.0, horizon, samples + 1)[1:].tolist())
    motion = integrate(flow, p0, (0.0, horizon), settings.replace(sample_times=grid))
    affine = translate_trajectory(motion, translation, "to_affine", settings)
    back = translate_trajectory(affine, translation, "to_time", settings)
    direct = integrate(flow, p0, (0.0, back.final_time), settings.replace(sample_times=tuple(back.times[1:].tolist())))
    if len(direct) != len(back):
        raise DimensionMismatch("Round-trip samples are not aligned")
    return float(np.max(np.abs(direct.states[:, :n] - back.states[:, :n])))


def jacobi_deviation(
    metric: MetricField,
    geodesic: Trajectory,
    xi0: Sequence[float],
    xi_dot0: Sequence[float],
    settings: Optional[IntegratorSettings] = None,
) -> Trajectory:
    """
    Jacobi field along a geodesic: ∇∇J = −R(·, J, ·)ẋẋ.

    Integrated jointly with the geodesic in covariant form (J, DJ = ∇_ẋJ).

    Returns:
        Trajectory of (J, J̇) in coordinates, sampled at the geodesic's parameters
    """
    n = metric.dimension
    if geodesic.dimension != 2 * n:
        raise DimensionMismatch(f"Expected a geodesic of phase dimension {2 * n}")
    xi0 = np.asarray(xi0, dtype=float)
    xi_dot0 = np.asarray(xi_dot0, dtype=float)
    x0, v0 = geodesic.states[0][:n], geodesic.states[0][n:]
    dj0 = xi_dot0 + np.einsum("abc,b,c->a", christoffel(metric, x0), v0, xi0)

    def rhs(s, y):
        x, v, J, DJ = y[:n], y[n:2 * n], y[2 * n:3 * n], y[3 * n:]
        gamma = christoffel(metric, x)
        R = riemann(metric, x)
        return np.concatenate([
            v,
            -np.einsum("abc,b,c->a", gamma, v, v),
            DJ - np.einsum("abc,b,c->a", gamma, v, J),
            -np.einsum("abcd,b,c,d->a", R, v, J, v) - np.einsum("abc,b,c->a", gamma, v, DJ),
        ])

    settings = (settings or IntegratorSettings()).replace(sample_times=tuple(geodesic.times[1:].tolist()), events=())
    joint = solve(rhs, np.concatenate([x0, v0, xi0, dj0]), (geodesic.times[0], geodesic.times[-1]), settings,
                  geodesic.parameter)
    states = []
    for y in joint.states:
        x, v, J, DJ = y[:n], y[n:2 * n], y[2 * n:3 * n], y[3 * n:]
        states.append(np.concatenate([J, DJ - np.einsum("abc,b,c->a", christoffel(metric, x), v, J)]))
    return Trajectory(joint.parameter, joint.times, np.array(states), configuration_dimension=n)


@dataclass(frozen=True)
class FrameSplit:
    """
    A parallel orthonormal frame (e₀ ∥ ẋ) along a geodesic and the reduced
    deviation operator K_αβ = R^α_{0β0} in it.
    """

    parameters: np.ndarray
    frames: np.ndarray
    curvature: np.ndarray
    max_drift: float
    metric: MetricField = field(repr=False, compare=False)
    geodesic: Trajectory = field(repr=False, compare=False)

    def to_dict(self):
        return {
            "parameters": self.parameters.tolist(),
            "frames": self.frames.tolist(),
            "curvature": self.curvature.tolist(),
            "max_drift": self.max_drift,
        }

    def reduced_solution(self, q0: Sequence[float], q_dot0: Sequence[float],
                         settings: Optional[IntegratorSettings] = None) -> Trajectory:
        """
        Integrate q̈ = −K q in frame components, transporting the frame alongside.

        q⁰ (the tangent component) is affine in the parameter.
        """
        metric, n = self.metric, self.metric.dimension
        start = self.geodesic.states[0]
        E0 = self.frames[0]

        def rhs(s, y):
            x, v = y[:n], y[n:2 * n]
            E = y[2 * n:2 * n + n * n].reshape(n, n)
            q, qd = y[2 * n + n * n:2 * n + n * n + n], y[2 * n + n * n + n:]
            gamma = christoffel(metric, x)
            K = _frame_curvature(metric, x, v, E)
            return np.concatenate([
                v,
                -np.einsum("abc,b,c->a", gamma, v, v),
                (-np.einsum("abc,b,kc->ka", gamma, v, E)).ravel(),
                qd,
                -K @ q,
            ])

        settings = (settings or IntegratorSettings()).replace(
            sample_times=tuple(self.parameters[1:].tolist()), events=()
        )
        y0 = np.concatenate([start, E0.ravel(), np.asarray(q0, dtype=float), np.asarray(q_dot0, dtype=float)])
        joint = solve(rhs, y0, (self.parameters[0], self.parameters[-1]), settings, self.geodesic.parameter)
        return Trajectory(joint.parameter, joint.times, joint.states[:, 2 * n + n * n:], configuration_dimension=n)


def _frame_curvature(metric: MetricField, x: np.ndarray, v: np.ndarray, E: np.ndarray) -> np.ndarray:
    """K_αβ = g(e_α, R(·, e_β, ·)ẋẋ) for an orthonormal frame E (rows)."""
    R = riemann(metric, x)
    g = metric.at(x)
    RE = np.einsum("abcd,b,kc,d->ka", R, v, E, v)
    return E @ g @ RE.T


def _orthonormal_completion(metric: MetricField, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    g = metric.at(x)
    frame: List[np.ndarray] = []
    for candidate in [v] + list(np.eye(metric.dimension)):
        try:
            out, _ = weighted_gram_schmidt(np.array(frame + [candidate]), g)
        except RankDeficient:
            continue
        frame = list(out)
        if len(frame) == metric.dimension:
            break
    return np.array(frame)


def parallel_frame_split(metric: MetricField, geodesic: Trajectory,
                         settings: Optional[IntegratorSettings] = None) -> FrameSplit:
    """
    Transport an orthonormal frame with e₀ = ẋ/|ẋ| along a geodesic.

    In this frame the Jacobi equation decouples into q̈⁰ = 0 (the tangent
    shift) and q̈^α = −R^α_{0β0}q^β.
    """
    n = metric.dimension
    x0, v0 = geodesic.states[0][:n], geodesic.states[0][n:2 * n]
    if metric.inner(x0, v0, v0) <= 0.0:
        raise DegenerateStart("Geodesic has zero speed; the tangent direction is undefined")
    E0 = _orthonormal_completion(metric, x0, v0)
    transport = parallel_transport_frame(metric, geodesic, E0, settings)
    curvature = np.array([
        _frame_curvature(metric, geodesic.states[i][:n], geodesic.states[i][n:2 * n], transport.frames[i])
        for i in range(len(transport.parameters))
    ])
    return FrameSplit(transport.parameters, transport.frames, curvature, transport.max_drift, metric, geodesic)


def shift_mode_exponents(
    translation: JacobiTranslation,
    x0: Sequence[float],
    u0: Sequence[float],
    horizon: float = DEFAULT_HORIZON,
    interval: float = DEFAULT_RENORM_INTERVAL,
    settings: Optional[IntegratorSettings] = None,
) -> Tuple[ExponentEstimate, ExponentEstimate]:
    """
    Exponents of the two shift modes of the geodesic flow.

    The flow-direction mode ξ = X(p) shifts along the orbit and stays bounded.
    The velocity-scaling mode ξ = (0, ẋ) changes the affine speed and grows
    linearly, so its estimate decays like ln T / T.
    """
    settings = settings or IntegratorSettings()
    q0 = affine_initial_state(translation, x0, u0)
    flow = translation.geodesic_flow()
    family = SeminormFamily.vertical_lift(translation.metric, lift="diagonal")
    settings = settings.replace(events=(translation.boundary_event(),))
    n = translation.dimension
    along = flow(q0)
    scaling = np.concatenate([np.zeros(n), q0[n:]])
    return (
        lyapunov_exponent(flow, q0, along, family, horizon, interval, settings),
        lyapunov_exponent(flow, q0, scaling, family, horizon, interval, settings),
    )


@dataclass(frozen=True)
class BoundaryDiagnostics:
    hit: bool
    impact_parameter: Optional[float]
    parameter: str
    ricci_samples: Tuple[Tuple[float, float, float], ...]
    diverging: bool
    fixed_point: bool
    min_distance: float

    def to_dict(self):
        return {
            "hit": self.hit,
            "impact_parameter": self.impact_parameter,
            "parameter": self.parameter,
            "ricci_samples": [{"level": lv, "parameter": s, "ricci": r} for lv, s, r in self.ricci_samples],
            "diverging": self.diverging,
            "fixed_point": self.fixed_point,
            "min_distance": self.min_distance,
        }


def _level_crossing(translation: JacobiTranslation, trajectory: Trajectory, i: int, level: float) -> float:
    n = translation.dimension
    lo, hi = float(trajectory.times[i - 1]), float(trajectory.times[i])
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if abs(translation.boundary(trajectory.interpolate(mid)[:n])) > level:
            lo = mid
        else:
            hi = mid
    return hi


def boundary_diagnostics(translation: JacobiTranslation, trajectory: Trajectory) -> BoundaryDiagnostics:
    """
    Boundary impact and the Ricci scalar of g_E along the approach.

    The Ricci scalar is sampled where |E − V| first drops to 1e-1, 1e-2 and
    1e-3; a curvature singularity shows up as growing magnitudes.
    """
    n = translation.dimension
    first = trajectory.states[0]
    fixed = _is_fixed_point(translation.source, first[:n], first[n:2 * n])
    distances = [abs(translation.boundary(s[:n])) for s in trajectory.states]
    if fixed:
        logger.warning("Fixed point: not tractable in the geodesic picture")
        return BoundaryDiagnostics(False, None, trajectory.parameter, (), False, True, float(min(distances)))
    events = trajectory.events_of("boundary")
    hit = bool(events) or any(d <= translation.band for d in distances)
    impact = None
    if events:
        impact = float(events[0].parameter)
    elif hit:
        impact = float(trajectory.times[next(i for i, d in enumerate(distances) if d <= translation.band)])

    samples = []
    for level in RICCI_LEVELS:
        index = next((i for i, d in enumerate(distances) if d <= level), None)
        if index is None:
            continue
        s = float(trajectory.times[0]) if index == 0 else _level_crossing(translation, trajectory, index, level)
        x = trajectory.interpolate(s)[:n]
        ricci = conformal_ricci(translation.source.kinetic, translation.conformal_factor, x)
        samples.append((level, s, ricci))
    magnitudes = [abs(r) for _, _, r in samples]
    diverging = len(magnitudes) >= 2 and all(b > a for a, b in zip(magnitudes, magnitudes[1:]))
    return BoundaryDiagnostics(hit, impact, trajectory.parameter, tuple(samples), diverging, False,
                               float(min(distances)))


def jacobi_metric_discrepancy(a: NaturalLagrangian, b: NaturalLagrangian, E: float,
                              points: Sequence[Sequence[float]], C: float = DEFAULT_JACOBI_CONSTANT) -> float:
    """Largest component difference between the Jacobi metrics of two systems over points."""
    ta, tb = JacobiTranslation.build(a, E, C), JacobiTranslation.build(b, E, C)
    worst = 0.0
    for x in points:
        worst = max(worst, float(np.max(np.abs(ta.metric_at(x) - tb.metric_at(x)))))
    return worst


# comparison

@dataclass(frozen=True)
class PictureReport:
    exponents: Tuple[float, ...]
    global_verdict: Optional[str]
    local: LocalStabilityVerdict
    notes: Tuple[str, ...] = ()
    # finite-horizon estimates when the reported exponents are structural
    measured: Tuple[float, ...] = ()

    def to_dict(self):
        return {
            "exponents": list(self.exponents),
            "global_verdict": self.global_verdict,
            "local": self.local.to_dict(),
            "notes": list(self.notes),
            "measured": list(self.measured),
        }


@dataclass(frozen=True)
class ComparisonReport:
    energy: float
    intrinsic: PictureReport
    geodesic: PictureReport
    flags: Tuple[str, ...]
    energy_excluded: int
    projected_frame: Tuple[Tuple[float, ...], ...]
    round_trip_error: Optional[float]
    boundary: Optional[BoundaryDiagnostics]

    def to_dict(self):
        return {
            "energy": self.energy,
            "intrinsic": self.intrinsic.to_dict(),
            "geodesic": self.geodesic.to_dict(),
            "flags": list(self.flags),
            "energy_perturbation_excluded": self.energy_excluded,
            "projected_frame": [list(v) for v in self.projected_frame],
            "round_trip_error": self.round_trip_error,
            "boundary": self.boundary.to_dict() if self.boundary else None,
        }

    def to_rows(self):
        rows = [["intrinsic", k + 1, v] for k, v in enumerate(self.intrinsic.exponents)]
        rows += [["geodesic", k + 1, v] for k, v in enumerate(self.geodesic.exponents)]
        return ["picture", "index", "exponent"], rows


def _energy_function(nat: NaturalLagrangian):
    n = nat.dimension

    def H(z):
        x, u = list(z[:n]), list(z[n:])
        k = nat.kinetic.matrix(x)
        acc = nat.potential(x)
        for a in range(n):
            for b in range(n):
                acc = acc + 0.5 * k[a][b] * u[a] * u[b]
        return acc

    return H


def energy_projection(nat: NaturalLagrangian, x: Sequence[float], u: Sequence[float],
                      frame: Sequence[Sequence[float]]) -> Tuple[int, np.ndarray]:
    """
    Count frame vectors with dE(ξ) ≠ 0 and project the frame onto ker dE.

    Returns:
        (excluded count, projected frame)
    """
    p = np.concatenate([np.asarray(x, dtype=float), np.asarray(u, dtype=float)])
    F = np.asarray(frame, dtype=float)
    dE = np.array(dual.gradient(_energy_function(nat), p.tolist()), dtype=float)
    scale = float(np.linalg.norm(dE))
    if scale == 0.0:
        return 0, F.copy()
    components = F @ dE
    excluded = int(np.sum(np.abs(components) > 1e-12 * scale))
    return excluded, F - np.outer(components, dE) / scale ** 2


def _structural_zero_verdict(n: int, tol: float) -> LocalStabilityVerdict:
    return classify_local_stability([ComplexEigenSet(tuple(0j for _ in range(n)))], tol)


def compare_stability(
    nat: NaturalLagrangian,
    E: float,
    x0: Sequence[float],
    u0: Sequence[float],
    C: float = DEFAULT_JACOBI_CONSTANT,
    horizon: float = DEFAULT_HORIZON,
    interval: float = DEFAULT_RENORM_INTERVAL,
    settings: Optional[IntegratorSettings] = None,
    tol: float = 0.05,
    local_tol: float = LOCAL_STABILITY_TOL,
    round_trip_horizon: float = 5.0,
) -> ComparisonReport:
    """
    Intrinsic versus geodesic stability analysis of one natural-system orbit.

    Intrinsic: Lyapunov spectrum under the diagonal lift of the Lagrange
    metric and the eigenvalue track of P. Geodesic: spectrum of the geodesic
    flow of g_E under the diagonal lift of g_E and the track of −R·ẋẋ.

    Flags: boundary-hit, fixed-point, one-dimensional, indefinite,
    energy-perturbations-excluded, verdicts-disagree.
    """
    n = nat.dimension
    settings = settings or IntegratorSettings()
    x0 = np.asarray(x0, dtype=float)
    u0 = np.asarray(u0, dtype=float)
    H0 = hamiltonian_constraint(nat, x0, u0)
    if abs(H0 - E) > ENERGY_MATCH_TOL * (1.0 + abs(E)):
        raise ConfigurationError(f"Initial state has energy {H0:.12g}, comparison requested at E={E:.12g}")
    p0 = np.concatenate([x0, u0])
    identity = np.eye(2 * n)
    grid = tuple(np.arange(1, int(round(horizon / interval)) + 1) * interval)
    flags: List[str] = []
    indefinite = nat.kinetic.signature == "indefinite"
    if indefinite:
        flags.append("indefinite")
        logger.warning("Indefinite kinetic metric: comparison is diagnostics-only")

    # intrinsic picture
    motion = integrate(nat.semispray(), p0, (0.0, horizon), settings.replace(sample_times=grid))
    p_track = local_stability_track(SprayData.from_natural(nat), motion, "P", local_tol)
    if indefinite:
        intrinsic = PictureReport((), None, p_track.verdict, ("diagnostics-only",))
    else:
        family = SeminormFamily.lagrange_metric(nat.lagrangian(), lift="diagonal")
        spectrum = lyapunov_spectrum(nat.semispray(), p0, identity, family, horizon, interval, settings)
        intrinsic = PictureReport(spectrum.exponents, classify_global_stability(spectrum.exponents, tol),
                                  p_track.verdict, spectrum.flags)

    excluded, projected = energy_projection(nat, x0, u0, identity)
    if excluded:
        flags.append("energy-perturbations-excluded")

    # geodesic picture
    boundary = None
    round_trip = None
    if _is_fixed_point(nat, x0, u0):
        flags.append("fixed-point")
        logger.warning("Fixed point: the geodesic picture does not apply")
        geodesic = PictureReport((), None, _structural_zero_verdict(n, local_tol), ("untranslatable",))
        boundary = BoundaryDiagnostics(False, None, "tau", (), False, True, abs(E - nat.potential(x0.tolist())))
    else:
        translation = JacobiTranslation.build(nat, E, C)
        geo = jacobi_geodesic(translation, x0, u0, horizon, settings.replace(sample_times=grid))
        boundary = boundary_diagnostics(translation, geo)
        if boundary.hit:
            flags.append("boundary-hit")
        else:
            round_trip = round_trip_error(translation, x0, u0, min(round_trip_horizon, horizon), settings)
        spectra = [
            eigenvalues(-np.einsum("apbq,p,q->ab", riemann(translation.metric, s[:n]), s[n:], s[n:]))
            for s in geo.states
        ]
        curvature = classify_local_stability(spectra, local_tol)
        if n == 1:
            flags.append("one-dimensional")
            logger.warning("One-dimensional system: the Jacobi metric is flat")
        if indefinite:
            geodesic = PictureReport((), None, curvature, ("diagnostics-only",))
        else:
            family = SeminormFamily.vertical_lift(translation.metric, lift="diagonal")
            q0 = affine_initial_state(translation, x0, u0)
            geo_settings = settings.replace(events=(translation.boundary_event(),))
            spectrum = lyapunov_spectrum(translation.geodesic_flow(), q0, identity, family, horizon, interval,
                                         geo_settings)
            if n == 1:
                # only the two shift modes exist, so the exponents vanish in the limit
                logger.info("Measured one-dimensional geodesic exponents: %s", spectrum.exponents)
                zeros = (0.0,) * (2 * n)
                geodesic = PictureReport(zeros, classify_global_stability(zeros, tol), curvature,
                                         ("flat",) + tuple(spectrum.flags), spectrum.exponents)
            else:
                geodesic = PictureReport(spectrum.exponents, classify_global_stability(spectrum.exponents, tol),
                                         curvature, spectrum.flags)

    if intrinsic.global_verdict and geodesic.global_verdict and intrinsic.global_verdict != geodesic.global_verdict:
        flags.append("verdicts-disagree")
    return ComparisonReport(float(E), intrinsic, geodesic, tuple(flags), excluded,
                            tuple(tuple(row) for row in projected.tolist()), round_trip, boundary)
