"""
Analysis executor for geostab.
Runs the analyses of one scenario, fanning independent ones out over a thread pool.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .models import ANALYSIS_MODULES, AnalysisBlock, Scenario
from .validator import BuiltSystem, build_seminorm, build_settings
from ..config import BOUNDARY_FLOOR, GEOSTAB_THREADS
from ..core.expr import SymbolTable, as_expression
from ..dynamics.flow import integrate
from ..dynamics.lagrangian import (
    NaturalLagrangian, energy_drift, hamiltonian_constraint, perturbation_operator_natural
)
from ..errors import EvaluationError, GeostabError
from ..stability.kcc import local_stability_track
from ..stability.lyapunov import classify_global_stability, lyapunov_exponent, lyapunov_spectrum
from ..stability.maupertuis import (
    JacobiTranslation, boundary_diagnostics, compare_stability, jacobi_geodesic, jacobi_metric_discrepancy
)

logger = logging.getLogger(__name__)


def sample_grid(horizon: float, interval: float) -> tuple:
    """interval, 2·interval, ... up to and including the horizon."""
    count = int(math.floor(horizon / interval + 1e-9))
    grid = [k * interval for k in range(1, count + 1)]
    if not grid or horizon - grid[-1] > 1e-9 * interval:
        grid.append(horizon)
    return tuple(grid)


@dataclass(frozen=True)
class AnalysisResult:
    """`report` goes to JSON; `table` (anything with to_rows) goes to CSV."""

    name: str
    type: str
    report: Dict[str, Any]
    table: Any = None


class AnalysisExecutor:
    """Executes the analyses of a validated scenario."""

    def __init__(self, scenario: Scenario, system: BuiltSystem, max_workers: int = GEOSTAB_THREADS):
        """
        Args:
            scenario: Parsed scenario
            system: System built by the validator
            max_workers: Cap on parallel analyses
        """
        self.scenario = scenario
        self.system = system
        self.max_workers = max(1, max_workers)
        self.execution_log: List[Dict[str, Any]] = []

    def _generic_vector(self, index: int) -> np.ndarray:
        rng = np.random.default_rng([self.scenario.seed, index])
        return rng.standard_normal(self.system.flow.dimension)

    def _split(self, block: AnalysisBlock):
        n = self.system.dimension
        state = np.asarray(block.initial_state, dtype=float)
        return state[:n], state[n:]

    def _energy(self, block: AnalysisBlock) -> float:
        if block.energy is not None:
            return float(block.energy)
        x0, u0 = self._split(block)
        return hamiltonian_constraint(self.system.natural, x0, u0)

    # analyses

    def simulate(self, block: AnalysisBlock, index: int) -> AnalysisResult:
        settings = build_settings(block).replace(sample_times=sample_grid(block.horizon, block.interval))
        traj = integrate(self.system.flow, block.initial_state, (0.0, block.horizon), settings)
        report = {
            "final_time": traj.final_time,
            "final_state": traj.final_state.tolist(),
            "events": [e.to_dict() for e in traj.events],
            "terminated_by": traj.terminated_by,
        }
        owner = self.system.natural or self.system.lagrangian
        if owner is not None:
            report["energy_drift"] = energy_drift(owner, traj)
        return AnalysisResult(block.label, block.type, report, traj)

    def lyapunov(self, block: AnalysisBlock, index: int) -> AnalysisResult:
        family = build_seminorm(block.seminorm, self.system)
        xi0 = block.perturbation if block.perturbation is not None else self._generic_vector(index)
        estimate = lyapunov_exponent(self.system.flow, block.initial_state, xi0, family, block.horizon,
                                     block.interval, build_settings(block))
        report = {
            "seminorm": family.describe(),
            "perturbation": np.asarray(xi0, dtype=float).tolist(),
            "estimate": estimate.to_dict(),
            "verdict": classify_global_stability(estimate, block.tolerance),
        }
        return AnalysisResult(block.label, block.type, report, estimate)

    def spectrum(self, block: AnalysisBlock, index: int) -> AnalysisResult:
        family = build_seminorm(block.seminorm, self.system)
        frame = block.frame if block.frame is not None else np.eye(self.system.flow.dimension)
        estimate = lyapunov_spectrum(self.system.flow, block.initial_state, frame, family, block.horizon,
                                     block.interval, build_settings(block))
        report = {
            "seminorm": family.describe(),
            "spectrum": estimate.to_dict(),
            "verdict": classify_global_stability(estimate, block.tolerance),
        }
        return AnalysisResult(block.label, block.type, report, estimate)

    def local_stability(self, block: AnalysisBlock, index: int) -> AnalysisResult:
        settings = build_settings(block).replace(sample_times=sample_grid(block.horizon, block.interval))
        traj = integrate(self.system.flow, block.initial_state, (0.0, block.horizon), settings)
        track = local_stability_track(self.system.spray, traj, block.operator, block.local_tolerance)
        return AnalysisResult(block.label, block.type, track.to_dict(), track)

    def jacobi_translate(self, block: AnalysisBlock, index: int) -> AnalysisResult:
        nat = self.system.natural
        x0, u0 = self._split(block)
        E = self._energy(block)
        translation = JacobiTranslation.build(nat, E, block.jacobi_constant)
        settings = build_settings(block).replace(sample_times=sample_grid(block.horizon, block.interval))
        geodesic = jacobi_geodesic(translation, x0, u0, block.horizon, settings)
        report = {
            "energy": E,
            "constant": translation.constant,
            "band": translation.band,
            "final_parameter": geodesic.final_time,
            "final_state": geodesic.final_state.tolist(),
            "events": [e.to_dict() for e in geodesic.events],
            "terminated_by": geodesic.terminated_by,
            "boundary": boundary_diagnostics(translation, geodesic).to_dict(),
        }
        if block.alternate_potential is not None:
            report.update(self._alternate(block, nat, E, u0))
        return AnalysisResult(block.label, block.type, report, geodesic)

    def _alternate(self, block: AnalysisBlock, nat: NaturalLagrangian, E: float, u0: np.ndarray) -> Dict[str, Any]:
        """Jacobi-metric and intrinsic discrepancies against a second potential."""
        table = SymbolTable.state(nat.dimension, self.system.block.parameters)
        other = NaturalLagrangian(nat.kinetic, as_expression(block.alternate_potential, table), "alternate")
        points = block.probe_points or [block.initial_state[:nat.dimension]]

        def allowed(p):
            return min(E - nat.potential(list(p)), E - other.potential(list(p))) > BOUNDARY_FLOOR

        inside = [p for p in points if allowed(p)]
        metric_gap = jacobi_metric_discrepancy(nat, other, E, inside, block.jacobi_constant) if inside else None
        intrinsic_gap = max(
            float(np.max(np.abs(perturbation_operator_natural(nat, p, u0) - perturbation_operator_natural(other, p, u0))))
            for p in points
        )
        return {"metric_discrepancy": metric_gap, "intrinsic_discrepancy": intrinsic_gap,
                "probe_points": [list(p) for p in points]}

    def compare(self, block: AnalysisBlock, index: int) -> AnalysisResult:
        x0, u0 = self._split(block)
        report = compare_stability(
            self.system.natural, self._energy(block), x0, u0, block.jacobi_constant, block.horizon,
            block.interval, build_settings(block), block.tolerance, block.local_tolerance,
        )
        return AnalysisResult(block.label, block.type, report.to_dict(), report)

    # dispatch

    def execute_analysis(self, block: AnalysisBlock, index: int) -> Dict[str, Any]:
        """
        Run one analysis.

        Returns:
            {"status": "success", "analysis", "result"} or {"status": "error", "analysis", "error"}
        """
        handler = {
            "simulate": self.simulate,
            "lyapunov": self.lyapunov,
            "spectrum": self.spectrum,
            "local-stability": self.local_stability,
            "jacobi-translate": self.jacobi_translate,
            "compare": self.compare,
        }[block.type]
        result = {"analysis": block.label, "type": block.type}
        try:
            result["result"] = handler(block, index)
            result["status"] = "success"
        except GeostabError as e:
            e.context.setdefault("module", ANALYSIS_MODULES[block.type])
            e.context.setdefault("analysis", block.label)
            result["status"] = "error"
            result["error"] = e
        except (ArithmeticError, ValueError, np.linalg.LinAlgError) as e:
            result["status"] = "error"
            result["error"] = EvaluationError(str(e), {"module": ANALYSIS_MODULES[block.type], "analysis": block.label})
        logger.info("analysis %s: %s", block.label, result["status"])
        return result

    def execute_all(self, blocks: Optional[Sequence[AnalysisBlock]] = None) -> List[Dict[str, Any]]:
        """Run analyses in parallel; results come back in scenario order."""
        blocks = list(blocks if blocks is not None else self.scenario.analyses)
        workers = min(self.max_workers, len(blocks))
        if workers <= 1:
            results = [self.execute_analysis(block, i) for i, block in enumerate(blocks)]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(self.execute_analysis, block, i) for i, block in enumerate(blocks)]
                results = [f.result() for f in futures]
        self.execution_log.extend(results)
        return results
