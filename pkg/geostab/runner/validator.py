"""
Static validator for geostab scenarios.
Builds the system and every expression a scenario mentions, without integrating.
"""
import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional

from .models import AnalysisBlock, Scenario, SeminormBlock, SystemBlock
from ..core.expr import SymbolTable, as_expression
from ..dynamics.flow import IntegratorSettings, VectorFlowSystem, lift_second_order
from ..dynamics.lagrangian import LagrangianSystem, NaturalLagrangian, semispray_from_lagrangian
from ..errors import ConfigurationError, DimensionMismatch, ExpressionSyntaxError, GeostabError, UnknownSymbol
from ..geometry.metric import MetricField
from ..reports.safety import validate_output_name
from ..stability.kcc import SprayData
from ..stability.lyapunov import SeminormFamily
from ..stability.maupertuis import geodesic_flow

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BuiltSystem:
    """The objects one system block turns into."""

    block: SystemBlock
    flow: VectorFlowSystem
    spray: Optional[SprayData] = None
    lagrangian: Optional[LagrangianSystem] = None
    natural: Optional[NaturalLagrangian] = None
    metric: Optional[MetricField] = None

    @property
    def dimension(self) -> int:
        return self.block.dimension


def build_system(block: SystemBlock) -> BuiltSystem:
    """
    Parse a system block.

    Raises:
        ExpressionSyntaxError, UnknownSymbol, DimensionMismatch
    """
    n = block.dimension
    name = block.name or block.kind
    params = block.parameters
    if block.kind == "flow":
        if block.components is not None:
            if len(block.components) != n:
                raise DimensionMismatch(f"{len(block.components)} flow components for dimension {n}")
            return BuiltSystem(block, VectorFlowSystem.from_expressions(block.components, params, name=name))
        flow = lift_second_order(n, block.acceleration, params, name)
        return BuiltSystem(block, flow, SprayData.from_flow(flow))
    if block.kind == "lagrangian":
        L = LagrangianSystem.from_expression(block.lagrangian, n, params, name)
        return BuiltSystem(block, semispray_from_lagrangian(L), SprayData.from_lagrangian(L), L)
    if block.kind == "natural":
        if len(block.kinetic) != n:
            raise DimensionMismatch(f"Kinetic metric of size {len(block.kinetic)} for dimension {n}")
        nat = NaturalLagrangian.from_strings(block.kinetic, block.potential, params, name)
        return BuiltSystem(block, nat.semispray(), SprayData.from_natural(nat), nat.lagrangian(), nat, nat.kinetic)
    if len(block.metric) != n:
        raise DimensionMismatch(f"Metric of size {len(block.metric)} for dimension {n}")
    metric = MetricField.from_entries(block.metric, params, name=name)
    return BuiltSystem(block, geodesic_flow(metric), SprayData.from_metric(metric), metric=metric)


def build_seminorm(block: SeminormBlock, system: BuiltSystem) -> SeminormFamily:
    if block.kind == "euclidean":
        return SeminormFamily.euclidean(block.policy)
    if block.kind == "vertical_lift":
        if system.metric is None:
            raise ConfigurationError(f"vertical_lift seminorm needs a metric, system kind is {system.block.kind!r}")
        return SeminormFamily.vertical_lift(system.metric, block.lift, block.policy)
    if block.kind == "lagrange_metric":
        if system.lagrangian is None:
            raise ConfigurationError(f"lagrange_metric seminorm needs a Lagrangian, system kind is {system.block.kind!r}")
        return SeminormFamily.lagrange_metric(system.lagrangian, block.lift, block.policy)
    n = system.flow.configuration_dimension
    return SeminormFamily.custom(block.entries, system.flow.dimension, n, system.block.parameters, block.policy)


def build_settings(block: AnalysisBlock) -> IntegratorSettings:
    return IntegratorSettings(**block.integrator.model_dump())


class ScenarioValidator:
    """Checks a parsed scenario against the system it describes."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario

    def check_analysis(self, block: AnalysisBlock, system: BuiltSystem) -> Dict[str, Any]:
        """
        Raises:
            ConfigurationError: the analysis does not fit the system
        """
        N = system.flow.dimension
        n = system.dimension
        label = block.label
        if len(block.initial_state) != N:
            raise DimensionMismatch(f"{label}: initial_state has {len(block.initial_state)} entries, state dimension is {N}",
                                    {"analysis": label})
        if block.perturbation is not None and len(block.perturbation) != N:
            raise DimensionMismatch(f"{label}: perturbation must have {N} entries", {"analysis": label})
        if block.frame is not None:
            if not block.frame or len(block.frame) > N or any(len(v) != N for v in block.frame):
                raise DimensionMismatch(f"{label}: frame must hold 1..{N} vectors of {N} entries", {"analysis": label})
        if block.type in ("lyapunov", "spectrum"):
            build_seminorm(block.seminorm, system)
        if block.type == "local-stability" and system.spray is None:
            raise ConfigurationError(f"{label}: local stability needs a second-order system", {"analysis": label})
        if block.type in ("jacobi-translate", "compare") and system.natural is None:
            raise ConfigurationError(f"{label}: {block.type} needs a natural system", {"analysis": label})
        if block.alternate_potential is not None:
            as_expression(block.alternate_potential, SymbolTable.state(n, system.block.parameters))
        if block.probe_points is not None and any(len(p) != n for p in block.probe_points):
            raise DimensionMismatch(f"{label}: probe points must have {n} coordinates", {"analysis": label})
        build_settings(block)
        return {"analysis": label, "type": block.type, "status": "success"}

    def validate(self) -> Dict[str, Any]:
        """
        Build the system and check every analysis.

        Returns:
            {"status": "success", "system": BuiltSystem, "checks": [...]}

        Raises:
            ConfigurationError: on the first problem found
        """
        validate_output_name(self.scenario.output.prefix)
        for block in self.scenario.analyses:
            validate_output_name(block.label)
        try:
            system = build_system(self.scenario.system)
        except GeostabError as e:
            e.context.setdefault("module", "expr" if isinstance(e, (ExpressionSyntaxError, UnknownSymbol)) else "cli")
            raise
        checks = [self.check_analysis(block, system) for block in self.scenario.analyses]
        logger.info("scenario valid: %s system, %d analyses", system.block.kind, len(checks))
        return {"status": "success", "system": system, "checks": checks}
