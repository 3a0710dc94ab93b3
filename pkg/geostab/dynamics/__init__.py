"""
Dynamical systems for geostab: vector flows, trajectories and Lagrangian systems.
"""
from .flow import (
    VectorFlowSystem, Trajectory, IntegratorSettings, EventSpec, EventRecord,
    integrate, variational_integrate, lift_second_order, second_order_system, solve
)
from .lagrangian import (
    LagrangianSystem, NaturalLagrangian, lagrange_metric, energy, semispray_from_lagrangian, spray_G,
    hamiltonian_constraint, perturbation_operator_natural, evolve_perturbation_natural, energy_drift
)

__all__ = [
    'VectorFlowSystem',
    'Trajectory',
    'IntegratorSettings',
    'EventSpec',
    'EventRecord',
    'integrate',
    'variational_integrate',
    'lift_second_order',
    'second_order_system',
    'solve',
    'LagrangianSystem',
    'NaturalLagrangian',
    'lagrange_metric',
    'energy',
    'semispray_from_lagrangian',
    'spray_G',
    'hamiltonian_constraint',
    'perturbation_operator_natural',
    'evolve_perturbation_natural',
    'energy_drift'
]
