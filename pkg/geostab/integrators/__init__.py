"""
Time-stepper backends for geostab.
"""
from .rk4 import RK4Stepper
from .dopri import DormandPrinceStepper
from .router import StepperRouter, get_stepper

__all__ = [
    'RK4Stepper',
    'DormandPrinceStepper',
    'StepperRouter',
    'get_stepper'
]
