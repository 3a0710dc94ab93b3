"""
Stepper router for geostab.
Hands out the time-stepper backend for a method name.
"""
from typing import Optional, Union

from .rk4 import RK4Stepper
from .dopri import DormandPrinceStepper

Stepper = Union[RK4Stepper, DormandPrinceStepper]


class StepperRouter:
    """Builds steppers lazily and reuses them (they hold no per-integration state)."""

    def __init__(self, default_method: str = "rk45"):
        """
        Args:
            default_method: "rk45" (adaptive) or "rk4" (fixed step)
        """
        self.default_method = default_method
        self.rk4_stepper = None
        self.dopri_stepper = None

    def get_stepper(self, method: Optional[str] = None) -> Stepper:
        method = method or self.default_method
        if method == "rk4":
            if not self.rk4_stepper:
                self.rk4_stepper = RK4Stepper()
            return self.rk4_stepper
        elif method == "rk45":
            if not self.dopri_stepper:
                self.dopri_stepper = DormandPrinceStepper()
            return self.dopri_stepper
        else:
            raise ValueError(f"Unsupported integration method: {method}")


_router = StepperRouter()


def get_stepper(method: Optional[str] = None) -> Stepper:
    """Module-level convenience over a shared router."""
    return _router.get_stepper(method)
