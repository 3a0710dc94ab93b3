"""
Classical fixed-step Runge-Kutta stepper.
"""
from typing import Callable, Optional, Tuple

import numpy as np

Rhs = Callable[[float, np.ndarray], np.ndarray]


class RK4Stepper:
    """Fourth-order Runge-Kutta with a fixed step chosen by the caller."""

    name = "rk4"
    adaptive = False
    order = 4

    def step(self, rhs: Rhs, t: float, y: np.ndarray, f0: np.ndarray, h: float
             ) -> Tuple[np.ndarray, np.ndarray, Optional[np.ndarray]]:
        """
        Advance one step.

        Args:
            rhs: f(t, y)
            t: Current parameter
            y: Current state
            f0: f(t, y), already evaluated
            h: Step size

        Returns:
            (new state, f at the new state, None) since there is no error estimate
        """
        k1 = f0
        k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(t + h, y + h * k3)
        y_new = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        return y_new, rhs(t + h, y_new), None
