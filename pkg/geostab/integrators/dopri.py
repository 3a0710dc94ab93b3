"""
Dormand-Prince 5(4) embedded Runge-Kutta stepper.
"""
from typing import Callable, Tuple

import numpy as np

Rhs = Callable[[float, np.ndarray], np.ndarray]

C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# fifth-order minus embedded fourth-order weights
E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])


class DormandPrinceStepper:
    """Adaptive fifth-order stepper with an embedded error estimate (FSAL)."""

    name = "rk45"
    adaptive = True
    order = 5

    def step(self, rhs: Rhs, t: float, y: np.ndarray, f0: np.ndarray, h: float
             ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Advance one trial step.

        Returns:
            (new state, f at the new state, local error estimate)
        """
        k = [f0]
        for i in range(1, 6):
            yi = y + h * sum(a * kj for a, kj in zip(A[i], k) if a != 0.0)
            k.append(rhs(t + C[i] * h, yi))
        y_new = y + h * sum(b * kj for b, kj in zip(B, k) if b != 0.0)
        f_new = rhs(t + h, y_new)
        k.append(f_new)
        err = h * sum(e * kj for e, kj in zip(E, k) if e != 0.0)
        return y_new, f_new, err
