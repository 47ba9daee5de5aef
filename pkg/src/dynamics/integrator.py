"""
Fixed-step classical Runge-Kutta (RK4) propagation.

The step size is constant over the whole sweep so that lambda(t) is sampled
at the same times on every run with the same settings.
"""
import logging
from typing import Callable, Iterable, Optional

import numpy as np

logger = logging.getLogger(__name__)

Derivative = Callable[[float, np.ndarray], np.ndarray]
SampleCallback = Callable[[int, float, np.ndarray], None]


def rk4_step(rhs: Derivative, t: float, y: np.ndarray, dt: float) -> np.ndarray:
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = rhs(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def sample_steps(times: Iterable[float], t_final: float, steps: int) -> list:
    """Step indices nearest to the requested times, clipped to [0, steps]."""
    dt = t_final / steps
    return sorted({int(min(max(round(t / dt), 0), steps)) for t in times})


def propagate(
    rhs: Derivative,
    y0: np.ndarray,
    t_final: float,
    steps: int,
    samples: Optional[Iterable[int]] = None,
    on_sample: Optional[SampleCallback] = None,
) -> np.ndarray:
    """
    Integrate dy/dt = rhs(t, y) from 0 to t_final in ``steps`` equal steps.

    Args:
        rhs: Right-hand side
        y0: Initial value (copied)
        t_final: End time
        steps: Number of RK4 steps
        samples: Step indices at which ``on_sample`` is called (0 is the initial value)
        on_sample: Callback receiving (step index, time, current value)

    Returns:
        The value at t_final
    """
    if steps < 1:
        raise ValueError(f"steps must be at least 1, got {steps}")
    dt = t_final / steps
    wanted = set(samples or ())
    y = np.array(y0, dtype=complex)

    if on_sample is not None and 0 in wanted:
        on_sample(0, 0.0, y)
    for n in range(1, steps + 1):
        y = rk4_step(rhs, (n - 1) * dt, y, dt)
        if on_sample is not None and n in wanted:
            on_sample(n, n * dt, y)
    return y
