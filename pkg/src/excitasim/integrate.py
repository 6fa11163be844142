"""Classic fixed-step Runge-Kutta on plain float lists."""

from __future__ import annotations

from typing import Callable, Sequence

Rhs = Callable[..., list]


def rk4_step(rhs: Rhs, x: Sequence[float], h: float, *args) -> list[float]:
    """One RK4 step of ``dx/dt = rhs(x, *args)``; inputs held over the step."""
    k1 = rhs(x, *args)
    k2 = rhs([a + 0.5 * h * b for a, b in zip(x, k1)], *args)
    k3 = rhs([a + 0.5 * h * b for a, b in zip(x, k2)], *args)
    k4 = rhs([a + h * b for a, b in zip(x, k3)], *args)
    h6 = h / 6.0
    return [
        a + h6 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
        for a, b1, b2, b3, b4 in zip(x, k1, k2, k3, k4)
    ]
