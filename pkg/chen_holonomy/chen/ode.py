from __future__ import annotations

import logging
import math
from typing import Callable, Sequence

from chen_holonomy.chen.model import ChenSeries, NumericalOverflowError
from chen_holonomy.chen.series import transport_generator
from chen_holonomy.forms.calculus import eval_at_point
from chen_holonomy.forms.model import ExteriorValue, HomForm
from chen_holonomy.locsys.model import ResidualReport

LOGGER = logging.getLogger(__name__)

Derivative = Callable[[float, ExteriorValue], ExteriorValue]


def runge_kutta_4(
    value: ExteriorValue, derivative: Derivative, t: float, h: float
) -> ExteriorValue:
    k1 = derivative(t, value)
    k2 = derivative(t + h / 2, value + k1.scaled(h / 2))
    k3 = derivative(t + h / 2, value + k2.scaled(h / 2))
    k4 = derivative(t + h, value + k3.scaled(h))
    return value + (k1 + k2.scaled(2.0) + k3.scaled(2.0) + k4).scaled(h / 6)


def phi_ode(
    omega: HomForm, x: Sequence[float], t_grid: Sequence[float], step: float
) -> list[ExteriorValue]:
    """
    integrates dPhi/dt = f(t) ^ Phi with Phi(0) = id on the exterior-algebra fiber
    at x, using fixed-size RK4 steps no longer than `step`. returns Phi at each
    grid time; the grid must be ascending and start at or after 0.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    if list(t_grid) != sorted(t_grid) or (t_grid and t_grid[0] < 0):
        raise ValueError("time grid must be ascending and non-negative")
    generator = transport_generator(omega)

    def derivative(t: float, value: ExteriorValue) -> ExteriorValue:
        return eval_at_point(generator, x, t).wedge(value)

    value = ExteriorValue.identity(omega.source)
    current = 0.0
    trajectory = []
    for target in t_grid:
        span = target - current
        steps = max(1, math.ceil(span / step - 1e-9)) if span > 0 else 0
        for _ in range(steps):
            h = span / steps
            value = runge_kutta_4(value, derivative, current, h)
            current += h
            if not value.is_finite():
                raise NumericalOverflowError(f"transport blew up near t = {current}")
        current = target
        trajectory.append(value)
    return trajectory


def relative_error(approximate: ExteriorValue, exact: ExteriorValue) -> float:
    scale = max(1.0, exact.max_abs())
    return (approximate - exact).max_abs() / scale


def ode_agreement_report(
    series: ChenSeries,
    points: Sequence[Sequence[float]],
    t_grid: Sequence[float],
    step: float,
    tolerance: float,
) -> ResidualReport:
    """RK4 transport against the exact polynomial transport at each (x, t) sample"""
    exact_phi = series.require_exact().total()
    worst, witness = 0.0, None
    for x in points:
        trajectory = phi_ode(series.omega, x, t_grid, step)
        for t, approximate in zip(t_grid, trajectory):
            error = relative_error(approximate, eval_at_point(exact_phi, x, t))
            if error > worst or witness is None:
                worst, witness = error, f"x={[round(float(v), 6) for v in x]}, t={t}"
    LOGGER.debug("worst ode relative error %s at %s", worst, witness)
    return ResidualReport.from_float(
        "transport ode agreement", "rk4 vs exact Phi", worst, tolerance, witness
    )
