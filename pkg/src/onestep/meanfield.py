"""Mean-field equation ``dy/dt = A(y) - C(y)`` and its equilibrium."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AssumptionViolationError, InvalidParameterError, ModelViolationError
from .master import step_count
from .rates import validate_assumptions

__all__ = ["MeanFieldSolution", "integrate_mf", "equilibrium"]

_BOX_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class MeanFieldSolution:
    times: np.ndarray
    y1: np.ndarray


def integrate_mf(model, y0, t_end, dt):
    """RK4 trajectory of the mean-field equation.

    The step count is chosen exactly as in
    :func:`onestep.master.integrate_master`, so the two integrators share
    time points when given the same ``t_end`` and ``dt``.
    """
    y0 = float(y0)
    if not 0.0 <= y0 <= 1.0:
        raise InvalidParameterError(f"y0 must lie in [0, 1], got {y0!r}")
    steps = step_count(t_end, dt)
    h = t_end / steps
    f = model.drift
    y = y0
    ys = np.empty(steps + 1)
    ys[0] = y
    for n in range(1, steps + 1):
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if y < -_BOX_TOL or y > 1.0 + _BOX_TOL:
            raise ModelViolationError(f"mean-field trajectory left [0, 1]: y({n * h:.6g}) = {y!r}")
        ys[n] = y
    return MeanFieldSolution(np.arange(steps + 1) * h, ys)


def equilibrium(model):
    """The unique root ``z*`` of ``A - C`` in ``[0, 1]``, found by bisection."""
    report = validate_assumptions(model)
    if not report.has_unique_root:
        raise AssumptionViolationError("; ".join(report.messages) or "no unique root of A - C")
    return report.z_star
