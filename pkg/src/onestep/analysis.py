"""Error metrics, convergence-order fits and numerical checks of the bounds
behind the ``|v - w| = O(N^-beta)`` result."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import AssumptionViolationError, InvalidParameterError
from .fokkerplanck import b_function, lattice_grid, normalization_K, require_assumptions, steady_state_v
from .master import integrate_master, point_mass, stable_time_step, stationary_distribution
from .meanfield import integrate_mf
from .ouapprox import curvature_q, steady_state_w
from .rates import build_chain

__all__ = [
    "ConvergenceReport",
    "InequalityCheck",
    "MasterComparison",
    "SweepPoint",
    "sup_error",
    "loglog_fit",
    "sweep",
    "empirical_order",
    "k_scaling",
    "check_exp_inequality",
    "check_rR_bounds",
    "compare_to_master",
    "mean_field_gap",
    "default_threads",
]

# sup|v - w| below this fraction of max v counts as analytic coincidence
EXACT_RTOL = 1e-9


def default_threads():
    """Worker cap for N-sweeps, from ``ONESTEP_THREADS`` (default 1)."""
    raw = os.environ.get("ONESTEP_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise InvalidParameterError(f"ONESTEP_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


@dataclass
class ConvergenceReport:
    Ns: list
    errors: list
    fitted_slope: float | None = None
    fitted_intercept: float | None = None
    r_squared: float | None = None
    exact_case: bool = False
    quantity: str = "sup|v-w|"

    def __post_init__(self):
        if len(self.Ns) != len(self.errors) or len(self.Ns) < 4:
            raise InvalidParameterError("a convergence report needs at least 4 (N, error) pairs")
        if any(b <= a for a, b in zip(self.Ns, self.Ns[1:])):
            raise InvalidParameterError("Ns must be strictly increasing")

    @property
    def rate(self):
        """Empirical order ``beta = -slope``."""
        return None if self.fitted_slope is None else -self.fitted_slope

    def to_dict(self):
        return {
            "quantity": self.quantity,
            "Ns": [int(n) for n in self.Ns],
            "errors": [float(e) for e in self.errors],
            "slope": self.fitted_slope,
            "intercept": self.fitted_intercept,
            "r2": self.r_squared,
            "exact_case": self.exact_case,
        }


def sup_error(f, g):
    """``max |f - g|`` over a shared grid."""
    if f.grid.shape != g.grid.shape or not np.array_equal(f.grid, g.grid):
        raise InvalidParameterError("profiles are sampled on different grids")
    return float(np.max(np.abs(f.values - g.values)))


def loglog_fit(Ns, values):
    """Least-squares line through ``(log N, log value)``; returns slope, intercept, r^2."""
    x = np.log(np.asarray(Ns, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


@dataclass(frozen=True)
class SweepPoint:
    N: int
    sup_vw: float
    K: float
    v_max: float


def _sweep_point(model, N, refine):
    v = steady_state_v(model, N, lattice_grid(N, refine))
    w = steady_state_w(model, N, v.K, v.grid)
    return SweepPoint(int(N), sup_error(v, w), v.K, float(np.max(v.values)))


def _check_Ns(Ns):
    Ns = [int(n) for n in Ns]
    if len(Ns) < 4:
        raise InvalidParameterError("need at least 4 values of N")
    if any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise InvalidParameterError("Ns must be strictly increasing")
    if Ns[0] < 10:
        raise InvalidParameterError("every N must be at least 10")
    return Ns


def sweep(model, Ns, refine=1, threads=None):
    """``v``, ``w`` and ``K`` for each ``N``; results come back ordered by ``N``."""
    z_star = require_assumptions(model).z_star
    Ns = _check_Ns(Ns)
    threads = default_threads() if threads is None else max(1, int(threads))
    # build the shared B cache before any fan-out
    b_function(model, z_star)
    if threads == 1:
        return [_sweep_point(model, N, refine) for N in Ns]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda N: _sweep_point(model, N, refine), Ns))


def _report(points, values, quantity, exact=False):
    Ns = [p.N for p in points]
    if exact:
        return ConvergenceReport(Ns, values, exact_case=True, quantity=quantity)
    slope, intercept, r2 = loglog_fit(Ns, values)
    return ConvergenceReport(Ns, values, slope, intercept, r2, quantity=quantity)


def empirical_order(model, Ns, refine=1, threads=None, points=None):
    """Fit ``log sup|v - w|`` against ``log N``.

    When every error is below ``EXACT_RTOL`` times the peak of ``v`` the
    densities coincide analytically (``a = c`` linear rates); the report is
    flagged ``exact_case`` and no line is fitted.
    """
    points = points or sweep(model, Ns, refine, threads)
    errors = [p.sup_vw for p in points]
    exact = all(p.sup_vw <= EXACT_RTOL * p.v_max for p in points)
    return _report(points, errors, "sup|v-w|", exact)


def k_scaling(model, Ns, threads=None, points=None):
    """Fit ``log K`` against ``log N``; the slope should approach ``-3/2``."""
    if points is None:
        z_star = require_assumptions(model).z_star
        Ns = _check_Ns(Ns)
        Ks = [normalization_K(model, N, z_star) for N in Ns]
        points = [SweepPoint(N, float("nan"), K, float("nan")) for N, K in zip(Ns, Ks)]
    return _report(points, [p.K for p in points], "K")


@dataclass(frozen=True)
class InequalityCheck:
    passed: bool
    samples: int
    counterexample: float | None = None

    def __bool__(self):
        return self.passed


def check_exp_inequality(samples=100_000, seed=0):
    """Check ``|1 - e^y| <= 2|y|`` on ``[-1, 1]`` at seeded uniform samples and
    at ``y = -1, 0, 1``."""
    if samples < 1000:
        raise InvalidParameterError("samples must be at least 1000")
    rng = np.random.default_rng(seed)
    y = np.concatenate(([-1.0, 0.0, 1.0], rng.uniform(-1.0, 1.0, samples)))
    bad = np.flatnonzero(np.abs(1.0 - np.exp(y)) > 2.0 * np.abs(y))
    if bad.size:
        return InequalityCheck(False, y.size, float(y[bad[0]]))
    return InequalityCheck(True, y.size)


def check_rR_bounds(model, grid_size=2001, exclude=1e-6):
    """Extremes ``(r, R)`` of ``B(z) / (z - z*)^2`` over ``[0, 1]``.

    Points within ``exclude`` of ``z*`` are dropped and the limit value ``q``
    is inserted in their place.

    Raises
    ------
    AssumptionViolationError
        If the ratio is not strictly negative everywhere.
    """
    z_star = require_assumptions(model).z_star
    q = curvature_q(model, z_star)
    z = np.linspace(0.0, 1.0, int(grid_size))
    z = z[np.abs(z - z_star) >= exclude]
    B = b_function(model, z_star)
    f = np.append(B(z) / (z - z_star) ** 2, q)
    r, R = float(np.min(f)), float(np.max(f))
    if not R < 0:
        raise AssumptionViolationError(f"B(z)/(z - z*)^2 reaches {R!r} >= 0")
    return r, R


@dataclass(frozen=True, eq=False)
class MasterComparison:
    N: int
    sup_pv: float
    sup_pw: float
    p: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    w: np.ndarray = field(repr=False)


def compare_to_master(model, N):
    """Exact stationary ``p_k`` against ``v(k/N)`` and ``w(k/N)``."""
    require_assumptions(model)
    if int(N) != N or N < 10 or N > 20000:
        raise InvalidParameterError(f"N must be an integer in [10, 20000], got {N!r}")
    N = int(N)
    p = stationary_distribution(build_chain(model, N)).p
    v = steady_state_v(model, N)
    w = steady_state_w(model, N, v.K, v.grid)
    return MasterComparison(
        N,
        float(np.max(np.abs(p - v.values))),
        float(np.max(np.abs(p - w.values))),
        p,
        v.values,
        w.values,
    )


def mean_field_gap(model, N, t_end, dt=None, k0=0, y0=None):
    """``max_t |m1(t) - y1(t)|`` for the master equation started at the point
    mass ``k0`` and the mean-field equation started at ``y0`` (default ``k0 / N``).

    Both integrators take identical RK4 steps, so the time-stepping error
    does not enter the difference.
    """
    chain = build_chain(model, N)
    if dt is None:
        dt = stable_time_step(chain)
    y0 = k0 / chain.N if y0 is None else y0
    ms = integrate_master(chain, point_mass(chain.N, k0), t_end, dt, record_every=10**9)
    mf = integrate_mf(model, y0, t_end, dt)
    return float(np.max(np.abs(ms.m1 - mf.y1)))
