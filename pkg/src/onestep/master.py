"""Master equation of a one-step chain: generator, stationary law, time evolution.

For ``k = 0..N`` the probabilities obey::

    dp_k/dt = a_{k-1} p_{k-1} - (a_k + c_k) p_k + c_{k+1} p_{k+1}

with the out-of-range terms dropped at ``k = 0`` and ``k = N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, NumericalError, ReducibleChainError, StabilityError

__all__ = [
    "Generator",
    "Distribution",
    "MasterSolution",
    "generator_matrix",
    "stationary_distribution",
    "integrate_master",
    "first_moment",
    "point_mass",
    "stable_time_step",
    "step_count",
]

# dt * max_k (a_k + c_k) must stay below this for the RK4 guard
STABILITY_FACTOR = 0.5


@dataclass(frozen=True, eq=False)
class Generator:
    """Tridiagonal generator stored by diagonals.

    ``sub[k-1]`` is the entry in row ``k``, column ``k-1`` (inflow from below,
    equal to ``a_{k-1}``); ``sup[k]`` is row ``k``, column ``k+1`` (inflow from
    above, ``c_{k+1}``).
    """

    N: int
    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray

    def apply(self, p):
        out = self.diag * p
        out[1:] += self.sub * p[:-1]
        out[:-1] += self.sup * p[1:]
        return out

    def to_dense(self):
        return np.diag(self.diag) + np.diag(self.sub, -1) + np.diag(self.sup, 1)

    def column_sums(self):
        sums = self.diag.copy()
        sums[:-1] += self.sub
        sums[1:] += self.sup
        return sums


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability vector over ``0..N``."""

    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.ndim != 1 or p.size < 2:
            raise InvalidParameterError("distribution must be a 1-d array with at least 2 states")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise InvalidParameterError("probabilities must be finite and nonnegative")
        if abs(math.fsum(p) - 1.0) > 1e-12:
            raise InvalidParameterError(f"probabilities sum to {math.fsum(p)!r}, not 1")
        p.flags.writeable = False
        object.__setattr__(self, "p", p)

    @property
    def N(self):
        return self.p.size - 1


def point_mass(N, k):
    if not 0 <= k <= N:
        raise InvalidParameterError(f"state {k} outside 0..{N}")
    p = np.zeros(N + 1)
    p[k] = 1.0
    return Distribution(p)


def generator_matrix(chain):
    a, c = chain.a, chain.c
    return Generator(chain.N, a[:-1].copy(), -(a + c), c[1:].copy())


def stationary_distribution(chain):
    """Exact stationary law from detailed balance ``a_k p_k = c_{k+1} p_{k+1}``.

    The log-weights locate the global mode; the probabilities are then
    rebuilt as products of rate ratios walking outward from it, so every
    partial product stays at or below the modal value and nothing overflows.

    Raises
    ------
    ReducibleChainError
        If some ``a_k`` (``k < N``) or ``c_k`` (``k > 0``) is zero.
    """
    a, c = chain.a, chain.c
    up = a[:-1]
    down = c[1:]
    bad = np.flatnonzero(up <= 0)
    if bad.size:
        k = int(bad[0])
        raise ReducibleChainError(f"chain is reducible: a_{k} = 0", k)
    bad = np.flatnonzero(down <= 0)
    if bad.size:
        k = int(bad[0]) + 1
        raise ReducibleChainError(f"chain is reducible: c_{k} = 0", k)

    ratio = up / down
    logw = np.concatenate(([0.0], np.cumsum(np.log(ratio))))
    mode = int(np.argmax(logw))
    w = np.empty_like(logw)
    w[mode] = 1.0
    for k in range(mode, chain.N):
        w[k + 1] = w[k] * ratio[k]
    for k in range(mode - 1, -1, -1):
        w[k] = w[k + 1] / ratio[k]
    return Distribution(w / math.fsum(w))


def first_moment(dist):
    """Scaled mean ``sum_k (k / N) p_k``."""
    p = dist.p if isinstance(dist, Distribution) else np.asarray(dist, dtype=float)
    N = p.size - 1
    return math.fsum(np.arange(N + 1) * p) / N


def stable_time_step(chain):
    return STABILITY_FACTOR / chain.max_exit_rate


def step_count(t_end, dt):
    """Number of equal RK4 steps covering ``[0, t_end]`` with step at most ``dt``."""
    if not t_end > 0 or not dt > 0:
        raise InvalidParameterError("t_end and dt must be positive")
    n = t_end / dt
    steps = int(round(n))
    if steps < 1 or abs(n - steps) > 1e-9 * n:
        steps = int(math.ceil(n))
    return steps


@dataclass(frozen=True, eq=False)
class MasterSolution:
    """``times``/``m1`` hold every RK4 step; ``state_times``/``p`` only the
    recorded snapshots."""

    times: np.ndarray
    m1: np.ndarray
    state_times: np.ndarray
    p: np.ndarray  # (len(state_times), N + 1)
    mass_drift: float

    @property
    def final(self):
        # RK4 may leave round-off negatives in far tails
        p = np.clip(self.p[-1], 0.0, None)
        return Distribution(p / math.fsum(p))


def integrate_master(chain, p0, t_end, dt, record_every=1):
    """Classical RK4 on the master equation.

    Every step is renormalized to unit mass after the raw drift is checked
    against a budget of ``1e-9`` per unit time. The scaled mean is kept for
    every step; full states every ``record_every`` steps plus the last one.

    Raises
    ------
    StabilityError
        If ``dt * max_k (a_k + c_k)`` exceeds 0.5.
    NumericalError
        If the unnormalized mass drifts more than the budget.
    """
    if not isinstance(p0, Distribution):
        p0 = Distribution(p0)
    if p0.N != chain.N:
        raise InvalidParameterError(f"initial distribution has {p0.N + 1} states, chain has {chain.N + 1}")
    if int(record_every) != record_every or record_every < 1:
        raise InvalidParameterError("record_every must be a positive integer")
    limit = stable_time_step(chain)
    if dt > limit * (1 + 1e-12):
        raise StabilityError(f"dt = {dt!r} exceeds stability guard {limit!r}")
    steps = step_count(t_end, dt)
    h = t_end / steps
    G = generator_matrix(chain)
    k_scale = np.arange(chain.N + 1) / chain.N

    p = p0.p.copy()
    m1 = np.empty(steps + 1)
    m1[0] = k_scale @ p
    state_times, states = [0.0], [p.copy()]
    drift_total = 0.0
    budget = 1e-9 * t_end
    for n in range(1, steps + 1):
        k1 = G.apply(p)
        k2 = G.apply(p + (0.5 * h) * k1)
        k3 = G.apply(p + (0.5 * h) * k2)
        k4 = G.apply(p + h * k3)
        p = p + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        mass = p.sum()
        drift_total += abs(mass - 1.0)
        if drift_total > budget:
            raise NumericalError(f"probability mass drifted by {drift_total:.3g} by t = {n * h:.6g}")
        p /= mass
        m1[n] = k_scale @ p
        if n % record_every == 0 or n == steps:
            state_times.append(n * h)
            states.append(p.copy())
    return MasterSolution(
        np.arange(steps + 1) * h, m1, np.array(state_times), np.array(states), drift_total
    )
