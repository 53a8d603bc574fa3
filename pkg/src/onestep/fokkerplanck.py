"""Stationary solution of the Fokker-Planck equation of a density-dependent chain.

With diffusion ``g = (A + C) / 2N`` and drift ``h = A - C`` the zero-flux
steady state on ``[0, 1]`` is::

    v(z) = 2 N K / (A(z) + C(z)) * exp(N B(z)),
    B(z) = 2 * integral_{z*}^{z} (A - C) / (A + C) dx,

where ``z*`` is the root of ``A - C`` and ``K`` fixes the total mass to
``1 / N`` (the mass of one lattice cell per state). Densities are assembled
in log space and exponentiated last, because ``exp(N B)`` spans hundreds of
decades once ``N`` reaches a few thousand.
"""

from __future__ import annotations

import bisect
import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import AssumptionViolationError, InvalidParameterError
from .master import Generator
from .quadrature import adaptive_simpson
from .rates import validate_assumptions

__all__ = [
    "DensityProfile",
    "BFunction",
    "b_function",
    "compute_B",
    "normalization_K",
    "steady_state_v",
    "linear_closed_form_v",
    "fp_discretization_matrix",
    "lattice_grid",
    "boundary_points",
    "require_assumptions",
]

REFERENCE_POINTS = 2049
B_TOL = 1e-12
K_RTOL = 1e-11


def boundary_points(N):
    """Zero-flux boundary locations ``(-1/2N, 1 + 1/2N)`` of the continuous
    problem. Informational only: normalization integrates over ``[0, 1]``."""
    return -0.5 / N, 1.0 + 0.5 / N


def lattice_grid(N, refine=1):
    """``z = j / (refine N)`` for ``j = 0..refine N``; ``refine=1`` gives ``k / N``."""
    if int(refine) != refine or refine < 1:
        raise InvalidParameterError(f"refine must be a positive integer, got {refine!r}")
    M = int(refine) * int(N)
    return np.arange(M + 1) / M


@dataclass(frozen=True, eq=False)
class DensityProfile:
    """A density sampled on an ascending grid of ``[0, 1]``."""

    grid: np.ndarray
    log_values: np.ndarray
    values: np.ndarray
    K: float
    z_star: float
    N: int
    label: str = "v"

    def __post_init__(self):
        for name in ("grid", "log_values", "values"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if not (self.grid.shape == self.log_values.shape == self.values.shape):
            raise InvalidParameterError("grid and values must have the same shape")

    @classmethod
    def from_log(cls, grid, log_values, **kw):
        log_values = np.asarray(log_values, dtype=float)
        return cls(np.asarray(grid, dtype=float), log_values, np.exp(log_values), **kw)

    def mass(self):
        """Trapezoid integral of the sampled values."""
        return float(np.trapezoid(self.values, self.grid))

    def mode(self):
        return float(self.grid[int(np.argmax(self.values))])


def require_assumptions(model):
    report = validate_assumptions(model)
    if not report.ok:
        raise AssumptionViolationError("; ".join(report.messages))
    return report


def _as_grid(grid, N):
    if grid is None:
        return lattice_grid(N)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise InvalidParameterError("grid must be a non-empty 1-d array")
    if np.any(grid < 0.0) or np.any(grid > 1.0):
        raise InvalidParameterError("grid points must lie in [0, 1]")
    if np.any(np.diff(grid) <= 0):
        raise InvalidParameterError("grid must be strictly ascending")
    return grid


class BFunction:
    """``B(z) = 2 * integral_{z*}^{z} (A - C)/(A + C)``, cached on reference nodes.

    The antiderivative is accumulated outward from ``z*`` over
    Chebyshev-Lobatto panels of ``[0, 1]`` (``z*`` inserted as a node). A
    query integrates only the partial panel between the query point and its
    neighbouring node on the ``z*`` side. Every panel integrand has one sign,
    and Simpson/Boole weights are positive, so ``B < 0`` away from ``z*``
    holds exactly, not just to tolerance.
    """

    def __init__(self, model, z_star, n_ref=REFERENCE_POINTS, tol=B_TOL):
        self.model = model
        self.z_star = float(z_star)
        self.tol = tol
        theta = np.linspace(0.0, np.pi, n_ref)
        nodes = sorted(set((0.5 * (1.0 - np.cos(theta))).tolist()) | {self.z_star})
        nodes[0], nodes[-1] = 0.0, 1.0
        self.nodes = nodes
        self.i_star = nodes.index(self.z_star)
        panel_tol = tol / len(nodes)
        f = self.integrand
        vals = [0.0] * len(nodes)
        for i in range(self.i_star + 1, len(nodes)):
            vals[i] = vals[i - 1] + adaptive_simpson(f, nodes[i - 1], nodes[i], panel_tol)
        for i in range(self.i_star - 1, -1, -1):
            vals[i] = vals[i + 1] - adaptive_simpson(f, nodes[i], nodes[i + 1], panel_tol)
        self.node_values = vals
        self._query_tol = 0.1 * tol

    def integrand(self, x):
        m = self.model
        return 2.0 * m.drift(x) / m.diffusion(x)

    def _scalar(self, z):
        z = float(z)
        if not 0.0 <= z <= 1.0:
            raise InvalidParameterError(f"B is only defined on [0, 1], got z={z!r}")
        nodes, vals = self.nodes, self.node_values
        if z >= self.z_star:
            j = bisect.bisect_right(nodes, z) - 1
            if nodes[j] == z:
                return vals[j]
            return vals[j] + adaptive_simpson(self.integrand, nodes[j], z, self._query_tol)
        j = bisect.bisect_left(nodes, z)
        if nodes[j] == z:
            return vals[j]
        return vals[j] - adaptive_simpson(self.integrand, z, nodes[j], self._query_tol)

    def __call__(self, z):
        if np.ndim(z) == 0:
            return self._scalar(z)
        z = np.asarray(z, dtype=float)
        return np.array([self._scalar(x) for x in z.ravel()]).reshape(z.shape)

    def derivative(self, z):
        return self.integrand(z)


@functools.lru_cache(maxsize=64)
def b_function(model, z_star):
    """Shared, read-only :class:`BFunction` per ``(model, z*)``."""
    return BFunction(model, z_star)


def compute_B(model, z_star, z):
    return b_function(model, float(z_star))(z)


def _laplace_scale(model, z_star, N):
    s = model.diffusion(z_star)
    q = (model.dA(z_star) - model.dC(z_star)) / s
    if not q < 0:
        raise AssumptionViolationError(f"curvature q = {q!r} is not negative")
    width = 1.0 / math.sqrt(N * -q)
    return width, math.sqrt(math.pi) * width / s


def _normalization_integral(integrand, z_star, width, estimate):
    # breakpoints at geometric multiples of the peak width keep every panel
    # resolvable by the adaptive rule regardless of N
    pts = {0.0, 1.0, z_star}
    for m in (0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0):
        for x in (z_star - m * width, z_star + m * width):
            if 0.0 < x < 1.0:
                pts.add(x)
    pts = sorted(pts)
    tol = K_RTOL * estimate / (len(pts) - 1)
    return math.fsum(adaptive_simpson(integrand, lo, hi, tol) for lo, hi in zip(pts[:-1], pts[1:]))


def normalization_K(model, N, z_star):
    """``K`` with ``integral_0^1 v = 1/N``: ``K = 1 / (2 N^2 * integral_0^1 exp(N B)/(A + C))``.

    ``B <= 0`` with ``B(z*) = 0``, so the integrand never exceeds
    ``1 / min(A + C)`` and cannot overflow.
    """
    if int(N) != N or N < 2:
        raise InvalidParameterError(f"N must be an integer >= 2, got {N!r}")
    B = b_function(model, float(z_star))
    width, estimate = _laplace_scale(model, z_star, N)

    def integrand(z):
        return math.exp(N * B(z)) / model.diffusion(z)

    integral = _normalization_integral(integrand, z_star, width, estimate)
    return 1.0 / (2.0 * N * N * integral)


def steady_state_v(model, N, grid=None, K=None):
    """Stationary Fokker-Planck density ``v`` on ``grid`` (default ``k / N``).

    Raises
    ------
    AssumptionViolationError
        If ``A - C`` lacks a unique stable root or ``A + C`` vanishes somewhere.
    """
    report = require_assumptions(model)
    z_star = report.z_star
    grid = _as_grid(grid, N)
    if K is None:
        K = normalization_K(model, N, z_star)
    B = b_function(model, z_star)
    log_v = math.log(2.0 * N * K) - np.log(model.diffusion(grid)) + N * B(grid)
    return DensityProfile.from_log(grid, log_v, K=K, z_star=z_star, N=int(N), label="v")


def linear_closed_form_v(a, c, N, grid=None):
    """Closed-form ``v`` for ``A = a(1 - z)``, ``C = c z`` with ``a != c``.

    Uses ``N B(z) = 2N/(a-c)^2 [(a^2 - c^2)(z - z*) + 2ac ln(s(z)/s(z*))]``
    with ``s(z) = a + (c - a) z``. ``K`` is obtained by integrating this
    closed form, independently of the quadrature path in :func:`steady_state_v`.
    """
    a = float(a)
    c = float(c)
    if a <= 0 or c <= 0:
        raise InvalidParameterError("a and c must be positive")
    if a == c:
        raise InvalidParameterError("a == c: use onestep.ouapprox.symmetric_linear_U")
    grid = _as_grid(grid, N)
    z_star = a / (a + c)
    s_star = 2.0 * a * c / (a + c)
    pref = 2.0 * N / (a - c) ** 2

    def log_shape(z):
        # log(exp(N B(z)) / s(z)); log1p keeps the ratio accurate near z*
        d = z - z_star
        s = a + (c - a) * z
        return pref * ((a * a - c * c) * d + 2.0 * a * c * math.log1p((c - a) * d / s_star)) - math.log(s)

    q = -((a + c) ** 2) / (2.0 * a * c)
    width = 1.0 / math.sqrt(N * -q)
    estimate = math.sqrt(math.pi) * width / s_star
    integral = _normalization_integral(lambda z: math.exp(log_shape(z)), z_star, width, estimate)
    K = 1.0 / (2.0 * N * N * integral)
    log_v = math.log(2.0 * N * K) + np.array([log_shape(z) for z in grid])
    return DensityProfile.from_log(grid, log_v, K=K, z_star=z_star, N=int(N), label="v_closed")


def _two_sum(x, y):
    """Error-free transform: ``x + y == s + e`` exactly."""
    s = x + y
    bp = s - x
    return s, (x - (s - bp)) + (y - bp)


def _half_sum(s1, e1, s2, e2):
    """``((s1 + e1) + (s2 + e2)) / 2`` with the leading terms added exactly."""
    s, e = _two_sum(s1, s2)
    return 0.5 * (s + (e + (e1 + e2)))


def fp_discretization_matrix(chain):
    """Second-order central-difference discretization of the Fokker-Planck
    operator on the lattice ``k / N``.

    Interior rows use ``g_k = (a_k + c_k) / 2N^2`` and ``h_k = (a_k - c_k) / N``::

        N^2 [(g u)_{k-1} - 2 (g u)_k + (g u)_{k+1}] - N/2 [(h u)_{k+1} - (h u)_{k-1}]

    Rows ``0`` and ``N`` encode the zero-flux boundary, which coincides with
    the truncated master-equation rows.
    """
    N = chain.N
    a, c = chain.a, chain.c
    # N^2 g_k and N h_k / 2 carried as unevaluated sums (value, rounding
    # error): near the boundaries a_k << c_k (or the reverse) and the plain
    # stencil would lose log10(c_k / a_k) digits to cancellation
    g2, g2_err = _two_sum(a, c)
    h2, h2_err = _two_sum(a, -c)
    sub = _half_sum(g2[:-1], g2_err[:-1], h2[:-1], h2_err[:-1])
    diag = -(g2 + g2_err)
    sup = _half_sum(g2[1:], g2_err[1:], -h2[1:], -h2_err[1:])
    # boundary rows from the master equation (zero flux through -1/2N, 1+1/2N)
    diag[0] = -(a[0] + c[0])
    diag[-1] = -(a[-1] + c[-1])
    sup[0] = c[1]
    sub[-1] = a[-2]
    return Generator(N, sub, diag, sup)
