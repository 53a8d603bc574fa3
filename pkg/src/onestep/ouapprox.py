"""Ornstein-Uhlenbeck (Gaussian) approximation of the stationary density.

Freezing the diffusion at ``z*`` and linearizing the drift there turns
``N B(z)`` into ``N q (z - z*)^2`` with::

    q = (A'(z*) - C'(z*)) / (A(z*) + C(z*)) < 0

so that::

    w(z) = 2 N K / (A(z*) + C(z*)) * exp(N q (z - z*)^2)

``w`` reuses the constant ``K`` of ``v``; this pins ``w(z*) = v(z*)``
instead of giving ``w`` its own unit-cell mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AssumptionViolationError, InvalidParameterError
from .fokkerplanck import DensityProfile, _as_grid, normalization_K, require_assumptions

__all__ = [
    "OUParameters",
    "curvature_q",
    "ou_parameters",
    "ou_exponent",
    "steady_state_w",
    "symmetric_linear_U",
    "moivre_laplace",
    "standard_normal_pdf",
]


@dataclass(frozen=True)
class OUParameters:
    z_star: float
    q: float
    scale: float  # 2 N K / (A(z*) + C(z*)), the peak height of w
    N: int

    def __post_init__(self):
        if not self.q < 0:
            raise AssumptionViolationError(f"q must be negative, got {self.q!r}")
        if not self.scale > 0:
            raise InvalidParameterError(f"scale must be positive, got {self.scale!r}")

    @property
    def variance(self):
        """Variance of the Gaussian shape ``exp(N q (z - z*)^2)``."""
        return -1.0 / (2.0 * self.N * self.q)


def curvature_q(model, z_star):
    q = (model.dA(z_star) - model.dC(z_star)) / model.diffusion(z_star)
    if not q < 0:
        raise AssumptionViolationError(f"q = {q!r} is not negative at z* = {z_star!r}")
    return float(q)


def ou_exponent(z, q, z_star):
    """``p(z) = q (z - z*)^2``."""
    return q * (np.asarray(z, dtype=float) - z_star) ** 2


def ou_parameters(model, N, K=None):
    z_star = require_assumptions(model).z_star
    if K is None:
        K = normalization_K(model, N, z_star)
    q = curvature_q(model, z_star)
    return OUParameters(z_star, q, 2.0 * N * K / model.diffusion(z_star), int(N))


def steady_state_w(model, N, K, grid=None, normalization="shared"):
    """Gaussian approximation ``w`` on ``grid`` (default ``k / N``).

    ``normalization="shared"`` (the default) uses ``v``'s constant ``K`` as
    given. ``"mass"`` instead rescales ``w`` to integrate to ``1/N`` over
    ``[0, 1]``; it is meant for comparison output only.
    """
    if K is None:
        K = normalization_K(model, N, require_assumptions(model).z_star)
    params = ou_parameters(model, N, K)
    grid = _as_grid(grid, N)
    log_w = math.log(params.scale) + N * ou_exponent(grid, params.q, params.z_star)
    if normalization == "mass":
        r = math.sqrt(N * -params.q)
        gauss = math.sqrt(math.pi) / (2.0 * r) * (
            math.erf(r * (1.0 - params.z_star)) + math.erf(r * params.z_star)
        )
        log_w = -math.log(N * gauss) + N * ou_exponent(grid, params.q, params.z_star)
        K = 1.0 / (N * gauss) * model.diffusion(params.z_star) / (2.0 * N)
    elif normalization != "shared":
        raise InvalidParameterError(f"unknown normalization {normalization!r}")
    return DensityProfile.from_log(grid, log_w, K=K, z_star=params.z_star, N=int(N), label="w")


def symmetric_linear_U(N, grid=None):
    """Closed-form stationary density for ``A = a(1 - z)``, ``C = a z``:
    ``sqrt(2 / (pi N)) exp(-2N (z - 1/2)^2)``."""
    if int(N) != N or N < 2:
        raise InvalidParameterError(f"N must be an integer >= 2, got {N!r}")
    grid = _as_grid(grid, N)
    log_u = 0.5 * math.log(2.0 / (math.pi * N)) - 2.0 * N * (grid - 0.5) ** 2
    K = 1.0 / (2.0 * N) * math.sqrt(2.0 / (math.pi * N))
    return DensityProfile.from_log(grid, log_u, K=K, z_star=0.5, N=int(N), label="U")


def standard_normal_pdf(x):
    return np.exp(-0.5 * np.square(x)) / math.sqrt(2.0 * math.pi)


def moivre_laplace(N, q, k):
    """Normal approximation of the binomial pmf ``P(X = k)``, ``X ~ Bin(N, q)``."""
    if not 0.0 < q < 1.0:
        raise InvalidParameterError(f"q must lie in (0, 1), got {q!r}")
    k = np.asarray(k)
    if np.any(k < 0) or np.any(k > N):
        raise InvalidParameterError(f"k must lie in 0..{N}")
    sd = math.sqrt(N * q * (1.0 - q))
    out = standard_normal_pdf((k - N * q) / sd) / sd
    return float(out) if out.ndim == 0 else out
