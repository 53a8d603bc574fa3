"""scikit-learn style wrapper around the stationary-density computations.

``fit`` resolves ``z*``, ``q`` and the normalization constant for the
configured model and ``N``; ``score_samples`` returns log-densities at
arbitrary points of ``[0, 1]`` and ``predict`` the densities themselves.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import InvalidParameterError
from .fokkerplanck import b_function, normalization_K, require_assumptions
from .master import stationary_distribution
from .ouapprox import curvature_q
from .rates import RateModel, build_chain, model_from_dict

_METHODS = ("fp", "ou")


class SteadyStateDensity(BaseEstimator):
    """Stationary density of a density-dependent one-step chain.

    Parameters
    ----------
    model : RateModel or dict
        Rate model, or a ``{"kind": ...}`` specification.
    N : int
        System size.
    method : {"fp", "ou"}
        ``"fp"`` evaluates the Fokker-Planck steady state ``v``; ``"ou"`` its
        Gaussian approximation ``w`` (sharing ``v``'s constant ``K``).

    Attributes
    ----------
    z_star_ : float
    q_ : float
    K_ : float
    stationary_ : ndarray of shape (N + 1,)
        Exact stationary probabilities of the finite chain.
    """

    def __init__(self, model=None, N=50, method="fp"):
        self.model = model
        self.N = N
        self.method = method

    def _resolved_model(self):
        if isinstance(self.model, RateModel):
            return self.model
        if isinstance(self.model, dict):
            return model_from_dict(self.model)
        raise InvalidParameterError("model must be a RateModel or a model specification dict")

    def fit(self, X=None, y=None):
        if self.method not in _METHODS:
            raise InvalidParameterError(f"method must be one of {_METHODS}, got {self.method!r}")
        if int(self.N) != self.N or self.N < 10:
            raise InvalidParameterError(f"N must be an integer >= 10, got {self.N!r}")
        model = self._resolved_model()
        self.model_ = model
        self.z_star_ = require_assumptions(model).z_star
        self.q_ = curvature_q(model, self.z_star_)
        self.K_ = normalization_K(model, int(self.N), self.z_star_)
        self.stationary_ = stationary_distribution(build_chain(model, int(self.N))).p
        return self

    def _points(self, X):
        z = check_array(X, ensure_2d=False, dtype=np.float64)
        if z.ndim == 2:
            if z.shape[1] != 1:
                raise ValueError(f"expected a single column of z values, got shape {z.shape}")
            z = z[:, 0]
        if np.any(z < 0.0) or np.any(z > 1.0):
            raise ValueError("z values must lie in [0, 1]")
        return z

    def score_samples(self, X):
        """Natural log of the density at each ``z`` in ``X``."""
        check_is_fitted(self, "K_")
        z = self._points(X)
        N = int(self.N)
        m = self.model_
        if self.method == "fp":
            B = b_function(m, self.z_star_)
            return math.log(2.0 * N * self.K_) - np.log(m.diffusion(z)) + N * B(z)
        return (
            math.log(2.0 * N * self.K_)
            - math.log(m.diffusion(self.z_star_))
            + N * self.q_ * (z - self.z_star_) ** 2
        )

    def predict(self, X):
        return np.exp(self.score_samples(X))

    def score(self, X, y=None):
        """Mean log-density of ``X``."""
        return float(np.mean(self.score_samples(X)))
