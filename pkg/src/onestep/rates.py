"""Coefficient functions of density-dependent one-step processes.

A one-step (birth-death) chain on ``{0, ..., N}`` is density dependent when
its rates are generated by two functions on ``[0, 1]``::

    a_k = N * A(k / N),    c_k = N * C(k / N)

with ``A(1) = 0 = C(0)`` so that ``a_N = 0 = c_0``. Every model supported here
is polynomial, which keeps derivatives exact.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError, ModelViolationError

__all__ = [
    "ModelKind",
    "RateModel",
    "DiscreteChain",
    "AssumptionReport",
    "make_linear_model",
    "make_sis_complete_model",
    "make_polynomial_model",
    "model_from_dict",
    "build_chain",
    "validate_assumptions",
    "bisect_root",
]

# sign checks on [0, 1] use this many uniform points
VALIDATION_GRID = 1001
_SIGN_TOL = 1e-12


class ModelKind(str, enum.Enum):
    LINEAR = "linear"
    SIS = "sis"
    POLYNOMIAL = "polynomial"


def _horner(coeffs, z):
    # ascending coefficients; works for floats and ndarrays alike
    out = 0.0 * z
    for c in reversed(coeffs):
        out = out * z + c
    return out


def _deriv(coeffs):
    return tuple(k * c for k, c in enumerate(coeffs))[1:] or (0.0,)


@dataclass(frozen=True)
class RateModel:
    """Polynomial coefficient functions ``A`` (up-rate) and ``C`` (down-rate).

    Coefficients are stored in ascending powers of ``z``. Instances are
    immutable and hashable, so they can key caches and be shared freely.
    """

    kind: ModelKind
    coeffs_A: tuple
    coeffs_C: tuple
    params: tuple = ()
    _dA: tuple = field(init=False, repr=False, compare=False)
    _dC: tuple = field(init=False, repr=False, compare=False)
    _d2A: tuple = field(init=False, repr=False, compare=False)
    _d2C: tuple = field(init=False, repr=False, compare=False)
    _drift: tuple = field(init=False, repr=False, compare=False)
    _diff: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "coeffs_A", tuple(float(c) for c in self.coeffs_A))
        object.__setattr__(self, "coeffs_C", tuple(float(c) for c in self.coeffs_C))
        object.__setattr__(self, "_dA", _deriv(self.coeffs_A))
        object.__setattr__(self, "_dC", _deriv(self.coeffs_C))
        object.__setattr__(self, "_d2A", _deriv(self._dA))
        object.__setattr__(self, "_d2C", _deriv(self._dC))
        object.__setattr__(self, "_drift", _combine(self.coeffs_A, self.coeffs_C, -1.0))
        object.__setattr__(self, "_diff", _combine(self.coeffs_A, self.coeffs_C, 1.0))

    def A(self, z):
        return _horner(self.coeffs_A, z)

    def C(self, z):
        return _horner(self.coeffs_C, z)

    def dA(self, z):
        return _horner(self._dA, z)

    def dC(self, z):
        return _horner(self._dC, z)

    def d2A(self, z):
        return _horner(self._d2A, z)

    def d2C(self, z):
        return _horner(self._d2C, z)

    def drift(self, z):
        """``A(z) - C(z)``, the right-hand side of the mean-field equation."""
        return _horner(self._drift, z)

    def diffusion(self, z):
        """``A(z) + C(z)``."""
        return _horner(self._diff, z)

    def to_dict(self):
        if self.kind is ModelKind.POLYNOMIAL:
            return {"kind": "polynomial", "A": list(self.coeffs_A), "C": list(self.coeffs_C)}
        return {"kind": self.kind.value, **dict(self.params)}


def _combine(p, q, sign):
    n = max(len(p), len(q))
    p = p + (0.0,) * (n - len(p))
    q = q + (0.0,) * (n - len(q))
    return tuple(x + sign * y for x, y in zip(p, q))


def _check_model(model):
    scale_A = sum(abs(c) for c in model.coeffs_A) or 1.0
    scale_C = sum(abs(c) for c in model.coeffs_C) or 1.0
    if abs(model.A(1.0)) > _SIGN_TOL * scale_A:
        raise InvalidParameterError(f"A(1) must vanish, got {model.A(1.0)!r}")
    if abs(model.C(0.0)) > _SIGN_TOL * scale_C:
        raise InvalidParameterError(f"C(0) must vanish, got {model.C(0.0)!r}")
    z = np.linspace(0.0, 1.0, VALIDATION_GRID)
    for name, vals, scale in (("A", model.A(z), scale_A), ("C", model.C(z), scale_C)):
        i = int(np.argmin(vals))
        if vals[i] < -_SIGN_TOL * scale:
            raise ModelViolationError(f"{name}(z) is negative at z={z[i]:.6g}: {vals[i]!r}")
    return model


def _positive(name, value):
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise InvalidParameterError(f"{name} must be a positive real, got {value!r}")
    return value


def make_linear_model(a, c):
    """``A(z) = a (1 - z)``, ``C(z) = c z``; the stationary law is binomial."""
    a = _positive("a", a)
    c = _positive("c", c)
    return RateModel(ModelKind.LINEAR, (a, -a), (0.0, c), (("a", a), ("c", c)))


def make_sis_complete_model(beta, gamma):
    """SIS epidemic on a complete graph: ``A(z) = beta z (1 - z)``, ``C(z) = gamma z``.

    The infection rate per edge scales as ``beta / N``. ``z = 0`` is always a
    root of ``A - C``, so this model never passes :func:`validate_assumptions`.
    """
    beta = _positive("beta", beta)
    gamma = _positive("gamma", gamma)
    return RateModel(
        ModelKind.SIS, (0.0, beta, -beta), (0.0, gamma), (("beta", beta), ("gamma", gamma))
    )


def make_polynomial_model(coeffs_A, coeffs_C):
    coeffs_A = tuple(float(c) for c in coeffs_A)
    coeffs_C = tuple(float(c) for c in coeffs_C)
    if not coeffs_A or not coeffs_C:
        raise InvalidParameterError("coefficient lists must be non-empty")
    if not all(np.isfinite(coeffs_A + coeffs_C)):
        raise InvalidParameterError("coefficients must be finite")
    return _check_model(RateModel(ModelKind.POLYNOMIAL, coeffs_A, coeffs_C))


def model_from_dict(spec):
    """Build a model from ``{"kind": ..., <parameters>}``.

    ``linear`` takes ``a`` and ``c``; ``sis`` takes ``beta`` and ``gamma``;
    ``polynomial`` takes ascending coefficient lists ``A`` and ``C``.
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise InvalidParameterError("model specification needs a 'kind' field")
    kind = spec["kind"]
    try:
        if kind == "linear":
            return make_linear_model(spec["a"], spec["c"])
        if kind == "sis":
            return make_sis_complete_model(spec["beta"], spec["gamma"])
        if kind == "polynomial":
            return make_polynomial_model(spec["A"], spec["C"])
    except KeyError as exc:
        raise InvalidParameterError(f"model kind {kind!r} is missing parameter {exc}") from None
    except TypeError as exc:
        raise InvalidParameterError(f"bad parameter for model kind {kind!r}: {exc}") from None
    raise InvalidParameterError(f"unknown model kind {kind!r}")


@dataclass(frozen=True, eq=False)
class DiscreteChain:
    """Rates of the finite chain; ``a[k]`` moves k -> k+1, ``c[k]`` moves k -> k-1."""

    N: int
    a: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        c = np.array(self.c, dtype=float)
        if a.shape != (self.N + 1,) or c.shape != (self.N + 1,):
            raise InvalidParameterError("rate arrays must have length N + 1")
        if a[-1] != 0.0 or c[0] != 0.0:
            raise ModelViolationError("a_N and c_0 must both be zero")
        if np.any(a < 0) or np.any(c < 0):
            k = int(np.flatnonzero((a < 0) | (c < 0))[0])
            raise ModelViolationError(f"negative rate at state {k}")
        a.flags.writeable = False
        c.flags.writeable = False
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "c", c)

    @property
    def max_exit_rate(self):
        return float(np.max(self.a + self.c))


def build_chain(model, N):
    """Evaluate ``a_k = N A(k/N)`` and ``c_k = N C(k/N)`` for ``k = 0..N``."""
    if int(N) != N or N < 2:
        raise InvalidParameterError(f"N must be an integer >= 2, got {N!r}")
    N = int(N)
    z = np.arange(N + 1) / N
    a = N * model.A(z)
    c = N * model.C(z)
    # A(1) = 0 = C(0) hold exactly in exact arithmetic; remove Horner round-off
    a[-1] = 0.0
    c[0] = 0.0
    tol = _SIGN_TOL * N * max(1.0, np.max(np.abs(a)), np.max(np.abs(c)))
    if np.any(a < -tol) or np.any(c < -tol):
        k = int(np.flatnonzero((a < -tol) | (c < -tol))[0])
        raise ModelViolationError(f"negative rate at state {k} (z={z[k]:.6g})")
    return DiscreteChain(N, np.maximum(a, 0.0), np.maximum(c, 0.0))


@dataclass
class AssumptionReport:
    has_unique_root: bool
    z_star: float | None
    stability_ok: bool
    positivity_ok: bool
    nonnegative_ok: bool = True
    min_diffusion: float = float("nan")
    messages: list = field(default_factory=list)

    @property
    def ok(self):
        return (
            self.has_unique_root and self.stability_ok and self.positivity_ok and self.nonnegative_ok
        )

    def to_dict(self):
        return {
            "ok": self.ok,
            "has_unique_root": self.has_unique_root,
            "z_star": self.z_star,
            "stability_ok": self.stability_ok,
            "positivity_ok": self.positivity_ok,
            "nonnegative_ok": self.nonnegative_ok,
            "min_A_plus_C": self.min_diffusion,
            "messages": list(self.messages),
        }


def bisect_root(f, lo, hi):
    """Bisection on a bracketing interval, run until the bracket cannot be
    split in floating point (width of one ulp, far below 1e-12)."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise InvalidParameterError(f"[{lo}, {hi}] does not bracket a root")
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    return lo if abs(flo) <= abs(fhi) else hi


def validate_assumptions(model, grid_size=VALIDATION_GRID):
    """Check that ``A - C`` has a single stable root in ``[0, 1]`` and ``A + C > 0``.

    Violations are reported in the returned :class:`AssumptionReport`, never
    raised. Root uniqueness is decided on a uniform grid followed by
    bisection, so roots closer together than the grid spacing can be missed;
    tangential zeros are reported as uncertified.
    """
    if grid_size < 100:
        raise InvalidParameterError("grid_size must be at least 100")
    z = np.linspace(0.0, 1.0, int(grid_size))
    h = model.drift(z)
    s = model.diffusion(z)
    scale = max(1.0, float(np.max(np.abs(s))))
    messages = []

    nonneg = bool(np.min(model.A(z)) >= -_SIGN_TOL * scale and np.min(model.C(z)) >= -_SIGN_TOL * scale)
    if not nonneg:
        messages.append("A or C takes negative values on [0, 1]")

    min_s = float(np.min(s))
    positivity_ok = min_s > 0.0
    if not positivity_ok:
        messages.append(f"A + C is not positive on [0, 1] (min {min_s:.6g})")

    roots = [float(z[i]) for i in np.flatnonzero(h == 0.0)]
    sign_change = np.flatnonzero(h[:-1] * h[1:] < 0)
    roots += [bisect_root(model.drift, z[i], z[i + 1]) for i in sign_change]
    roots = sorted(roots)

    # near-zeros with no sign change are tangential candidates
    tangential = False
    near = np.flatnonzero(np.abs(h) <= 1e-10 * scale)
    for i in near:
        if not any(abs(z[i] - r) <= 1.0 / (grid_size - 1) for r in roots):
            tangential = True

    has_unique = len(roots) == 1 and not tangential
    z_star = roots[0] if has_unique else None
    if tangential:
        messages.append("unique root not certified: A - C touches zero without changing sign")
    elif len(roots) == 0:
        messages.append("A - C has no root in [0, 1]")
    elif len(roots) > 1:
        shown = ", ".join(f"{r:.6g}" for r in roots)
        messages.append(f"A - C has no unique root in [0, 1]: roots at {shown}")

    stability_ok = False
    if z_star is not None:
        slope = float(model.dA(z_star) - model.dC(z_star))
        stability_ok = slope < 0.0
        if not stability_ok:
            messages.append(f"A'(z*) - C'(z*) = {slope:.6g} is not negative")
    return AssumptionReport(
        has_unique_root=has_unique,
        z_star=z_star,
        stability_ok=stability_ok,
        positivity_ok=positivity_ok,
        nonnegative_ok=nonneg,
        min_diffusion=min_s,
        messages=messages,
    )
