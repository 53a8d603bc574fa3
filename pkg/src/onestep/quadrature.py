"""Adaptive Simpson quadrature for smooth scalar integrands."""

from __future__ import annotations

from .errors import NumericalError

__all__ = ["adaptive_simpson", "MAX_DEPTH"]

MAX_DEPTH = 40


def adaptive_simpson(f, a, b, tol=1e-12, max_depth=MAX_DEPTH, fa=None, fb=None):
    """Integrate ``f`` over ``[a, b]`` to absolute accuracy ``tol``.

    Each panel is accepted once its two-half Simpson estimate agrees with
    the whole-panel estimate to ``15 * tol`` and the Richardson-corrected
    value is returned. Endpoint values may be passed in to save evaluations.

    Raises
    ------
    NumericalError
        If a panel still fails the test after ``max_depth`` bisections.
    """
    if a == b:
        return 0.0
    if fa is None:
        fa = f(a)
    if fb is None:
        fb = f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _recurse(f, a, b, fa, fm, fb, whole, tol, max_depth)


def _recurse(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    h = (b - a) / 12.0
    left = h * (fa + 4.0 * flm + fm)
    right = h * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    if depth <= 0:
        raise NumericalError(
            f"adaptive Simpson did not converge on [{a!r}, {b!r}] "
            f"(|S2 - S1| = {abs(delta):.3g}, tol = {tol:.3g})"
        )
    return _recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + _recurse(
        f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1
    )
