from fractions import Fraction
from math import comb

import numpy as np
import pytest

from onestep.rates import make_linear_model, make_polynomial_model


def exact_binomial(N, a, c):
    """Binomial(N, a/(a+c)) pmf computed in rational arithmetic, rounded once."""
    p = Fraction(a) / (Fraction(a) + Fraction(c))
    return np.array([float(comb(N, k) * p**k * (1 - p) ** (N - k)) for k in range(N + 1)])


# A = (1 - z)(1 + 0.3 z^2), C = z
CUBIC = ([1.0, -1.0, 0.3, -0.3], [0.0, 1.0])


@pytest.fixture
def cubic():
    return make_polynomial_model(*CUBIC)


VALID_MODELS = {
    "linear-1-1": lambda: make_linear_model(1, 1),
    "linear-2-1": lambda: make_linear_model(2, 1),
    "linear-10-1": lambda: make_linear_model(10, 1),
    "linear-1-3": lambda: make_linear_model(1, 3),
    "cubic": lambda: make_polynomial_model(*CUBIC),
    # A = 2(1 - z)(1 + z), C = z + z^2
    "quadratic": lambda: make_polynomial_model([2.0, 0.0, -2.0], [0.0, 1.0, 1.0]),
}


@pytest.fixture(params=sorted(VALID_MODELS))
def valid_model(request):
    return VALID_MODELS[request.param]()


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
