import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CUBIC, exact_binomial
from onestep.errors import InvalidParameterError, NumericalError, ReducibleChainError, StabilityError
from onestep.master import (
    Distribution,
    first_moment,
    generator_matrix,
    integrate_master,
    point_mass,
    stable_time_step,
    stationary_distribution,
)
from onestep.rates import (
    DiscreteChain,
    build_chain,
    make_linear_model,
    make_polynomial_model,
    make_sis_complete_model,
)


def test_generator_hand_assembly():
    G = generator_matrix(build_chain(make_linear_model(1, 1), 2))
    np.testing.assert_array_equal(G.diag, [-2, -2, -2])
    np.testing.assert_array_equal(
        G.to_dense(), [[-2.0, 1.0, 0.0], [2.0, -2.0, 2.0], [0.0, 1.0, -2.0]]
    )
    np.testing.assert_array_equal(G.column_sums(), [0, 0, 0])
    np.testing.assert_array_equal(G.apply(np.array([0.25, 0.5, 0.25])), [0, 0, 0])


@settings(max_examples=30, deadline=None)
@given(
    coeffs=st.lists(st.floats(0.0, 5.0), min_size=1, max_size=4),
    gamma=st.floats(0.01, 5.0),
    N=st.integers(2, 300),
)
def test_generator_columns_sum_to_zero(coeffs, gamma, N):
    # A = (1 - z) * poly(z) with nonnegative coefficients, C = gamma z
    A = np.polynomial.polynomial.polymul([1.0, -1.0], coeffs)
    ch = build_chain(make_polynomial_model(A, [0.0, gamma]), N)
    G = generator_matrix(ch)
    scale = max(1.0, ch.max_exit_rate)
    assert np.max(np.abs(G.column_sums())) <= 1e-13 * scale
    dense = G.to_dense()
    p = np.random.default_rng(N).random(N + 1)
    np.testing.assert_allclose(G.apply(p), dense @ p, rtol=1e-12, atol=1e-12 * scale)


def test_stationary_small_hand_case():
    p = stationary_distribution(build_chain(make_linear_model(1, 1), 2))
    np.testing.assert_allclose(p.p, [0.25, 0.5, 0.25], rtol=1e-15)


@pytest.mark.parametrize("a, c", [(1, 1), (2, 1), (10, 1), (1, 3)])
@pytest.mark.parametrize("N", [2, 10, 57, 200])
def test_stationary_is_binomial(a, c, N):
    p = stationary_distribution(build_chain(make_linear_model(a, c), N)).p
    ref = exact_binomial(N, a, c)
    assert np.max(np.abs(np.log(p) - np.log(ref))) <= 1e-12


def test_stationary_mode_lopsided_linear():
    p = stationary_distribution(build_chain(make_linear_model(10, 1), 50)).p
    assert int(np.argmax(p)) in (45, 46)


@pytest.mark.parametrize("N", [10, 100, 1000])
def test_stationary_is_null_vector(cubic, N):
    ch = build_chain(cubic, N)
    p = stationary_distribution(ch).p
    G = generator_matrix(ch)
    assert np.max(np.abs(G.apply(p))) <= 1e-10 * ch.max_exit_rate


def test_stationary_large_N_no_overflow():
    p = stationary_distribution(build_chain(make_linear_model(10, 1), 20000)).p
    assert np.all(np.isfinite(p))
    assert abs(p.sum() - 1.0) < 1e-12


def test_reducible_chain_names_index():
    with pytest.raises(ReducibleChainError) as info:
        stationary_distribution(build_chain(make_sis_complete_model(2, 1), 10))
    assert info.value.index == 0
    ch = DiscreteChain(3, [1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 1.0, 1.0])
    with pytest.raises(ReducibleChainError, match="a_1"):
        stationary_distribution(ch)
    ch = DiscreteChain(3, [1.0, 1.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0])
    with pytest.raises(ReducibleChainError, match="c_2") as info:
        stationary_distribution(ch)
    assert info.value.index == 2


def test_distribution_validation():
    with pytest.raises(InvalidParameterError):
        Distribution([0.5, 0.6])
    with pytest.raises(InvalidParameterError):
        Distribution([1.5, -0.5])
    with pytest.raises(InvalidParameterError):
        point_mass(4, 5)


def test_first_moment_examples():
    assert first_moment(point_mass(7, 7)) == 1.0
    assert first_moment(Distribution([0.25, 0.5, 0.25])) == 0.5
    for N in (10, 50):
        assert first_moment(Distribution(exact_binomial(N, 2, 1))) == pytest.approx(2 / 3, abs=1e-14)


def test_integrate_stationary_is_fixed_point():
    ch = build_chain(make_linear_model(2, 1), 40)
    p = stationary_distribution(ch)
    sol = integrate_master(ch, p, 3.0, stable_time_step(ch), record_every=10)
    assert np.max(np.abs(sol.p - p.p)) <= 1e-9
    assert np.max(np.abs(sol.m1 - 2 / 3)) <= 1e-9


def test_integrate_relaxes_to_binomial():
    N = 50
    ch = build_chain(make_linear_model(1, 1), N)
    sol = integrate_master(ch, point_mass(N, 0), 12.0, stable_time_step(ch), record_every=100)
    ref = stationary_distribution(ch).p
    tv = 0.5 * np.sum(np.abs(sol.final.p - ref))
    assert tv <= 1e-6
    masses = sol.p.sum(axis=1)
    np.testing.assert_allclose(masses, 1.0, atol=1e-12)
    assert sol.p.min() >= -1e-12
    assert sol.mass_drift <= 1e-9 * 12.0


def test_integrate_m1_matches_linear_ode():
    # for linear rates m1 obeys dm/dt = a - (a + c) m exactly
    N = 30
    ch = build_chain(make_linear_model(1, 1), N)
    sol = integrate_master(ch, point_mass(N, 0), 2.0, stable_time_step(ch))
    np.testing.assert_allclose(sol.m1, 0.5 * (1 - np.exp(-2 * sol.times)), atol=1e-10)


def test_integrate_stability_guard():
    ch = build_chain(make_linear_model(1, 1), 20)
    with pytest.raises(StabilityError):
        integrate_master(ch, point_mass(20, 0), 1.0, 2 * stable_time_step(ch))
    assert issubclass(StabilityError, NumericalError)


def test_integrate_rejects_mismatched_initial_state():
    ch = build_chain(make_linear_model(1, 1), 20)
    with pytest.raises(InvalidParameterError):
        integrate_master(ch, point_mass(10, 0), 1.0, 0.001)


def test_integrate_cubic_conserves_mass():
    ch = build_chain(make_polynomial_model(*CUBIC), 60)
    sol = integrate_master(ch, point_mass(60, 60), 4.0, stable_time_step(ch), record_every=7)
    np.testing.assert_allclose(sol.p.sum(axis=1), 1.0, atol=1e-12)
    assert sol.p.min() >= -1e-10
    assert sol.state_times[-1] == pytest.approx(4.0)
