"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline;
they are also repeated in the terminal summary.
"""

import csv
import io
import time

import numpy as np
import pytest

from onestep.analysis import (
    check_exp_inequality,
    check_rR_bounds,
    empirical_order,
    k_scaling,
    mean_field_gap,
    sweep,
)
from onestep.cli import main
from onestep.fokkerplanck import compute_B, fp_discretization_matrix, lattice_grid, steady_state_v
from onestep.master import generator_matrix, stationary_distribution
from onestep.meanfield import equilibrium
from onestep.ouapprox import curvature_q, steady_state_w, symmetric_linear_U
from onestep.rates import build_chain, make_linear_model, make_polynomial_model

from conftest import VALID_MODELS, exact_binomial

RESULTS = []


def report(number, name, passed, detail, elapsed, budget):
    ok = passed and elapsed < budget
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {name}: {detail}; {elapsed:.2f}s (< {budget:g}s)"
    RESULTS.append(line)
    print(line)
    assert passed, line
    assert elapsed < budget, line


def test_criterion_1_binomial_oracle():
    t0 = time.perf_counter()
    worst = 0.0
    for a, c in [(1, 1), (2, 1), (10, 1)]:
        for N in (10, 50, 200):
            p = stationary_distribution(build_chain(make_linear_model(a, c), N)).p
            ref = exact_binomial(N, a, c)
            worst = max(worst, float(np.max(np.abs(p - ref) / ref)))
    report(1, "binomial oracle", worst <= 1e-12, f"max rel err {worst:.2e} <= 1e-12", time.perf_counter() - t0, 1)


def test_criterion_2_discretization_identity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(20):
        A = np.polynomial.polynomial.polymul([1.0, -1.0], rng.uniform(0.1, 5.0, rng.integers(1, 4)))
        C = np.polynomial.polynomial.polymul([0.0, 1.0], rng.uniform(0.1, 5.0, rng.integers(1, 4)))
        model = make_polynomial_model(A, C)
        for N in (10, 100, 1000):
            chain = build_chain(model, N)
            F, G = fp_discretization_matrix(chain), generator_matrix(chain)
            for x, y in ((F.sub, G.sub), (F.diag, G.diag), (F.sup, G.sup)):
                scale = np.maximum(np.abs(y), np.finfo(float).tiny)
                nz = (x != 0) | (y != 0)
                if nz.any():
                    worst = max(worst, float(np.max(np.abs(x - y)[nz] / scale[nz])))
    report(2, "discretization identity", worst <= 1e-13, f"max rel diff {worst:.2e} <= 1e-13",
           time.perf_counter() - t0, 1)


def test_criterion_3_symmetric_binomial_vs_U():
    t0 = time.perf_counter()
    N = 50
    p = stationary_distribution(build_chain(make_linear_model(1, 1), N)).p
    err = float(np.max(np.abs(p - symmetric_linear_U(N).values)))
    report(3, "Binom(50,1/2) vs U", err <= 2e-3, f"sup err {err:.3e} <= 2e-3", time.perf_counter() - t0, 1)


def test_criterion_4_symmetric_exactness():
    t0 = time.perf_counter()
    worst = 0.0
    for N in (50, 500):
        m = make_linear_model(1, 1)
        v = steady_state_v(m, N, lattice_grid(N, 10))
        w = steady_state_w(m, N, v.K, v.grid)
        worst = max(worst, float(np.max(np.abs(v.values - w.values))))
    report(4, "a = c gives v = w", worst <= 1e-8, f"sup|v-w| {worst:.2e} <= 1e-8", time.perf_counter() - t0, 5)


@pytest.fixture(scope="module")
def linear_sweep():
    t0 = time.perf_counter()
    Ns = [100 * 2**j for j in range(7)]
    points = sweep(make_linear_model(2, 1), Ns)
    return points, time.perf_counter() - t0


def test_criterion_5_empirical_rate(linear_sweep):
    points, elapsed = linear_sweep
    t0 = time.perf_counter()
    rep = empirical_order(make_linear_model(2, 1), [p.N for p in points], points=points)
    errs = rep.errors
    decreasing = all(b < a for a, b in zip(errs, errs[1:]))
    passed = decreasing and rep.fitted_slope <= -0.75 and rep.r_squared >= 0.98
    detail = f"decreasing={decreasing}, slope {rep.fitted_slope:.4f} <= -0.75, r2 {rep.r_squared:.6f} >= 0.98"
    report(5, "sup|v-w| order", passed, detail, elapsed + time.perf_counter() - t0, 60)


def test_criterion_6_K_scaling(linear_sweep):
    points, elapsed = linear_sweep
    t0 = time.perf_counter()
    rep = k_scaling(make_linear_model(2, 1), None, points=points)
    passed = -1.6 <= rep.fitted_slope <= -1.4
    report(6, "K scaling", passed, f"slope {rep.fitted_slope:.5f} in [-1.6, -1.4]",
           elapsed + time.perf_counter() - t0, 60)


def test_criterion_7_mean_field_law():
    t0 = time.perf_counter()
    m = make_linear_model(2, 1)
    gaps = [mean_field_gap(m, N, 5.0, k0=0, y0=0.0) for N in (100, 200, 400, 800)]
    ratios = [b / a if a > 0 else float("inf") for a, b in zip(gaps, gaps[1:])]
    passed = all(0.35 <= r <= 0.65 for r in ratios)
    detail = "gaps " + ", ".join(f"{g:.2e}" for g in gaps) + "; ratios " + ", ".join(f"{r:.3f}" for r in ratios)
    report(7, "mean-field 1/N law", passed, detail + " in [0.35, 0.65]", time.perf_counter() - t0, 30)


def test_criterion_8_property_suite():
    t0 = time.perf_counter()
    ok_exp = bool(check_exp_inequality(100_000, seed=0))
    ok_rR, ok_B = True, True
    rng = np.random.default_rng(8)
    for make in VALID_MODELS.values():
        model = make()
        z_star = equilibrium(model)
        q = curvature_q(model, z_star)
        r, R = check_rR_bounds(model)
        ok_rR &= R < 0 and r <= q <= R
        z = rng.uniform(0, 1, 200)
        z = z[z != z_star]
        ok_B &= compute_B(model, z_star, z_star) == 0 and bool(np.all(compute_B(model, z_star, z) < 0))
    passed = ok_exp and ok_rR and ok_B
    report(8, "property suite", passed, f"exp inequality {ok_exp}, r <= q <= R < 0 {ok_rR}, B sign {ok_B}",
           time.perf_counter() - t0, 5)


def _unimodal(x):
    d = np.sign(np.diff(x))
    d = d[d != 0]
    return np.count_nonzero(np.diff(d)) == 1


def test_criterion_9_lopsided_linear_dataset(capsys):
    t0 = time.perf_counter()
    a, c, N = 10.0, 1.0, 50
    code = main(["steady", "--model", "linear", "--a", "10", "--c", "1", "--N", "50"])
    out = capsys.readouterr().out
    rows = list(csv.DictReader(io.StringIO(out)))
    z = np.array([float(r["z"]) for r in rows])
    v = np.array([float(r["v"]) for r in rows])
    w = np.array([float(r["w"]) for r in rows])
    has_p = all("p_exact" in r for r in rows)
    z_star = a / (a + c)
    target = z[np.argmin(np.abs(z - z_star))]
    v_mode, w_mode = z[np.argmax(v)], z[np.argmax(w)]
    m = make_linear_model(a, c)
    vs = steady_state_v(m, N, [z_star])
    ws = steady_state_w(m, N, vs.K, [z_star])
    peak_rel = abs(vs.values[0] - ws.values[0]) / vs.values[0]
    passed = (
        code == 0 and has_p and len(rows) == N + 1
        and _unimodal(v) and _unimodal(w)
        and v_mode == target and w_mode == target
        and peak_rel <= 4 * np.finfo(float).eps
    )
    detail = (f"v mode {v_mode:.2f}, w mode {w_mode:.2f}, nearest grid point {target:.2f}, "
              f"unimodal v={_unimodal(v)} w={_unimodal(w)}, |w(z*)-v(z*)|/v(z*) {peak_rel:.1e}")
    with capsys.disabled():
        report(9, "lopsided linear dataset", passed, detail, time.perf_counter() - t0, 1)
