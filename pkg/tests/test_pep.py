import numpy as np
import pytest

from grid_oracle import random_smooth_quadratic, witness_single_step_max
from sflab.errors import ConfigError
from sflab.pep import (
    PepSolverConfig,
    build,
    curve,
    dec_c,
    fitted_growth_sq,
    inc_c,
    lin_step_dist,
    lin_step_grad,
    solve,
)
from sflab.pep.build import interpolation_rows

CFG = PepSolverConfig()


def test_build_single_step_collapses_averaging():
    p = build(dec_c(1.0), 1, 1.0, 1.0)
    np.testing.assert_allclose(p.x_g[1], [-1.0, 0.0])  # x_1 = x_0 - (1/L) g_0
    np.testing.assert_allclose(p.z_g[1], p.x_g[1])
    assert p.gram_size == 2 and p.basis == ["x0", "g0", "g1"]


def test_build_linear_step_two_steps():
    p = build(lin_step_dist(), 2, 1.0, 1.0)
    np.testing.assert_allclose(p.z_g[2], [-1.0, -2.0, 0.0])      # (-1/L, -2/L)
    np.testing.assert_allclose(p.x_g[2], 0.5 * p.x_g[1] + 0.5 * p.z_g[2])
    assert p.metric == "last_dist_sq"


def test_build_validation():
    with pytest.raises(ConfigError):
        build(dec_c(1.0), -1, 1.0, 1.0)
    with pytest.raises(ConfigError):
        build(dec_c(1.0), 0, 1.0, 1.0)  # min window empty at n = 0
    with pytest.raises(ConfigError):
        build(inc_c(1.0), 3, 1.0, 1.0)
    with pytest.raises(ConfigError):
        build(dec_c(1.0), 2, 1.0, 1.0, metric="nope")


@pytest.mark.parametrize("function_class", ["smooth_nonconvex", "smooth_convex"])
def test_interpolation_rows_hold_on_concrete_instances(function_class):
    # data generated by an actual member of the class must satisfy
    # every pairwise constraint row: F @ f - <Q, G> >= 0
    rng = np.random.default_rng(5)
    problem = build(dec_c(0.5), 4, 1.0, 1.0, function_class=function_class)
    F, Q = interpolation_rows(problem)
    for _ in range(25):
        A, b = random_smooth_quadratic(4, 1.0, rng)
        if function_class == "smooth_convex":
            A = A @ A.T / np.linalg.norm(A, 2)  # PSD with norm <= L
        x = rng.standard_normal(4)
        z = x.copy()
        xs, gs, fs = [x.copy()], [A @ x + b], [0.5 * x @ A @ x + b @ x]
        for t in range(problem.n):
            z = z - problem.eta[t] * gs[-1]
            x = (1 - problem.c[t]) * x + problem.c[t] * z
            xs.append(x.copy())
            gs.append(A @ x + b)
            fs.append(0.5 * x @ A @ x + b @ x)
        G = np.array(gs) @ np.array(gs).T
        slack = F @ np.array(fs) - Q @ G.reshape(-1)
        assert float(slack.min()) >= -1e-9


def test_anchored_single_point_equals_descent_lemma_constant():
    for L, D in [(1.0, 1.0), (2.0, 0.5)]:
        prob = build(dec_c(1.0), 0, L, D, metric="last_grad_sq",
                     initial_cond="optimum_anchored")
        cert = solve(prob, CFG)
        assert cert.status == "optimal"
        assert cert.value == pytest.approx(2 * L * D, abs=1e-6)


def test_final_iterate_single_point_is_unbounded():
    prob = build(dec_c(1.0), 0, 1.0, 1.0, metric="last_grad_sq")
    cert = solve(prob, CFG)
    assert cert.status == "unbounded" and cert.value is None


def test_single_step_matches_grid_search_witness():
    cert = solve(build(dec_c(1.0), 1, 1.0, 1.0), CFG)
    oracle = witness_single_step_max(1.0, 1.0, 1.0)
    assert cert.status == "optimal"
    assert abs(cert.value - oracle) / oracle <= 1e-4


def test_value_monotone_and_linear_in_budget():
    for n in (1, 2, 3):
        values = {}
        for D in (0.5, 1.0, 2.0):
            cert = solve(build(dec_c(1.0), n, 1.0, D), CFG)
            assert cert.status == "optimal"
            values[D] = cert.value
        assert values[0.5] <= values[1.0] + 1e-5
        assert values[1.0] <= values[2.0] + 1e-5
        assert values[2.0] == pytest.approx(2 * values[1.0], rel=1e-5)
        assert values[1.0] == pytest.approx(2 * values[0.5], rel=1e-5)


def test_min_metric_value_nonincreasing_in_horizon():
    prev = None
    for n in range(1, 11):
        cert = solve(build(dec_c(1.0), n, 1.0, 1.0), CFG)
        assert cert.status == "optimal"
        if prev is not None:
            assert cert.value <= prev + 1e-6
        prev = cert.value


@pytest.mark.parametrize("n", [2, 5])
def test_convex_class_no_worse_than_smooth_class(n):
    nc = solve(build(dec_c(1.0), n, 1.0, 1.0), CFG)
    cv = solve(build(dec_c(1.0), n, 1.0, 1.0, function_class="smooth_convex"), CFG)
    assert nc.status == "optimal" and cv.status == "optimal"
    assert cv.value <= nc.value + 1e-6


def test_increasing_alpha_zero_equals_decreasing_alpha_zero():
    for n in (1, 2, 3):
        a = solve(build(dec_c(0.0), n, 1.0, 1.0), CFG)
        b = solve(build(inc_c(0.0), n, 1.0, 1.0), CFG)
        assert a.value == pytest.approx(b.value, rel=1e-7, abs=1e-9)


def test_distance_metric_zero_at_first_step():
    cert = solve(build(lin_step_dist(), 1, 1.0, 1.0), CFG)
    assert cert.status == "optimal"
    assert cert.value == pytest.approx(0.0, abs=1e-8)


def test_growing_steps_eventually_unbounded():
    # with eta_t = (t+1)/L single steps can increase the objective value,
    # and from n = 10 the worst case certifiably diverges: scaling any
    # witness with f_0 - f_n <= 0 and nonzero window gradients blows up
    # the metric while staying feasible
    cert = solve(build(lin_step_grad(), 12, 1.0, 1.0), CFG)
    assert cert.status == "unbounded"


def test_certificate_gap_contract():
    for n in (1, 3, 6):
        cert = solve(build(dec_c(0.5), n, 1.0, 1.0), CFG)
        assert cert.status == "optimal"
        assert cert.gap <= 1e-6 * max(1.0, cert.value)


def test_max_metric_at_least_min_metric():
    lo = solve(build(dec_c(1.0), 3, 1.0, 1.0, metric="min_grad_sq"), CFG)
    hi = solve(build(dec_c(1.0), 3, 1.0, 1.0, metric="max_grad_sq"), CFG)
    assert hi.value >= lo.value - 1e-8


def test_curve_weights_and_partial_failure():
    points = curve(dec_c(1.0), 3, 1.0, 1.0, config=CFG, workers=1)
    assert [p.t for p in points] == [1, 2, 3]
    for p in points:
        assert p.weighted == pytest.approx(p.tau * p.t ** 0.0)  # alpha = 1 figure weight
    pts_inc = curve(inc_c(0.5), 3, 1.0, 1.0, config=CFG, workers=1)
    assert pts_inc[0].tau is None and pts_inc[0].status == "unbounded"
    assert pts_inc[1].weighted is None  # emitted only from t = 3
    assert pts_inc[2].weighted is not None
    growth = fitted_growth_sq([p for p in points])
    assert growth == pytest.approx(max(p.tau / (p.t + 1) for p in points))


def test_curve_respects_configured_limit():
    with pytest.raises(ConfigError):
        curve(dec_c(1.0), 40, 1.0, 1.0, config=PepSolverConfig(max_n=30), workers=1)


def test_solver_config_keys():
    cfg = PepSolverConfig.from_config({"pep": {"solver": "scs", "tol": 1e-7, "max_n": 12}})
    assert cfg == PepSolverConfig(solver="SCS", tol=1e-7, max_n=12)
    assert PepSolverConfig.from_config(None) == PepSolverConfig()
