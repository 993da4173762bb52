import math

import mpmath
import numpy as np
import pytest

from sflab.errors import ConfigError, UndefinedCoefficientError
from sflab.lyapunov import (
    A_coeff,
    bound,
    claim2_margins,
    claim3_margins,
    delta_coeff,
    linear_growth_residual_coeff,
    potential,
)
from sflab.optimizers import run_sf, run_sgdm, sgdm_params_from_spa
from sflab.problems import NoiseModel, nonconvex_cos, quad
from sflab.schedules import (
    ConstantStep,
    LinearGrowthStep,
    PolyDecreasingAvg,
    PolyIncreasingAvg,
    Schedule,
    UniformAvg,
)

UNIF_HALF = Schedule(ConstantStep(0.5), UniformAvg(), L_bound=1.0)


def test_A_coeff_hand_values():
    assert A_coeff(UNIF_HALF, 1, 1.0) == pytest.approx(1.5)          # c_2 = 1/2
    assert A_coeff(UNIF_HALF, 2, 1.0) == pytest.approx(0.625)        # c_3 = 1/3
    with pytest.raises(UndefinedCoefficientError):
        A_coeff(UNIF_HALF, 0, 1.0)                                    # c_1 = 1


def test_A_coeff_vanishes_when_step_saturates():
    sched = Schedule(LinearGrowthStep(0.25), UniformAvg(), L_bound=4.0)
    for t in range(1, 50):
        assert A_coeff(sched, t, 4.0) == pytest.approx(0.0, abs=1e-15)


def test_A_coeff_against_high_precision_rederivation():
    # independent second implementation of the coefficient formula,
    # evaluated at 50 digits from the same (c, eta, L) inputs
    mpmath.mp.dps = 50
    rng = np.random.default_rng(2024)
    laws = [UniformAvg(), PolyDecreasingAvg(0.5), PolyDecreasingAvg(1.5),
            PolyIncreasingAvg(0.3), PolyIncreasingAvg(0.9)]
    for _ in range(200):
        law = laws[rng.integers(len(laws))]
        eta = float(rng.uniform(0.05, 1.0))
        L = float(rng.uniform(0.5, 1.0 / eta))
        t = int(rng.integers(1, 10_000))
        sched = Schedule(ConstantStep(eta), law, L_bound=L)
        c = sched.c(t)
        if c >= 1.0:
            continue
        cm, em, Lm = mpmath.mpf(c), mpmath.mpf(eta), mpmath.mpf(L)
        ref = cm * (1 - Lm * em * cm) / (2 * em * (1 - cm) ** 2)
        got = A_coeff(sched, t, L)
        assert abs(got - float(ref)) <= 1e-14 * max(1.0, abs(float(ref)))


def test_delta_coeff_uniform_unit_step_closed_form():
    # with eta = 1/L the bracket reduces to ((L*eta-3)t + (L*eta+1)) /
    # (2 eta (t+1)(t-1)^2), negative for every t >= 2
    L, eta = 2.0, 0.5
    sched = Schedule(ConstantStep(eta), UniformAvg(), L_bound=L)
    for t in [2, 3, 5, 17, 100, 1234, 10_000]:
        expected = ((L * eta - 3) * t + (L * eta + 1)) / (2 * eta * (t + 1) * (t - 1) ** 2)
        got = delta_coeff(sched, t, L)
        assert got == pytest.approx(expected, rel=1e-12)
        assert got < 0


def test_delta_coeff_negative_for_decreasing_families():
    for alpha in (0.01, 0.1, 0.5, 1.0):
        sched = Schedule(ConstantStep(0.5), PolyDecreasingAvg(alpha), L_bound=2.0)
        values = [delta_coeff(sched, t, 2.0) for t in range(2, 10_001)]
        assert max(values) <= 0.0


def test_delta_coeff_alpha_zero_has_no_certificate():
    # constant-one averaging keeps c_t = 1, where the bracket's middle
    # term is undefined; the certificate simply does not apply
    sched = Schedule(ConstantStep(0.5), PolyDecreasingAvg(0.0), L_bound=2.0)
    with pytest.raises(UndefinedCoefficientError):
        delta_coeff(sched, 5, 2.0)


def test_delta_coeff_increasing_family():
    for alpha in (0.1, 0.5, 0.9):
        sched = Schedule(ConstantStep(0.5), PolyIncreasingAvg(alpha), L_bound=2.0)
        values = [delta_coeff(sched, t, 2.0) for t in range(2, 10_001)]
        assert max(values) <= 1e-15


def test_delta_coeff_increasing_family_above_one_is_uncertified():
    # exponents >= 1 lack a uniform certificate: the bracket is positive
    # at early steps for steep exponents (so the family is excluded from
    # the safe schedules), even though it turns negative again later
    sched = Schedule(ConstantStep(0.5), PolyIncreasingAvg(2.0), unsafe=True, L_bound=2.0)
    assert delta_coeff(sched, 2, 2.0) > 0
    assert delta_coeff(sched, 10, 2.0) < 0
    sched3 = Schedule(ConstantStep(0.5), PolyIncreasingAvg(3.0), unsafe=True, L_bound=2.0)
    assert delta_coeff(sched3, 2, 2.0) > 0 and delta_coeff(sched3, 3, 2.0) > 0


def test_potential_hand_value_and_residuals():
    p = quad(dim=1, L=1.0)
    traj = run_sf(p, NoiseModel(), UNIF_HALF, np.array([1.0]), 50)
    trace = potential(traj, p)
    assert trace.V2 == pytest.approx(0.080078125)
    res = trace.descent_residual[2:49]
    assert np.nanmax(res) <= 1e-10
    # V nonincreasing from t = 2 on
    V = trace.V[2:]
    assert np.all(np.diff(V) <= 1e-12)


def test_potential_zero_discrepancy_degenerates_to_value_gap():
    p = quad(dim=2, L=1.0)
    sched = Schedule(ConstantStep(0.9), PolyIncreasingAvg(0.0), L_bound=1.0)
    traj = run_sf(p, NoiseModel(), sched, np.ones(2), 20)
    assert np.all(traj.delta_norm_sq == 0.0)
    trace = potential(traj, p)
    np.testing.assert_allclose(trace.V[1:], traj.f_x[1:] - p.f_star)


@pytest.mark.parametrize("avg", [UniformAvg(), PolyDecreasingAvg(0.5), PolyIncreasingAvg(0.5)])
def test_potential_monotone_on_constant_step_runs(avg):
    p = nonconvex_cos(dim=3)
    sched = Schedule(ConstantStep(1.0 / p.L), avg, L_bound=p.L)
    traj = run_sf(p, NoiseModel(), sched, 0.8 * np.ones(3), 300)
    trace = potential(traj, p)
    V = trace.V[2:]
    assert np.all(np.diff(V) <= 1e-12)


def test_potential_requires_fast_sequence():
    p = quad(dim=1, L=1.0)
    params = sgdm_params_from_spa(UNIF_HALF, 10)
    traj = run_sgdm(p, NoiseModel(), params, np.ones(1), 10, schedule=UNIF_HALF)
    with pytest.raises(ConfigError):
        potential(traj, p)


def test_bound_values():
    rb = bound("T3", V2=0.08, schedule=UNIF_HALF, T=1000)
    assert rb.value == pytest.approx(4 * 0.08 / (0.5 * math.log(1000)))
    assert rb.value == pytest.approx(0.0926495, abs=1e-6)

    dec0 = Schedule(ConstantStep(0.5), PolyDecreasingAvg(0.0), L_bound=1.0)
    rb = bound("T5_dec", V2=0.08, schedule=dec0, T=1000)
    assert rb.value == pytest.approx(4 * 0.08 / (0.5 * (1000 - 2)))

    dec2 = Schedule(ConstantStep(0.5), PolyDecreasingAvg(2.0), L_bound=1.0)
    rb = bound("T5_dec", V2=0.08, schedule=dec2, T=1000)
    assert rb.value is None and rb.qualitative == "O(1)"

    inc0 = Schedule(ConstantStep(0.5), PolyIncreasingAvg(0.0), L_bound=1.0)
    rb = bound("T5_inc", V2=0.08, schedule=inc0, T=1000)
    assert rb.value == pytest.approx(4 * 0.08 / (0.5 * 1000 - 2 * 0.5))

    # uniform averaging is the alpha = 1 endpoint of the decreasing family
    rb_u = bound("T5_dec", V2=0.08, schedule=UNIF_HALF, T=1000)
    rb_3 = bound("T3", V2=0.08, schedule=UNIF_HALF, T=1000)
    assert rb_u.value == pytest.approx(rb_3.value)

    with pytest.raises(ConfigError):
        bound("T3", V2=0.08, schedule=UNIF_HALF, T=2)
    with pytest.raises(ConfigError):
        bound("T4", V2=0.08, schedule=UNIF_HALF, T=100, D=1.0)  # needs growing steps


def test_bound_includes_noise_floor():
    rb0 = bound("T3", V2=0.08, schedule=UNIF_HALF, T=1000, sigma2=0.0)
    rb1 = bound("T3", V2=0.08, schedule=UNIF_HALF, T=1000, sigma2=0.01)
    assert rb1.value == pytest.approx(rb0.value + 0.02)


def test_t4_leak_sum_matches_direct_quadrature():
    lin = Schedule(LinearGrowthStep(0.25), UniformAvg(), L_bound=4.0)
    T = 777
    rb = bound("T4", V2=0.3, schedule=lin, T=T, D=0.5)
    t = np.arange(2, T, dtype=float)
    direct = np.sum((4.0 * (t * t + t + 1) - (3 * t - 1))
                    / (2 * (t + 1) ** 2 * (t - 1) ** 2) * (t + 1))
    assert rb.params["leak_sum"] == pytest.approx(direct, rel=1e-12)
    assert rb.value == pytest.approx((4 * 0.3 + 4 * 0.25 * direct) / (0.25 * (T - 2)))
    with pytest.raises(UndefinedCoefficientError):
        linear_growth_residual_coeff(1, 1.0)


@pytest.mark.parametrize("beta", [0.0, 0.5, 0.9])
def test_gradient_relation_margins_beta_below_one(beta):
    p = nonconvex_cos(dim=3)
    sched = Schedule(ConstantStep(1.0 / p.L), UniformAvg(), beta=beta, L_bound=p.L)
    traj = run_sf(p, NoiseModel(), sched, 0.7 * np.ones(3), 200)
    assert float(np.min(claim2_margins(traj, p))) >= -1e-10
    assert float(np.min(claim3_margins(traj, p))) >= -1e-10
