import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sflab.errors import ConfigError
from sflab.schedules import (
    ConstantStep,
    LinearGrowthStep,
    PolyDecreasingAvg,
    PolyIncreasingAvg,
    Schedule,
    UniformAvg,
)


def test_step_law_values():
    s = Schedule(ConstantStep(0.5), UniformAvg())
    assert s.eta(7) == 0.5
    lin = Schedule(LinearGrowthStep(0.1), UniformAvg())
    assert lin.eta(0) == pytest.approx(0.1)
    assert lin.eta(9) == pytest.approx(1.0)  # eta0 * (t+1)


def test_averaging_law_values():
    assert Schedule(ConstantStep(0.5), UniformAvg()).c(1) == 0.5
    assert Schedule(ConstantStep(0.5), PolyDecreasingAvg(0.5)).c(3) == pytest.approx(0.5)  # 4^(-1/2)
    assert Schedule(ConstantStep(0.5), PolyIncreasingAvg(0.5)).c(0) == 0.0
    assert Schedule(ConstantStep(0.5), PolyIncreasingAvg(0.0)).c(0) == 1.0


def test_beta_law_values():
    assert Schedule(ConstantStep(0.5), UniformAvg(), beta=1.0).beta_at(5) == 1.0
    assert Schedule(ConstantStep(0.5), UniformAvg(), beta=0.9).beta_at(0) == 0.9
    assert Schedule(ConstantStep(0.5), UniformAvg(), beta=0.0).beta_at(3) == 0.0


def test_uniform_equals_poly_dec_one_everywhere():
    u = Schedule(ConstantStep(0.3), UniformAvg())
    p = Schedule(ConstantStep(0.3), PolyDecreasingAvg(1.0))
    for t in range(0, 10_001):
        assert u.c(t) == p.c(t)


@pytest.mark.parametrize("avg", [UniformAvg(), PolyDecreasingAvg(0.5), PolyDecreasingAvg(2.0),
                                 PolyIncreasingAvg(0.0), PolyIncreasingAvg(0.7)])
def test_descent_precondition_constant_step(avg):
    # eta <= 1/L makes L*eta_t*c_{t+1} <= 1 at every index for every law
    L = 2.0
    s = Schedule(ConstantStep(1.0 / L), avg, L_bound=L)
    t = np.arange(0, 10_001)
    c = np.array([s.c(int(k)) for k in t])
    assert np.all(L * s.eta(0) * c <= 1.0 + 1e-12)


def test_descent_precondition_linear_growth_uniform():
    L = 4.0
    s = Schedule(LinearGrowthStep(1.0 / L), UniformAvg(), L_bound=L)
    for t in range(0, 10_001):
        assert abs(L * s.eta(t) * s.c(t) - 1.0) < 1e-12


def test_c_monotone():
    dec = Schedule(ConstantStep(0.1), PolyDecreasingAvg(0.3))
    inc = Schedule(ConstantStep(0.1), PolyIncreasingAvg(0.3))
    for t in range(0, 10_000):
        assert dec.c(t + 1) <= dec.c(t) + 1e-15
        assert inc.c(t + 1) >= inc.c(t) - 1e-15


@given(alpha=st.floats(min_value=0.0, max_value=0.999), t=st.integers(min_value=0, max_value=10**6))
@settings(max_examples=200, deadline=None)
def test_c_in_unit_interval(alpha, t):
    dec = Schedule(ConstantStep(0.1), PolyDecreasingAvg(alpha))
    inc = Schedule(ConstantStep(0.1), PolyIncreasingAvg(alpha))
    assert 0.0 < dec.c(t) <= 1.0
    assert 0.0 <= inc.c(t) <= 1.0


def test_validation():
    with pytest.raises(ConfigError):
        Schedule(ConstantStep(0.0), UniformAvg())
    with pytest.raises(ConfigError):
        Schedule(ConstantStep(0.5), PolyDecreasingAvg(-0.1))
    with pytest.raises(ConfigError):
        Schedule(ConstantStep(0.5), PolyIncreasingAvg(1.0))
    with pytest.raises(ConfigError):
        Schedule(ConstantStep(0.5), UniformAvg(), beta=1.5)
    # the unsafe escape hatch admits uncertified exponents
    s = Schedule(ConstantStep(0.5), PolyIncreasingAvg(1.5), unsafe=True)
    assert s.c(3) == pytest.approx((3 / 4) ** 1.5)


def test_config_round_trip():
    cfg = {"step": {"kind": "constant", "eta": 0.5},
           "avg": {"kind": "poly_dec", "alpha": 1.0}, "beta": 1.0}
    s = Schedule.from_config(cfg)
    assert s.to_config()["step"] == {"kind": "constant", "eta": 0.5}
    assert Schedule.from_config(s.to_config()) == s
    lin = Schedule(LinearGrowthStep(0.25), PolyIncreasingAvg(0.5), beta=1.0, L_bound=2.0)
    assert Schedule.from_config(lin.to_config()) == lin
    with pytest.raises(ConfigError):
        Schedule.from_config({"step": {"kind": "cosine"}, "avg": {"kind": "uniform"}})
