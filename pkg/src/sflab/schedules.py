"""Hyperparameter laws for the three-sequence schedule-free iteration.

A :class:`Schedule` bundles the step-size law ``eta_t``, the averaging
weight law ``c_{t+1}`` and the interpolation coefficient ``beta_t`` as
pure, total functions of the step index ``t >= 0``.  Optimizers, the
potential tracker and the worst-case SDP builders all read their
hyperparameters from this one place so that no two components can
disagree about indexing.

Indexing convention: ``c(t)`` returns the weight used in the update that
produces ``x_{t+1}``, i.e. what the update rule calls ``c_{t+1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigError

__all__ = [
    "ConstantStep",
    "LinearGrowthStep",
    "UniformAvg",
    "PolyDecreasingAvg",
    "PolyIncreasingAvg",
    "Schedule",
]


@dataclass(frozen=True)
class ConstantStep:
    """eta_t = eta for all t."""

    eta: float

    def __call__(self, t: int) -> float:
        return self.eta


@dataclass(frozen=True)
class LinearGrowthStep:
    """eta_t = eta0 * (t + 1)."""

    eta0: float

    def __call__(self, t: int) -> float:
        return self.eta0 * (t + 1)


@dataclass(frozen=True)
class UniformAvg:
    """c_{t+1} = 1 / (t + 1): plain arithmetic averaging of the fast sequence."""

    def __call__(self, t: int) -> float:
        return 1.0 / (t + 1)


@dataclass(frozen=True)
class PolyDecreasingAvg:
    """c_{t+1} = (t + 1) ** (-alpha), alpha >= 0.

    alpha = 1 reproduces :class:`UniformAvg`; alpha = 0 keeps c = 1
    (no averaging, the slow sequence tracks the fast one exactly).
    alpha > 1 is admitted: the descent machinery still applies, only the
    quantitative rate degenerates to a constant.
    """

    alpha: float

    def __call__(self, t: int) -> float:
        # exact at the canonical exponents (pow can be off by an ulp)
        if self.alpha == 1.0:
            return 1.0 / (t + 1)
        if self.alpha == 0.0:
            return 1.0
        return float((t + 1.0) ** (-self.alpha))


@dataclass(frozen=True)
class PolyIncreasingAvg:
    """c_{t+1} = (t / (t + 1)) ** alpha, alpha in [0, 1).

    c starts at 0 for alpha > 0 (the first update leaves x in place) and
    increases toward 1.  alpha >= 1 is rejected unless the schedule is
    built with ``unsafe=True``: for such alpha the one-step descent
    certificate provably fails, so runs would be unverifiable.
    """

    alpha: float

    def __call__(self, t: int) -> float:
        if t == 0:
            # 0**0 = 1 by convention, so alpha = 0 gives c = 1 here too.
            return 1.0 if self.alpha == 0 else 0.0
        if self.alpha == 0.0:
            return 1.0
        if self.alpha == 1.0:
            return t / (t + 1.0)
        return float((t / (t + 1.0)) ** self.alpha)


StepLaw = ConstantStep | LinearGrowthStep
AvgLaw = UniformAvg | PolyDecreasingAvg | PolyIncreasingAvg

_STEP_KINDS = {"constant": ConstantStep, "linear_growth": LinearGrowthStep}
_AVG_KINDS = {
    "uniform": UniformAvg,
    "poly_dec": PolyDecreasingAvg,
    "poly_inc": PolyIncreasingAvg,
}


@dataclass(frozen=True)
class Schedule:
    """Complete hyperparameter law for one run.

    ``L_bound`` records the smoothness constant the schedule was chosen
    against; ``lyapunov_ok(t)`` checks the one-step precondition
    ``L * eta_t * c_{t+1} <= 1`` against it.

    ``beta`` is constant in t.  Time-varying interpolation weights have
    no descent certificate here, so they are deliberately not
    representable.
    """

    step: StepLaw
    avg: AvgLaw
    beta: float = 1.0
    L_bound: float = 1.0
    unsafe: bool = field(default=False, compare=False)

    def __post_init__(self) -> None:
        if isinstance(self.step, ConstantStep):
            if not self.step.eta > 0:
                raise ConfigError(f"constant step size must be positive, got {self.step.eta}")
        elif isinstance(self.step, LinearGrowthStep):
            if not self.step.eta0 > 0:
                raise ConfigError(f"base step size must be positive, got {self.step.eta0}")
        else:
            raise ConfigError(f"unknown step law {self.step!r}")
        if isinstance(self.avg, PolyDecreasingAvg):
            if not self.avg.alpha >= 0:
                raise ConfigError(f"decreasing-averaging exponent must be >= 0, got {self.avg.alpha}")
        elif isinstance(self.avg, PolyIncreasingAvg):
            ok = 0 <= self.avg.alpha < 1
            if not ok and not self.unsafe:
                raise ConfigError(
                    f"increasing-averaging exponent must lie in [0, 1), got {self.avg.alpha}; "
                    "no descent certificate exists for alpha >= 1 "
                    "(pass unsafe=True / --unsafe-schedule to explore anyway)"
                )
        elif not isinstance(self.avg, UniformAvg):
            raise ConfigError(f"unknown averaging law {self.avg!r}")
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError(f"beta must lie in [0, 1], got {self.beta}")
        if not self.L_bound > 0:
            raise ConfigError(f"L_bound must be positive, got {self.L_bound}")

    # -- the three laws -------------------------------------------------

    def eta(self, t: int) -> float:
        """Step size eta_t used in the fast-sequence update at step t."""
        return self.step(t)

    def c(self, t: int) -> float:
        """Averaging weight c_{t+1} applied when forming x_{t+1}."""
        return self.avg(t)

    def beta_at(self, t: int) -> float:
        """Interpolation coefficient beta_t (constant law)."""
        return self.beta

    # -- helpers ---------------------------------------------------------

    def lyapunov_ok(self, t: int, L: float | None = None, slack: float = 1e-12) -> bool:
        """True when L * eta_t * c_{t+1} <= 1 at step t (within float slack)."""
        L = self.L_bound if L is None else L
        return L * self.eta(t) * self.c(t) <= 1.0 + slack

    # -- JSON round-trip (run-config wire format) ------------------------

    def to_config(self) -> dict:
        if isinstance(self.step, ConstantStep):
            step = {"kind": "constant", "eta": self.step.eta}
        else:
            step = {"kind": "linear_growth", "eta0": self.step.eta0}
        if isinstance(self.avg, UniformAvg):
            avg: dict = {"kind": "uniform"}
        elif isinstance(self.avg, PolyDecreasingAvg):
            avg = {"kind": "poly_dec", "alpha": self.avg.alpha}
        else:
            avg = {"kind": "poly_inc", "alpha": self.avg.alpha}
        return {"step": step, "avg": avg, "beta": self.beta, "L_bound": self.L_bound}

    @classmethod
    def from_config(cls, cfg: dict, unsafe: bool = False) -> "Schedule":
        try:
            step_cfg = dict(cfg["step"])
            avg_cfg = dict(cfg["avg"])
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"schedule config needs 'step' and 'avg' objects: {cfg!r}") from exc
        step_kind = step_cfg.pop("kind", None)
        if step_kind not in _STEP_KINDS:
            raise ConfigError(f"unknown step kind {step_kind!r}")
        avg_kind = avg_cfg.pop("kind", None)
        if avg_kind not in _AVG_KINDS:
            raise ConfigError(f"unknown averaging kind {avg_kind!r}")
        try:
            step = _STEP_KINDS[step_kind](**{k: float(v) for k, v in step_cfg.items()})
            avg = _AVG_KINDS[avg_kind](**{k: float(v) for k, v in avg_cfg.items()})
        except TypeError as exc:
            raise ConfigError(f"bad schedule parameters: {cfg!r}") from exc
        beta = float(cfg.get("beta", 1.0))
        L_bound = float(cfg.get("L_bound", 1.0))
        return cls(step=step, avg=avg, beta=beta, L_bound=L_bound, unsafe=unsafe)


def _self_check() -> None:
    s = Schedule(ConstantStep(0.5), UniformAvg(), beta=1.0, L_bound=1.0)
    assert s.eta(7) == 0.5
    assert s.c(1) == 0.5
    assert math.isclose(Schedule(LinearGrowthStep(0.1), UniformAvg()).eta(9), 1.0)


if __name__ == "__main__":
    _self_check()
    print("schedule laws ok")
