"""Potential tracking and closed-form rate bounds along a trajectory.

The potential at step t is

    V_t = f(x_t) - f* + A_t ||delta_t||^2,      delta_t = z_t - x_t,
    A_t = c_{t+1} (1 - L eta_t c_{t+1}) / (2 eta_t (1 - c_{t+1})^2),

where c_{t+1} and eta_t are the schedule values at index t.  Under the
descent precondition L eta_t c_{t+1} <= 1 both summands are nonnegative.
A_t is undefined when c_{t+1} = 1; tracking therefore starts at t = 1
(uniform averaging has c_2 = 1/2), and at any step where c_{t+1} = 1 the
slow and fast sequences coincide exactly, so V_t degenerates to
f(x_t) - f*.

``descent_residual[t] = V_{t+1} - V_t + (c_{t+1} eta_t / 4) ||grad f(x_t)||^2
- (c_{t+1} eta_t / 2) sigma^2`` is the quantity the one-step descent
certificate drives below zero; ``delta_coeff`` evaluates the bracket
multiplying ||delta_t||^2 in that certificate, which is nonpositive for
every schedule family with a proven rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, UndefinedCoefficientError
from .optimizers import Trajectory
from .problems import Problem
from .schedules import (
    ConstantStep,
    LinearGrowthStep,
    PolyDecreasingAvg,
    PolyIncreasingAvg,
    Schedule,
    UniformAvg,
)

__all__ = [
    "A_coeff",
    "delta_coeff",
    "linear_growth_residual_coeff",
    "PotentialTrace",
    "potential",
    "RateBound",
    "bound",
    "claim1_max_residual",
    "claim2_margins",
    "claim3_margins",
]


def A_coeff(schedule: Schedule, t: int, L: float) -> float:
    """Potential coefficient A_t = c(1 - L eta c) / (2 eta (1-c)^2), c = c_{t+1}.

    Raises UndefinedCoefficientError when c_{t+1} = 1 (uniform averaging
    at t = 0, or a constant-one averaging law); callers start tracking
    at the first step where c_{t+1} < 1.
    """
    c = schedule.c(t)
    eta = schedule.eta(t)
    if c >= 1.0:
        raise UndefinedCoefficientError(
            f"A_t undefined at t={t}: averaging weight c_(t+1) = {c} makes (1-c)^2 vanish"
        )
    return c * (1.0 - L * eta * c) / (2.0 * eta * (1.0 - c) ** 2)


def delta_coeff(schedule: Schedule, t: int, L: float, beta: float | None = None) -> float:
    """Bracket multiplying ||delta_t||^2 in the one-step descent certificate.

    c_{t+1}/(2 eta_t) - c_t (1 - L eta_t c_t) / (2 eta_t (1 - c_t)^2)
    - (3 L^3 c_{t+1}^2 eta_t^2 / 2) (1-beta)^2
    + (5 L^2 c_{t+1} eta_t / 2) (1-beta)^2

    Needs t >= 2 so that c_t < 1 under uniform averaging.  A schedule's
    per-step descent is certified exactly when this is <= 0.
    """
    if t < 2:
        raise UndefinedCoefficientError(f"delta coefficient needs t >= 2, got t={t}")
    beta = schedule.beta_at(t) if beta is None else beta
    c1 = schedule.c(t)       # c_{t+1}
    c0 = schedule.c(t - 1)   # c_t
    eta = schedule.eta(t)
    if c0 >= 1.0:
        raise UndefinedCoefficientError(
            f"delta coefficient undefined at t={t}: c_t = {c0} makes (1-c_t)^2 vanish"
        )
    omb2 = (1.0 - beta) ** 2
    return (
        c1 / (2.0 * eta)
        - c0 * (1.0 - L * eta * c0) / (2.0 * eta * (1.0 - c0) ** 2)
        - 1.5 * L**3 * c1**2 * eta**2 * omb2
        + 2.5 * L**2 * c1 * eta * omb2
    )


def linear_growth_residual_coeff(t: int, L: float) -> float:
    """Per-step leak coefficient for the linearly growing step size.

    E(t) = (L (t^2 + t + 1) - (3t - 1)) / (2 (t+1)^2 (t-1)^2), valid for
    t >= 2 and L >= 1.  With eta_t = eta_0 (t+1), eta_0 <= 1/L and
    uniform averaging, the per-step descent satisfies

        (eta_0 / 4) ||grad f(x_t)||^2 <= V_t - V_{t+1} + E(t) ||delta_t||^2.
    """
    if t < 2:
        raise UndefinedCoefficientError(f"leak coefficient needs t >= 2, got t={t}")
    return (L * (t * t + t + 1.0) - (3.0 * t - 1.0)) / (2.0 * (t + 1.0) ** 2 * (t - 1.0) ** 2)


@dataclass
class PotentialTrace:
    """Per-step potential values along one trajectory.

    Arrays are indexed by t over [0, T]; entries outside the defined
    range hold NaN.  ``t_start`` is the first tracked index (1), while
    the rate bounds anchor at ``V2`` because the theorems' windows start
    at t = 2.
    """

    t_start: int
    A: np.ndarray                 # (T+1,)
    V: np.ndarray                 # (T+1,)
    descent_residual: np.ndarray  # (T+1,), defined on [t_start, T-1]
    delta_coeff: np.ndarray       # (T+1,), defined on [2, T]
    V2: float
    sigma2: float


def potential(traj: Trajectory, problem: Problem, sigma2: float | None = None) -> PotentialTrace:
    """Evaluate the potential, residuals and bracket values along a run."""
    if traj.zs is None:
        raise ConfigError("potential tracking needs the fast sequence; run the three-sequence form")
    if not math.isfinite(problem.f_star):
        raise ConfigError(f"problem '{problem.name}' has no finite infimum recorded")
    sigma2 = traj.sigma2 if sigma2 is None else sigma2
    sched = traj.schedule
    L = problem.L
    T = traj.T
    dsq = traj.delta_norm_sq

    A = np.full(T + 1, np.nan)
    V = np.full(T + 1, np.nan)
    dcoef = np.full(T + 1, np.nan)
    t_start = 1
    for t in range(t_start, T + 1):
        c = sched.c(t)
        if c >= 1.0:
            if dsq[t] != 0.0:
                raise UndefinedCoefficientError(
                    f"c_(t+1) = 1 at t={t} with nonzero delta; potential undefined"
                )
            A[t] = 0.0
        else:
            A[t] = A_coeff(sched, t, L)
        V[t] = traj.f_x[t] - problem.f_star + A[t] * dsq[t]
    for t in range(2, T + 1):
        try:
            dcoef[t] = delta_coeff(sched, t, L)
        except UndefinedCoefficientError:
            pass

    residual = np.full(T + 1, np.nan)
    for t in range(t_start, T):
        ce = sched.c(t) * sched.eta(t)
        residual[t] = V[t + 1] - V[t] + 0.25 * ce * traj.grad_x_norm_sq[t] - 0.5 * ce * sigma2

    if T < 2:
        raise ConfigError("potential trace needs T >= 2 to anchor V2")
    return PotentialTrace(
        t_start=t_start, A=A, V=V, descent_residual=residual,
        delta_coeff=dcoef, V2=float(V[2]), sigma2=sigma2,
    )


@dataclass(frozen=True)
class RateBound:
    """A closed-form window bound min_{2<=t<=T-1} ||grad f(x_t)||^2 <= value.

    ``value`` is None exactly when only a qualitative statement exists
    (decreasing averaging with exponent > 1), in which case
    ``qualitative`` holds the marker.
    """

    theorem: str
    value: float | None
    qualitative: str | None
    window_min: float | None
    params: dict

    def to_record(self) -> dict:
        return {"theorem": self.theorem, "value": self.value,
                "qualitative": self.qualitative, "window_min": self.window_min,
                "params": dict(self.params)}


def _constant_eta(schedule: Schedule, theorem: str) -> float:
    if not isinstance(schedule.step, ConstantStep):
        raise ConfigError(f"{theorem} requires a constant step size law")
    return schedule.step.eta


def bound(theorem: str, V2: float, schedule: Schedule, T: int, sigma2: float = 0.0,
          D: float | None = None, window_min: float | None = None) -> RateBound:
    """Evaluate the closed-form rate bound for one theorem id.

    Natural logarithms throughout (the bounds come from harmonic sums).
    The linear-step bound replaces its asymptotic remainder with the
    exact telescoped leak sum_{t=2}^{T-1} E(t) D^2 (t+1), and both
    telescoped denominators use the true window length T - 2.
    """
    if T < 3:
        raise ConfigError(f"rate bounds need T >= 3, got T={T}")
    noise_term = 2.0 * sigma2
    params: dict = {"V2": V2, "T": T, "sigma2": sigma2}

    if theorem == "T3":
        eta = _constant_eta(schedule, "T3")
        params["eta"] = eta
        value = 4.0 * V2 / (eta * math.log(T)) + noise_term
        return RateBound("T3", value, None, window_min, params)

    if theorem == "T4":
        if not isinstance(schedule.step, LinearGrowthStep):
            raise ConfigError("T4 requires the linearly growing step law eta_t = eta0*(t+1)")
        if D is None:
            raise ConfigError("T4 needs a growth constant D (measured or assumed)")
        eta0 = schedule.step.eta0
        leak = sum(linear_growth_residual_coeff(t, schedule.L_bound) * (t + 1)
                   for t in range(2, T))
        params.update({"eta0": eta0, "D": D, "leak_sum": leak})
        value = (4.0 * V2 + 4.0 * D * D * leak) / (eta0 * (T - 2)) + noise_term
        return RateBound("T4", value, None, window_min, params)

    if theorem == "T5_dec":
        eta = _constant_eta(schedule, "T5_dec")
        if isinstance(schedule.avg, UniformAvg):
            alpha = 1.0
        elif isinstance(schedule.avg, PolyDecreasingAvg):
            alpha = schedule.avg.alpha
        else:
            raise ConfigError("T5_dec requires a decreasing (or uniform) averaging law")
        params.update({"eta": eta, "alpha": alpha})
        if alpha > 1.0:
            return RateBound("T5_dec", None, "O(1)", window_min, params)
        if alpha == 1.0:
            value = 4.0 * V2 / (eta * math.log(T)) + noise_term
        else:
            value = 4.0 * V2 * (1.0 - alpha) / (eta * (T ** (1.0 - alpha) - 2.0 ** (1.0 - alpha)))
            value += noise_term
        return RateBound("T5_dec", value, None, window_min, params)

    if theorem == "T5_inc":
        eta = _constant_eta(schedule, "T5_inc")
        if isinstance(schedule.avg, PolyIncreasingAvg):
            alpha = schedule.avg.alpha
        else:
            raise ConfigError("T5_inc requires the increasing averaging law")
        params.update({"eta": eta, "alpha": alpha})
        denom = eta * T - 2.0 * eta - alpha * eta * math.log(T)
        if denom <= 0:
            raise ConfigError(f"T5_inc denominator nonpositive at T={T}, alpha={alpha}")
        return RateBound("T5_inc", 4.0 * V2 / denom + noise_term, None, window_min, params)

    raise ConfigError(f"unknown theorem id {theorem!r}")


# -- pointwise gradient-relation checks ------------------------------------


def claim1_max_residual(traj: Trajectory) -> float:
    """Largest violation of the discrepancy recursion
    delta_{t+1} = (1 - c_{t+1})(delta_t - eta_t g_t) along the run.

    This is algebraically exact; anything beyond float roundoff means
    the recorded trajectory and the update rule disagree.
    """
    if traj.zs is None:
        raise ConfigError("discrepancy recursion needs the fast sequence")
    deltas = traj.deltas
    worst = 0.0
    for t in range(traj.T):
        c = traj.schedule.c(t)
        eta = traj.schedule.eta(t)
        predicted = (1.0 - c) * (deltas[t] - eta * traj.oracle_grads[t])
        worst = max(worst, float(np.max(np.abs(deltas[t + 1] - predicted))))
    return worst


def _gradient_pairs(traj: Trajectory, problem: Problem):
    if traj.ys is None:
        raise ConfigError("gradient-relation checks need the recorded y sequence")
    for t in range(traj.T):
        gy = problem.grad(traj.ys[t])
        gx = problem.grad(traj.xs[t])
        yield t, float(gy @ gy), float(gx @ gx)


def claim2_margins(traj: Trajectory, problem: Problem) -> np.ndarray:
    """Margins of ||grad f(y_t)||^2 >= 0.5 ||grad f(x_t)||^2
    - 2 L^2 (1-beta)^2 ||delta_t||^2 (exact gradients, noiseless form).

    Nonnegative margins mean the lower gradient relation holds.
    """
    dsq = traj.delta_norm_sq
    L = problem.L
    out = np.empty(traj.T)
    for t, gy2, gx2 in _gradient_pairs(traj, problem):
        omb = 1.0 - traj.schedule.beta_at(t)
        out[t] = gy2 - 0.5 * gx2 + 2.0 * L * L * omb * omb * dsq[t]
    return out


def claim3_margins(traj: Trajectory, problem: Problem) -> np.ndarray:
    """Margins of ||grad f(y_t)||^2 <= ||grad f(x_t)||^2
    + L^2 (1-beta)^2 ||delta_t||^2 (exact gradients)."""
    dsq = traj.delta_norm_sq
    L = problem.L
    out = np.empty(traj.T)
    for t, gy2, gx2 in _gradient_pairs(traj, problem):
        omb = 1.0 - traj.schedule.beta_at(t)
        out[t] = gx2 + L * L * omb * omb * dsq[t] - gy2
    return out
