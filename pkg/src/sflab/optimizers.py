"""The three-sequence iteration and its momentum twins.

One step of the three-sequence method, in this exact evaluation order:

    y  = (1 - beta_t) z + beta_t x
    z' = z - eta_t * oracle(y, t)
    x' = (1 - c_{t+1}) x + c_{t+1} z'

with x_0 = z_0.  ``run_sf`` records the full history.  The momentum
forms are reproduced exactly by per-step parameter maps:

* velocity form (``run_sgdm``):     m' = theta_t m + g,  x' = x - lam_t m'
* displacement form (``run_shbm``): x' = x - lam_t g + theta_t (x - x_prev)

``sgdm_params_from_spa`` and ``shbm_params_from_spa`` compute the
coefficient sequences that make the x-iterates coincide pathwise with a
given schedule, provided all three consume the same gradient noise per
step (see :func:`sflab.problems.noise_draw`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError, DomainEscapeError, MapInfeasibleError, NonFiniteGradientError
from .problems import NoiseModel, Problem, make_oracle
from .schedules import Schedule

__all__ = [
    "SfState",
    "Trajectory",
    "SgdmParams",
    "ShbmParams",
    "sf_step",
    "run_sf",
    "sgdm_params_from_spa",
    "shbm_params_from_spa",
    "run_sgdm",
    "run_shbm",
]

Oracle = Callable[[np.ndarray, int], np.ndarray]


@dataclass(frozen=True)
class SfState:
    """Fast/slow pair at step t; at t = 0 the two coincide."""

    t: int
    x: np.ndarray
    z: np.ndarray


@dataclass
class Trajectory:
    """Complete record of one run.

    T+1 states and T oracle gradient evaluations.  ``grad_x_norm_sq``
    holds exact squared gradient norms at every x_t (recomputed with the
    problem's analytic gradient, independent of oracle noise); the
    min-gradient windows and the potential residuals read from it.
    ``zs``/``ys`` are None for the momentum forms, which do not maintain
    those sequences.
    """

    schedule: Schedule
    problem_name: str
    T: int
    xs: np.ndarray                    # (T+1, d)
    f_x: np.ndarray                   # (T+1,)
    grad_x_norm_sq: np.ndarray        # (T+1,)
    oracle_grads: np.ndarray          # (T, d)
    zs: np.ndarray | None = None      # (T+1, d)
    ys: np.ndarray | None = None      # (T, d)
    sigma2: float = 0.0
    seed: int = 0
    algorithm: str = "sf"

    @property
    def dim(self) -> int:
        return self.xs.shape[1]

    @property
    def deltas(self) -> np.ndarray:
        """z_t - x_t for every recorded state (zeros when z is not tracked)."""
        if self.zs is None:
            return np.zeros_like(self.xs)
        return self.zs - self.xs

    @property
    def delta_norm_sq(self) -> np.ndarray:
        d = self.deltas
        return np.einsum("td,td->t", d, d)

    def grad_window_min(self, lo: int = 2, hi: int | None = None) -> float:
        """min over t in [lo, hi] of the exact ||grad f(x_t)||^2 (default hi = T-1)."""
        hi = self.T - 1 if hi is None else hi
        if lo > hi:
            raise ConfigError(f"empty gradient window [{lo}, {hi}]")
        return float(np.min(self.grad_x_norm_sq[lo : hi + 1]))


def _check_gradient(g: np.ndarray, t: int, point: np.ndarray, context: str) -> None:
    if not np.all(np.isfinite(g)):
        raise NonFiniteGradientError(
            f"non-finite gradient at step {t} of {context} (query point {point})", t=t, point=point
        )


def _sf_advance(state: SfState, schedule: Schedule, oracle: Oracle, L: float | None,
                unsafe: bool, problem: Problem | None = None) -> tuple[SfState, np.ndarray, np.ndarray]:
    """One step; returns (next state, y, consumed gradient)."""
    t = state.t
    if not unsafe and not schedule.lyapunov_ok(t, L):
        Lv = schedule.L_bound if L is None else L
        raise ConfigError(
            f"L*eta_t*c_(t+1) = {Lv * schedule.eta(t) * schedule.c(t):.6g} > 1 at t={t}; "
            "pass unsafe=True to step anyway"
        )
    beta = schedule.beta_at(t)
    y = (1.0 - beta) * state.z + beta * state.x
    if problem is not None and not problem.in_box(y):
        raise DomainEscapeError(
            f"gradient query point left the certified box of '{problem.name}' at step {t}: {y}",
            t=t, point=y,
        )
    g = np.asarray(oracle(y, t), dtype=float)
    _check_gradient(g, t, y, "three-sequence run")
    z_next = state.z - schedule.eta(t) * g
    c = schedule.c(t)
    x_next = (1.0 - c) * state.x + c * z_next
    return SfState(t=t + 1, x=x_next, z=z_next), y, g


def sf_step(state: SfState, schedule: Schedule, oracle: Oracle, L: float | None = None,
            unsafe: bool = False) -> SfState:
    """Advance the three sequences by one step.

    Refuses steps violating the descent precondition L*eta_t*c_{t+1} <= 1
    unless ``unsafe`` is set; L defaults to the schedule's L_bound.
    """
    nxt, _, _ = _sf_advance(state, schedule, oracle, L, unsafe)
    return nxt


def _prepare_run(problem: Problem, x0: np.ndarray, T: int) -> np.ndarray:
    if T < 3:
        raise ConfigError(f"horizon must be at least 3, got {T}")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (problem.dim,):
        raise ConfigError(f"x0 of shape {x0.shape} for problem of dimension {problem.dim}")
    return x0


def _check_domain(problem: Problem, x: np.ndarray, t: int) -> None:
    # Only gradient/value query points need the box (x and y); the fast
    # sequence z may drift far outside by design under growing steps.
    if not problem.in_box(x):
        raise DomainEscapeError(
            f"iterate left the certified box of '{problem.name}' at step {t}: {x}", t=t, point=x
        )


def run_sf(problem: Problem, noise: NoiseModel, schedule: Schedule, x0: np.ndarray, T: int,
           unsafe: bool = False) -> Trajectory:
    """Run the three-sequence method for T steps and record everything.

    Deterministic given (problem, noise.seed, schedule, x0, T).
    """
    x0 = _prepare_run(problem, x0, T)
    oracle = make_oracle(problem, noise)
    d = problem.dim
    xs = np.empty((T + 1, d))
    zs = np.empty((T + 1, d))
    ys = np.empty((T, d))
    grads = np.empty((T, d))
    f_x = np.empty(T + 1)
    gsq = np.empty(T + 1)

    state = SfState(t=0, x=x0.copy(), z=x0.copy())
    for t in range(T):
        xs[t], zs[t] = state.x, state.z
        f_x[t] = problem.f(state.x)
        gx = problem.grad(state.x)
        gsq[t] = float(gx @ gx)
        state, ys[t], grads[t] = _sf_advance(state, schedule, oracle, problem.L, unsafe, problem)
        _check_domain(problem, state.x, t + 1)
    xs[T], zs[T] = state.x, state.z
    f_x[T] = problem.f(state.x)
    gx = problem.grad(state.x)
    gsq[T] = float(gx @ gx)
    return Trajectory(
        schedule=schedule, problem_name=problem.name, T=T, xs=xs, f_x=f_x,
        grad_x_norm_sq=gsq, oracle_grads=grads, zs=zs, ys=ys,
        sigma2=noise.sigma2, seed=noise.seed, algorithm="sf",
    )


@dataclass(frozen=True)
class SgdmParams:
    """Per-step (theta_t, lam_t) for the velocity form."""

    theta: np.ndarray  # (T,)
    lam: np.ndarray    # (T,)


@dataclass(frozen=True)
class ShbmParams:
    """Per-step (theta_t, lam_t) for the displacement form.

    ``note`` flags indices where the map degenerates (zero averaging
    weight makes the displacement vanish, so the momentum coefficient is
    immaterial and recorded as 0).
    """

    theta: np.ndarray
    lam: np.ndarray
    note: str | None = None


def sgdm_params_from_spa(schedule: Schedule, T: int) -> SgdmParams:
    """Velocity-form coefficients reproducing the schedule's x-iterates.

    lam_t = c_{t+1} * eta_t.  theta solves the step-size recurrence
    eta_t = (eta_{t-1} - lam_{t-1}) / theta_t, i.e.
    theta_t = eta_{t-1} (1 - c_t) / eta_t; for constant eta this reduces
    to 1 - c_t (so theta_1 = 0 under uniform averaging: the first mapped
    step carries no momentum).  Coefficients outside [0, 1] mean the map
    cannot reproduce the schedule; that raises MapInfeasibleError naming
    the offending step, never a silent clamp.
    """
    lam = np.array([schedule.c(t) * schedule.eta(t) for t in range(T)])
    theta = np.zeros(T)
    for s in range(1, T):
        theta[s] = schedule.eta(s - 1) * (1.0 - schedule.c(s - 1)) / schedule.eta(s)
        if not -1e-12 <= theta[s] <= 1.0 + 1e-12:
            raise MapInfeasibleError(
                f"velocity-form momentum theta_{s} = {theta[s]:.6g} outside [0, 1]", t=s
            )
    return SgdmParams(theta=theta, lam=lam)


def shbm_params_from_spa(schedule: Schedule, T: int) -> ShbmParams:
    """Displacement-form coefficients reproducing the schedule's x-iterates.

    lam_t = c_{t+1} eta_t and theta_t = (c_{t+1}/c_t)(1 - c_t).  When
    c_t = 0 (increasing averaging at its first step) the displacement
    x_t - x_{t-1} is exactly zero, so theta_t is set to 0 and the map
    effectively starts one step later; ``note`` records the offset.
    """
    lam = np.array([schedule.c(t) * schedule.eta(t) for t in range(T)])
    theta = np.zeros(T)
    note = None
    for s in range(1, T):
        c_prev = schedule.c(s - 1)  # weight that formed x_s
        if c_prev == 0.0:
            theta[s] = 0.0
            note = f"zero averaging weight at index {s}; displacement vanishes, map offset by one step"
            continue
        theta[s] = (schedule.c(s) / c_prev) * (1.0 - c_prev)
    return ShbmParams(theta=theta, lam=lam, note=note)


def _run_momentum(problem: Problem, noise: NoiseModel, x0: np.ndarray, T: int,
                  stepper: Callable, algorithm: str, schedule: Schedule) -> Trajectory:
    x0 = _prepare_run(problem, x0, T)
    oracle = make_oracle(problem, noise)
    d = problem.dim
    xs = np.empty((T + 1, d))
    grads = np.empty((T, d))
    f_x = np.empty(T + 1)
    gsq = np.empty(T + 1)
    x = x0.copy()
    carry = None
    for t in range(T):
        xs[t] = x
        f_x[t] = problem.f(x)
        gx = problem.grad(x)
        gsq[t] = float(gx @ gx)
        g = np.asarray(oracle(x, t), dtype=float)
        _check_gradient(g, t, x, f"{algorithm} run")
        grads[t] = g
        x, carry = stepper(t, x, g, carry)
        _check_domain(problem, x, t + 1)
    xs[T] = x
    f_x[T] = problem.f(x)
    gx = problem.grad(x)
    gsq[T] = float(gx @ gx)
    return Trajectory(
        schedule=schedule, problem_name=problem.name, T=T, xs=xs, f_x=f_x,
        grad_x_norm_sq=gsq, oracle_grads=grads, zs=None, ys=None,
        sigma2=noise.sigma2, seed=noise.seed, algorithm=algorithm,
    )


def run_sgdm(problem: Problem, noise: NoiseModel, params: SgdmParams, x0: np.ndarray, T: int,
             schedule: Schedule | None = None) -> Trajectory:
    """Velocity form: m_{t+1} = theta_t m_t + g_t, x_{t+1} = x_t - lam_t m_{t+1}.

    m_0 = 0, so theta_0 never matters.  theta_t = 0 everywhere gives
    plain gradient descent with step lam_t.
    """
    if len(params.lam) < T:
        raise ConfigError(f"params cover {len(params.lam)} steps, run needs {T}")
    sched = schedule if schedule is not None else _placeholder_schedule(params.lam)

    def stepper(t, x, g, m):
        m = g if m is None else params.theta[t] * m + g
        return x - params.lam[t] * m, m

    return _run_momentum(problem, noise, x0, T, stepper, "sgdm", sched)


def run_shbm(problem: Problem, noise: NoiseModel, params: ShbmParams, x0: np.ndarray, T: int,
             schedule: Schedule | None = None) -> Trajectory:
    """Displacement form: x_{t+1} = x_t - lam_t g_t + theta_t (x_t - x_{t-1}).

    The missing history at t = 0 is taken as x_{-1} = x_0 (zero
    displacement), matching the convention of the parameter maps.
    """
    if len(params.lam) < T:
        raise ConfigError(f"params cover {len(params.lam)} steps, run needs {T}")
    sched = schedule if schedule is not None else _placeholder_schedule(params.lam)

    def stepper(t, x, g, x_prev):
        prev = x if x_prev is None else x_prev
        x_next = x - params.lam[t] * g + params.theta[t] * (x - prev)
        return x_next, x

    return _run_momentum(problem, noise, x0, T, stepper, "shbm", sched)


def _placeholder_schedule(lam: np.ndarray) -> Schedule:
    # Attached to momentum trajectories run from raw params; potential
    # tracking requires the generating schedule and is not meaningful here.
    from .schedules import ConstantStep, UniformAvg

    return Schedule(ConstantStep(float(max(float(np.max(lam)), 1e-300))), UniformAvg())
