"""Verification checks: theorem inequalities evaluated on real runs.

Tolerances are pinned here, not configurable: the per-step and window
inequalities are theorems, so a violation beyond float slack is a
defect, never flakiness.  Stochastic forms compare seed means against a
5-sigma Monte-Carlo band.
"""

from __future__ import annotations

import numpy as np

from ..errors import SfLabError
from ..lyapunov import (
    bound,
    claim1_max_residual,
    claim2_margins,
    claim3_margins,
    linear_growth_residual_coeff,
    potential,
)
from ..optimizers import run_sf, run_sgdm, run_shbm, sgdm_params_from_spa, shbm_params_from_spa
from ..problems import NoiseModel
from .config import RunConfig
from .reporting import CheckResult

__all__ = ["run_check", "RunContext", "TOLERANCES"]

TOLERANCES = {
    "claim1": 1e-12,        # algebraic recursion residual, absolute
    "residual": 1e-10,      # per-step descent residual, absolute
    "window": 1e-12,        # window bound slack, absolute
    "margins": 1e-10,       # gradient-relation margins, absolute
    "equivalence": 1e-9,    # trajectory deviation, relative
    "mc_band": 5.0,         # Monte-Carlo band width in standard errors
}


class RunContext:
    """Caches trajectories and potential traces shared between checks."""

    def __init__(self, config: RunConfig):
        self.config = config
        self._trajs: dict[int, object] = {}
        self._traces: dict[int, object] = {}

    def _noise(self, seed: int) -> NoiseModel:
        base = self.config.noise
        if base.kind == "none":
            return base
        return NoiseModel(sigma2=base.sigma2, kind=base.kind, seed=seed)

    def trajectory(self, seed: int | None = None):
        key = self.config.noise.seed if seed is None else seed
        if key not in self._trajs:
            self._trajs[key] = run_sf(
                self.config.problem, self._noise(key), self.config.schedule,
                self.config.x0, self.config.T, unsafe=self.config.unsafe,
            )
        return self._trajs[key]

    def trace(self, seed: int | None = None):
        key = self.config.noise.seed if seed is None else seed
        if key not in self._traces:
            self._traces[key] = potential(self.trajectory(key), self.config.problem)
        return self._traces[key]

    @property
    def stochastic(self) -> bool:
        return self.config.noise.kind != "none"


def _first_violation(values: np.ndarray, offset: int, tol: float) -> tuple[int | None, float]:
    """Index and value of the first entry above tol (NaNs ignored)."""
    worst = -np.inf
    first = None
    for i, v in enumerate(values):
        if np.isnan(v):
            continue
        if v > worst:
            worst = v
        if first is None and v > tol:
            first = i + offset
    return first, float(worst)


def _check_lemma1(ctx: RunContext) -> CheckResult:
    cfg = ctx.config
    lo, hi = 2, cfg.T - 1
    if not ctx.stochastic:
        trace = ctx.trace()
        res = trace.descent_residual[lo : hi + 1]
        first, worst = _first_violation(res, lo, TOLERANCES["residual"])
        status = "pass" if first is None else "fail"
        return CheckResult(
            check="Lemma1", status=status, measured=worst, bound=0.0,
            slack=TOLERANCES["residual"], first_violation_t=first,
            detail={"window": [lo, hi], "form": "deterministic per-step residual"},
        )
    residuals = np.stack([
        ctx.trace(seed).descent_residual[lo : hi + 1] for seed in cfg.seeds
    ])
    mean = residuals.mean(axis=0)
    se = residuals.std(axis=0, ddof=1) / np.sqrt(len(cfg.seeds))
    band = TOLERANCES["mc_band"] * se
    excess = mean - band
    first, worst = _first_violation(excess, lo, 0.0)
    status = "pass" if first is None else "fail"
    return CheckResult(
        check="Lemma1", status=status, measured=worst, bound=0.0, slack=None,
        first_violation_t=first, seeds=list(cfg.seeds),
        detail={"window": [lo, hi], "form": "seed-mean residual vs 5-sigma band",
                "max_mean_residual": float(np.max(mean))},
    )


def _window_check(ctx: RunContext, name: str, theorem: str) -> CheckResult:
    cfg = ctx.config
    tol = TOLERANCES["window"]
    if not ctx.stochastic:
        traj = ctx.trace()
        measured = ctx.trajectory().grad_window_min()
        rb = bound(theorem, traj.V2, cfg.schedule, cfg.T, sigma2=0.0)
        ok = measured <= rb.value + tol
        return CheckResult(
            check=name, status="pass" if ok else "fail", measured=measured,
            bound=rb.value, slack=rb.value + tol - measured,
            first_violation_t=None if ok else 2,
            detail={"V2": traj.V2, "rate_bound": rb.to_record()},
        )
    mins = np.array([ctx.trajectory(s).grad_window_min() for s in cfg.seeds])
    v2s = np.array([ctx.trace(s).V2 for s in cfg.seeds])
    rb = bound(theorem, float(v2s.mean()), cfg.schedule, cfg.T, sigma2=cfg.noise.sigma2)
    band = TOLERANCES["mc_band"] * mins.std(ddof=1) / np.sqrt(len(cfg.seeds))
    measured = float(mins.mean())
    ok = measured <= rb.value + band + tol
    return CheckResult(
        check=name, status="pass" if ok else "fail", measured=measured, bound=rb.value,
        slack=rb.value + band + tol - measured, seeds=list(cfg.seeds),
        detail={"mean_V2": float(v2s.mean()), "mc_band": float(band),
                "rate_bound": rb.to_record()},
    )


def _check_t4(ctx: RunContext) -> CheckResult:
    cfg = ctx.config
    traj = ctx.trajectory()
    trace = ctx.trace()
    dsq = traj.delta_norm_sq
    t_idx = np.arange(cfg.T + 1)
    growth_sq = float(np.max(dsq / (t_idx + 1.0)))  # Dhat^2
    eta0 = cfg.schedule.step.eta0
    L = cfg.problem.L

    lo, hi = 2, cfg.T - 1
    margins = np.empty(hi - lo + 1)
    for t in range(lo, hi + 1):
        leak = linear_growth_residual_coeff(t, L) * growth_sq * (t + 1.0)
        margins[t - lo] = (0.25 * eta0 * traj.grad_x_norm_sq[t]
                           - (trace.V[t] - trace.V[t + 1]) - leak)
    first, worst = _first_violation(margins, lo, TOLERANCES["residual"])

    rb = bound("T4", trace.V2, cfg.schedule, cfg.T, sigma2=0.0, D=float(np.sqrt(growth_sq)))
    measured_min = traj.grad_window_min()
    telescoped_ok = measured_min <= rb.value + TOLERANCES["window"]
    status = "pass" if first is None and telescoped_ok else "fail"
    return CheckResult(
        check="T4", status=status, measured=measured_min, bound=rb.value,
        slack=rb.value + TOLERANCES["window"] - measured_min,
        first_violation_t=first,
        detail={"D_hat": float(np.sqrt(growth_sq)), "D_hat_sq": growth_sq,
                "worst_per_step_margin": worst, "V2": trace.V2,
                "rate_bound": rb.to_record()},
    )


def _check_claim1(ctx: RunContext) -> CheckResult:
    worst = claim1_max_residual(ctx.trajectory())
    ok = worst <= TOLERANCES["claim1"]
    return CheckResult(
        check="Claim1", status="pass" if ok else "fail", measured=worst,
        bound=TOLERANCES["claim1"], slack=TOLERANCES["claim1"] - worst,
    )


def _check_claim_margin(ctx: RunContext, name: str, margin_fn) -> CheckResult:
    margins = margin_fn(ctx.trajectory(), ctx.config.problem)
    first, _ = _first_violation(-margins, 0, TOLERANCES["margins"])
    worst = float(np.min(margins))
    return CheckResult(
        check=name, status="pass" if first is None else "fail", measured=worst,
        bound=0.0, slack=TOLERANCES["margins"], first_violation_t=first,
    )


def _check_equivalence(ctx: RunContext) -> CheckResult:
    cfg = ctx.config
    traj_sf = ctx.trajectory()
    sgdm = sgdm_params_from_spa(cfg.schedule, cfg.T)
    shbm = shbm_params_from_spa(cfg.schedule, cfg.T)
    noise = ctx._noise(cfg.noise.seed)
    traj_m = run_sgdm(cfg.problem, noise, sgdm, cfg.x0, cfg.T, schedule=cfg.schedule)
    traj_h = run_shbm(cfg.problem, noise, shbm, cfg.x0, cfg.T, schedule=cfg.schedule)
    scale = max(1.0, float(np.max(np.abs(traj_sf.xs))))
    dev_m = float(np.max(np.abs(traj_m.xs - traj_sf.xs))) / scale
    dev_h = float(np.max(np.abs(traj_h.xs - traj_sf.xs))) / scale
    worst = max(dev_m, dev_h)
    ok = worst <= TOLERANCES["equivalence"]
    return CheckResult(
        check="Equivalence", status="pass" if ok else "fail", measured=worst,
        bound=TOLERANCES["equivalence"], slack=TOLERANCES["equivalence"] - worst,
        detail={"velocity_form_dev": dev_m, "displacement_form_dev": dev_h,
                "relative_to": scale},
    )


def _check_assumption2(ctx: RunContext) -> CheckResult:
    traj = ctx.trajectory()
    dsq = traj.delta_norm_sq
    ratios = dsq / (np.arange(ctx.config.T + 1) + 1.0)
    growth_sq = float(np.max(ratios))
    # Dhat is the max ratio, so no recorded step can violate it; the
    # check certifies the fit and reports the constant.
    return CheckResult(
        check="Assumption2", status="pass", measured=growth_sq, bound=growth_sq,
        slack=0.0, detail={"D_hat": float(np.sqrt(growth_sq)),
                           "arg_t": int(np.argmax(ratios))},
    )


_CHECK_FNS = {
    "Lemma1": _check_lemma1,
    "T3": lambda ctx: _window_check(ctx, "T3", "T3"),
    "T4": _check_t4,
    "T5dec": lambda ctx: _window_check(ctx, "T5dec", "T5_dec"),
    "T5inc": lambda ctx: _window_check(ctx, "T5inc", "T5_inc"),
    "Claim1": _check_claim1,
    "Claim2": lambda ctx: _check_claim_margin(ctx, "Claim2", claim2_margins),
    "Claim3": lambda ctx: _check_claim_margin(ctx, "Claim3", claim3_margins),
    "Equivalence": _check_equivalence,
    "Assumption2": _check_assumption2,
}


def run_check(check: str, ctx: RunContext) -> CheckResult:
    """Evaluate one named check; failures of the underlying runs become
    status=skip with the cause recorded, never a silent crash."""
    try:
        return _CHECK_FNS[check](ctx)
    except SfLabError as exc:
        return CheckResult(check=check, status="skip", detail={"cause": str(exc)})
