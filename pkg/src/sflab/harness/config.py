"""Run configuration: parsing, validation, check compatibility.

A run config is a JSON object:

    {
      "problem":  {"name": "quad", "dim": 2, "L": 1.0},
      "schedule": {"step": {"kind": "constant", "eta": 0.5},
                   "avg":  {"kind": "poly_dec", "alpha": 1.0},
                   "beta": 1.0, "L_bound": 1.0},
      "noise":    {"sigma2": 0.0, "seed": 1},
      "x0":       {"preset": "ones"},
      "T": 1000,
      "checks": ["Lemma1", "T3", "Claim1"],
      "seeds": [1, 2, ...]          // stochastic checks only; default 1..64
    }

Incompatible check/schedule combinations are rejected at load time with
the violated precondition named, before any computation runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..problems import NoiseModel, Problem, problem_from_config
from ..schedules import (
    ConstantStep,
    LinearGrowthStep,
    PolyDecreasingAvg,
    PolyIncreasingAvg,
    Schedule,
    UniformAvg,
)

__all__ = ["CHECKS", "RunConfig", "resolve_x0"]

CHECKS = (
    "Lemma1", "T3", "T4", "T5dec", "T5inc",
    "Claim1", "Claim2", "Claim3", "Equivalence", "Assumption2",
)

DEFAULT_SEEDS = list(range(1, 65))


def resolve_x0(problem: Problem, cfg: dict | None) -> np.ndarray:
    """Initial point from its config: explicit vector or named preset.

    Presets: 'ones' (all-ones vector); 'gauss' (seeded point on the
    radius-1 sphere, optionally scaled by 'radius').
    """
    cfg = cfg or {"preset": "ones"}
    if "vector" in cfg:
        x0 = np.asarray(cfg["vector"], dtype=float)
        if x0.shape != (problem.dim,):
            raise ConfigError(f"x0 vector has shape {x0.shape}, problem dimension is {problem.dim}")
        return x0
    preset = cfg.get("preset", "ones")
    if preset == "ones":
        return np.ones(problem.dim)
    if preset == "gauss":
        seed = int(cfg.get("seed", 0))
        radius = float(cfg.get("radius", 1.0))
        rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed & (2**63 - 1), 0x0B5)))
        u = rng.standard_normal(problem.dim)
        return radius * u / float(np.linalg.norm(u))
    raise ConfigError(f"unknown x0 preset {preset!r}")


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def _validate_check(check: str, schedule: Schedule, problem: Problem, sigma2: float) -> None:
    step, avg = schedule.step, schedule.avg
    constant = isinstance(step, ConstantStep)
    uniform = isinstance(avg, UniformAvg)
    poly_dec = isinstance(avg, PolyDecreasingAvg)
    poly_inc = isinstance(avg, PolyIncreasingAvg)
    beta1 = schedule.beta == 1.0

    if check == "T3":
        _require(constant, "T3 requires a constant step size eta_t = eta")
        _require(uniform or (poly_dec and avg.alpha == 1.0),
                 "T3 requires uniform averaging c_{t+1} = 1/(t+1)")
        _require(beta1, "T3 requires beta_t = 1")
    elif check == "T4":
        _require(isinstance(step, LinearGrowthStep), "T4 requires eta_t=eta0(t+1)")
        _require(uniform or (poly_dec and avg.alpha == 1.0),
                 "T4 requires uniform averaging c_{t+1} = 1/(t+1)")
        _require(beta1, "T4 requires beta_t = 1")
    elif check == "T5dec":
        _require(constant, "T5dec requires a constant step size")
        _require(uniform or poly_dec, "T5dec requires a decreasing (or uniform) averaging law")
        _require(beta1, "T5dec requires beta_t = 1")
    elif check == "T5inc":
        _require(constant, "T5inc requires a constant step size")
        _require(poly_inc, "T5inc requires the increasing averaging law c_{t+1} = (t/(t+1))^alpha")
        _require(poly_inc and avg.alpha < 1.0,
                 "T5inc requires alpha < 1 (the descent bracket turns positive for alpha >= 1)")
        _require(beta1, "T5inc requires beta_t = 1")
    elif check == "Lemma1":
        _require(constant, "Lemma1 per-step check requires a constant step size "
                           "(use T4 for the growing-step certificate)")
        _require(uniform or poly_dec or (poly_inc and avg.alpha < 1.0),
                 "Lemma1 requires an averaging law with a certified nonpositive bracket")
        _require(beta1, "Lemma1 per-step check requires beta_t = 1 "
                        "(beta < 1 adds an uncertified discrepancy penalty)")
    elif check == "Equivalence":
        _require(beta1, "Equivalence requires beta_t = 1 (the momentum twins assume it)")
    elif check in ("Claim1", "Claim2", "Claim3", "Assumption2"):
        pass
    else:
        raise ConfigError(f"unknown check {check!r}; available: {CHECKS}")


@dataclass
class RunConfig:
    problem: Problem
    schedule: Schedule
    noise: NoiseModel
    x0: np.ndarray
    T: int
    checks: list[str]
    seeds: list[int]
    raw: dict = field(default_factory=dict)
    unsafe: bool = False

    @classmethod
    def from_dict(cls, cfg: dict, unsafe: bool = False) -> "RunConfig":
        try:
            problem = problem_from_config(cfg["problem"])
            schedule = Schedule.from_config(cfg["schedule"], unsafe=unsafe)
            T = int(cfg.get("T", 1000))
        except KeyError as exc:
            raise ConfigError(f"run config missing required key: {exc}") from exc
        _require(T >= 3, f"horizon T must be >= 3, got {T}")

        noise_cfg = dict(cfg.get("noise", {}))
        sigma2 = float(noise_cfg.get("sigma2", 0.0))
        seed = int(noise_cfg.get("seed", 0))
        kind = noise_cfg.get("kind", "none" if sigma2 == 0.0 else "gaussian")
        noise = NoiseModel(sigma2=sigma2, kind=kind, seed=seed)

        x0 = resolve_x0(problem, cfg.get("x0"))
        checks = list(cfg.get("checks", []))
        seeds = [int(s) for s in cfg.get("seeds", DEFAULT_SEEDS)]

        # step-size precondition against the problem's smoothness constant
        if not unsafe:
            if isinstance(schedule.step, ConstantStep):
                _require(problem.L * schedule.step.eta <= 1.0 + 1e-12,
                         f"constant step eta = {schedule.step.eta} violates eta <= 1/L "
                         f"for problem L = {problem.L}")
            else:
                _require(problem.L * schedule.step.eta0 <= 1.0 + 1e-12,
                         f"base step eta0 = {schedule.step.eta0} violates eta0 <= 1/L "
                         f"for problem L = {problem.L}")
        for check in checks:
            _validate_check(check, schedule, problem, sigma2)
        return cls(problem=problem, schedule=schedule, noise=noise, x0=x0, T=T,
                   checks=checks, seeds=seeds, raw=dict(cfg), unsafe=unsafe)
