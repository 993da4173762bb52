"""Worst-case curves: one SDP solve per horizon, plus the figure weights.

A curve fixes a scenario and solves the worst-case SDP at every horizon
t = 1..n_max.  The weighted column multiplies the certified value by the
rate being probed, so a curve compatible with that rate stays bounded:

* decreasing averaging:  value * t^(1-alpha)
* increasing averaging:  value * (t - 2 - alpha ln t), emitted for t >= 3
* linear step, gradient: value * (t+1) / ln(t+1)
* linear step, distance: raw value; callers fit the growth constant
  via :func:`fitted_growth_sq`.

Horizons are independent SDPs; with more than one worker they solve in
a process pool (capped by the SF_LAB_WORKERS environment variable) and
the results are reassembled in horizon order.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from ..errors import ConfigError
from .build import Scenario, build
from .solve import PepCertificate, PepSolverConfig, solve

__all__ = [
    "CurvePoint",
    "curve",
    "dec_weight",
    "inc_weight",
    "lin_step_weight",
    "fitted_growth_sq",
    "default_workers",
]

DESK_HORIZON = 30


def dec_weight(t: int, alpha: float) -> float:
    return float(t) ** (1.0 - alpha)


def inc_weight(t: int, alpha: float) -> float:
    return t - 2.0 - alpha * math.log(t)


def lin_step_weight(t: int) -> float:
    return (t + 1.0) / math.log(t + 1.0)


@dataclass(frozen=True)
class CurvePoint:
    t: int
    tau: float | None
    weighted: float | None
    status: str
    gap: float = float("nan")


def _weighted(scenario: Scenario, t: int, tau: float) -> float | None:
    if scenario.kind == "dec_c":
        return tau * dec_weight(t, scenario.alpha)
    if scenario.kind == "inc_c":
        if t < 3:
            return None
        return tau * inc_weight(t, scenario.alpha)
    if scenario.kind == "lin_step_grad":
        return tau * lin_step_weight(t)
    return tau  # lin_step_dist: raw value


def _solve_point(args) -> tuple[int, PepCertificate]:
    scenario, t, L, D, metric, config = args
    problem = build(scenario, t, L, D, metric=metric)
    return t, solve(problem, config)


def default_workers() -> int:
    env = os.environ.get("SF_LAB_WORKERS")
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def curve(scenario: Scenario, n_max: int, L: float, D: float, metric: str | None = None,
          config: PepSolverConfig | None = None, workers: int | None = None) -> list[CurvePoint]:
    """Solve the scenario's SDP at every horizon t = 1..n_max.

    A failed solve marks its point (tau = None, status recorded) and the
    rest of the curve proceeds.  Horizons beyond the desk default of 30
    are allowed only when the solver config raises ``max_n`` and emit a
    runtime warning (the SDP has O(n^2) constraints).
    """
    config = config or PepSolverConfig()
    if n_max < 1:
        raise ConfigError(f"curve needs n_max >= 1, got {n_max}")
    if n_max > config.max_n:
        raise ConfigError(
            f"n_max = {n_max} exceeds the configured limit pep.max_n = {config.max_n}"
        )
    if n_max > DESK_HORIZON:
        warnings.warn(
            f"solving up to n = {n_max} (> desk default {DESK_HORIZON}); expect long runtimes",
            RuntimeWarning,
            stacklevel=2,
        )
    workers = default_workers() if workers is None else max(1, workers)
    tasks = [(scenario, t, L, D, metric, config) for t in range(1, n_max + 1)]

    results: dict[int, PepCertificate] = {}
    if workers == 1 or len(tasks) == 1:
        for task in tasks:
            t, cert = _solve_point(task)
            results[t] = cert
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for t, cert in pool.map(_solve_point, tasks):
                results[t] = cert

    points = []
    for t in range(1, n_max + 1):
        cert = results[t]
        if cert.status == "optimal" and cert.value is not None:
            points.append(CurvePoint(t, cert.value, _weighted(scenario, t, cert.value),
                                     cert.status, cert.gap))
        else:
            points.append(CurvePoint(t, None, None, cert.status))
    return points


def fitted_growth_sq(points: list[CurvePoint]) -> float:
    """Smallest constant Dhat^2 with value_t <= Dhat^2 (t+1) over solved points."""
    ratios = [p.tau / (p.t + 1.0) for p in points if p.tau is not None]
    if not ratios:
        raise ConfigError("no solved points to fit a growth constant to")
    return max(ratios)
