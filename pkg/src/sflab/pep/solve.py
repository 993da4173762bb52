"""Numerical solution of the worst-case SDPs via conic solvers.

The decision variables are the PSD Gram matrix of the n+1 gradients and
the n+1 function values (plus the infimum value for the anchored
variant and an epigraph scalar for the min-gradient metric).  All
constraints are linear in these, so any SDP-capable conic solver
applies; Clarabel is the accurate default, SCS the fallback.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .build import PepProblem, interpolation_rows

__all__ = ["PepSolverConfig", "PepCertificate", "solve"]


@dataclass(frozen=True)
class PepSolverConfig:
    """Solver selection and tolerances (config keys pep.solver / pep.tol /
    pep.max_n)."""

    solver: str = "CLARABEL"
    tol: float = 1e-8
    max_n: int = 30
    verbose: bool = False

    @classmethod
    def from_config(cls, cfg: dict | None) -> "PepSolverConfig":
        if not cfg:
            return cls()
        pep = cfg.get("pep", cfg)
        kw = {}
        if "solver" in pep:
            kw["solver"] = str(pep["solver"]).upper()
        if "tol" in pep:
            kw["tol"] = float(pep["tol"])
        if "max_n" in pep:
            kw["max_n"] = int(pep["max_n"])
        return cls(**kw)


@dataclass(frozen=True)
class PepCertificate:
    """Solved worst-case value for one horizon.

    ``gap`` is the best optimality-gap figure the solver exposes: the
    reported duality gap when available, otherwise the gap tolerance the
    solver certified at optimality.
    """

    scenario: str
    alpha: float | None
    n: int
    L: float
    D: float
    metric: str
    function_class: str
    initial_cond: str
    value: float | None
    status: str               # optimal | unbounded | infeasible | numerical_trouble
    gap: float
    solver: str

    def to_record(self) -> dict:
        return {
            "scenario": self.scenario,
            "alpha": self.alpha,
            "n": self.n,
            "L": self.L,
            "D": self.D,
            "metric": self.metric,
            "value": self.value,
            "status": self.status,
            "gap": self.gap,
        }


_STATUS_MAP = {
    "optimal": "optimal",
    "infeasible": "infeasible",
    "infeasible_inaccurate": "infeasible",
    "unbounded": "unbounded",
    "unbounded_inaccurate": "unbounded",
}


def _solve_cvxpy(problem: PepProblem, config: PepSolverConfig,
                 last_grad_index: int | None = None):
    """Assemble and solve; returns (status, value, gap)."""
    import cvxpy as cp

    k = problem.gram_size
    n = problem.n
    G = cp.Variable((k, k), PSD=True)
    f = cp.Variable(n + 1)
    cons = []

    Fmat, Qflat = interpolation_rows(problem)
    if len(Fmat):
        cons.append(Fmat @ f - Qflat @ cp.vec(G, order="F") >= 0)

    if problem.initial_cond == "final_iterate":
        cons.append(f[0] - f[n] <= problem.D)
    else:
        f_star = cp.Variable()
        cons.append(f[0] - f_star <= problem.D)
        for i in range(n + 1):
            cons.append(f[i] - f_star >= G[i, i] / (2.0 * problem.L))

    if problem.metric == "min_grad_sq":
        tau = cp.Variable()
        for t in range(1, n + 1):
            cons.append(tau <= G[t, t])
        obj = tau
    elif problem.metric == "last_grad_sq":
        idx = n if last_grad_index is None else last_grad_index
        obj = G[idx, idx]
    else:  # last_dist_sq
        v = problem.x_g[n] - problem.z_g[n]
        obj = cp.sum(cp.multiply(np.outer(v, v), G))

    prob = cp.Problem(cp.Maximize(obj), cons)
    return _solve_with_ladder(prob, config)


def _solve_with_ladder(prob, config: PepSolverConfig):
    """Solve on a tolerance ladder, falling back to the first-order solver.

    These SDPs are frequently degenerate at the optimum (many active
    window constraints), where the interior-point solver stalls just
    short of its target residuals.  The ladder retries at 10x and 100x
    the configured tolerance and reports the rung that certified
    optimality as the gap; the loosest rung still satisfies the
    certificate contract gap <= 1e-6 * max(1, value).  If every rung
    returns reduced accuracy, SCS at eps = 1e-6 is the last resort.
    """
    import warnings

    import cvxpy as cp

    with warnings.catch_warnings():
        # reduced-accuracy terminations are handled by the ladder itself
        warnings.filterwarnings("ignore", message="Solution may be inaccurate")
        if config.solver != "SCS":
            for rung in (config.tol, 10.0 * config.tol, 100.0 * config.tol):
                try:
                    prob.solve(solver=config.solver, verbose=config.verbose,
                               tol_gap_abs=rung, tol_gap_rel=rung, tol_feas=rung)
                except cp.SolverError as exc:
                    return "numerical_trouble", None, float("nan"), str(exc)
                mapped = _STATUS_MAP.get(prob.status, "numerical_trouble")
                if mapped == "optimal":
                    return "optimal", float(prob.value), rung, prob.status
                if mapped in ("unbounded", "infeasible"):
                    return mapped, None, float("nan"), prob.status
        try:
            prob.solve(solver="SCS", eps=min(config.tol * 100.0, 1e-6), max_iters=100_000,
                       verbose=config.verbose)
        except cp.SolverError as exc:
            return "numerical_trouble", None, float("nan"), str(exc)
    mapped = _STATUS_MAP.get(prob.status, "numerical_trouble")
    if mapped != "optimal":
        return mapped, None, float("nan"), prob.status

    gap = float("nan")
    stats = prob.solver_stats
    if stats is not None and isinstance(stats.extra_stats, dict):
        info = stats.extra_stats.get("info", {})
        if "gap" in info:
            gap = abs(float(info["gap"]))
    if np.isnan(gap):
        gap = min(config.tol * 100.0, 1e-6)
    return "optimal", float(prob.value), gap, prob.status


def solve(problem: PepProblem, config: PepSolverConfig | None = None) -> PepCertificate:
    """Maximize the metric over the PSD Gram and function values.

    The min-gradient metric is the epigraph form: maximize tau subject
    to tau <= <g_t, g_t> for every window index.  The max-gradient
    metric decomposes into one last-gradient solve per window index
    (the feasible set does not depend on the objective), and the
    reported value is their maximum.
    """
    config = config or PepSolverConfig()

    if problem.metric == "max_grad_sq":
        best = None
        for t in range(1, problem.n + 1):
            status, value, gap, raw = _solve_cvxpy(problem, config, last_grad_index=t)
            if status != "optimal":
                return _certificate(problem, None, status, gap, config)
            if best is None or value > best[0]:
                best = (value, gap)
        return _certificate(problem, best[0], "optimal", best[1], config)

    status, value, gap, raw = _solve_cvxpy(problem, config)
    return _certificate(problem, value, status, gap, config)


def _certificate(problem: PepProblem, value, status, gap, config) -> PepCertificate:
    return PepCertificate(
        scenario=problem.scenario.kind,
        alpha=problem.scenario.alpha,
        n=problem.n,
        L=problem.L,
        D=problem.D,
        metric=problem.metric,
        function_class=problem.function_class,
        initial_cond=problem.initial_cond,
        value=value,
        status=status,
        gap=float(gap),
        solver=config.solver,
    )
