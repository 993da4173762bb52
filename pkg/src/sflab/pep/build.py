"""Symbolic construction of the worst-case SDPs.

Each scenario unrolls the three-sequence recursion (with beta = 1, so
the gradient points are the x-iterates themselves) into affine
expressions over the basis [x0, g0, ..., gn].  Every iterate carries an
x0-coefficient of exactly 1, so differences of iterates -- which is all
the interpolation conditions and metrics ever touch -- live entirely in
the span of the n+1 gradients.  The Gram decision variable is therefore
the (n+1) x (n+1) matrix of gradient inner products.

Scenarios:

* ``dec_c(alpha)``      eta_t = 1/L,      c_{t+1} = 1/(t+1)^alpha
* ``inc_c(alpha)``      eta_t = 1/L,      c_{t+1} = (t/(t+1))^alpha
* ``lin_step_grad``     eta_t = (t+1)/L,  c_{t+1} = 1/(t+1), gradient metric
* ``lin_step_dist``     same recursion,   slow/fast gap metric

The default budget constraint is f_0 - f_n <= D on the final iterate.
The ``optimum_anchored`` variant instead bounds f_0 - f_* <= D against
the infimum and adds the smoothness consequence
f_i - f_* >= ||g_i||^2 / (2L) at every recorded point; a literal
pairwise-interpolated stationary point would leave the problem
unbounded (the extension realizing the interpolation data need not
attain its infimum at that point), so the anchored variant encodes the
lower bound as these valid inequalities instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError

__all__ = [
    "Scenario",
    "dec_c",
    "inc_c",
    "lin_step_grad",
    "lin_step_dist",
    "PepProblem",
    "build",
]

METRICS = ("last_grad_sq", "min_grad_sq", "max_grad_sq", "last_dist_sq")
FUNCTION_CLASSES = ("smooth_nonconvex", "smooth_convex")
INITIAL_CONDS = ("final_iterate", "optimum_anchored")


@dataclass(frozen=True)
class Scenario:
    kind: str                  # dec_c | inc_c | lin_step_grad | lin_step_dist
    alpha: float | None = None

    def label(self) -> str:
        return self.kind if self.alpha is None else f"{self.kind}(alpha={self.alpha:g})"


def dec_c(alpha: float) -> Scenario:
    return Scenario("dec_c", float(alpha))


def inc_c(alpha: float) -> Scenario:
    return Scenario("inc_c", float(alpha))


def lin_step_grad() -> Scenario:
    return Scenario("lin_step_grad")


def lin_step_dist() -> Scenario:
    return Scenario("lin_step_dist")


def _laws(scenario: Scenario, n: int, L: float) -> tuple[np.ndarray, np.ndarray]:
    t = np.arange(n, dtype=float)
    if scenario.kind == "dec_c":
        if scenario.alpha is None or scenario.alpha < 0:
            raise ConfigError(f"dec_c needs alpha >= 0, got {scenario.alpha}")
        eta = np.full(n, 1.0 / L)
        c = (t + 1.0) ** (-scenario.alpha)
    elif scenario.kind == "inc_c":
        if scenario.alpha is None or not 0 <= scenario.alpha < 1:
            raise ConfigError(f"inc_c needs alpha in [0, 1), got {scenario.alpha}")
        eta = np.full(n, 1.0 / L)
        c = np.ones(n)
        if scenario.alpha > 0:
            c[0] = 0.0
            if n > 1:
                c[1:] = (t[1:] / (t[1:] + 1.0)) ** scenario.alpha
    elif scenario.kind in ("lin_step_grad", "lin_step_dist"):
        if scenario.alpha is not None:
            raise ConfigError(f"{scenario.kind} takes no alpha")
        eta = (t + 1.0) / L
        c = 1.0 / (t + 1.0)
    else:
        raise ConfigError(f"unknown scenario kind {scenario.kind!r}")
    return eta, c


@dataclass
class PepProblem:
    """One worst-case SDP instance, fully determined by the schedule.

    ``x_g``/``z_g`` hold the gradient-basis coefficients of each iterate
    (rows t = 0..n over columns g_0..g_n); the implicit x0-coefficient is
    1 for every row and never enters a constraint.
    """

    scenario: Scenario
    n: int
    L: float
    D: float
    metric: str
    function_class: str
    initial_cond: str
    eta: np.ndarray      # (n,)
    c: np.ndarray        # (n,)
    x_g: np.ndarray      # (n+1, n+1)
    z_g: np.ndarray      # (n+1, n+1)
    basis: list[str]

    @property
    def gram_size(self) -> int:
        return self.n + 1


def build(scenario: Scenario, n: int, L: float, D: float, metric: str | None = None,
          function_class: str = "smooth_nonconvex",
          initial_cond: str = "final_iterate") -> PepProblem:
    """Unroll the recursion for one scenario into a PepProblem.

    The gradient labelled g_t is evaluated at x_t; updates consume
    g_0..g_{n-1} while the metrics may additionally reference g_n at the
    final iterate.
    """
    if n < 0:
        raise ConfigError(f"horizon must be nonnegative, got {n}")
    if L <= 0 or D < 0:
        raise ConfigError(f"need L > 0 and D >= 0, got L={L}, D={D}")
    if function_class not in FUNCTION_CLASSES:
        raise ConfigError(f"unknown function class {function_class!r}")
    if initial_cond not in INITIAL_CONDS:
        raise ConfigError(f"unknown initial condition {initial_cond!r}")
    if metric is None:
        metric = "last_dist_sq" if scenario.kind == "lin_step_dist" else "min_grad_sq"
    if metric not in METRICS:
        raise ConfigError(f"unknown metric {metric!r}")
    if metric in ("min_grad_sq", "max_grad_sq") and n < 1:
        raise ConfigError(f"metric {metric} needs n >= 1 (its window starts at t = 1)")

    eta, c = _laws(scenario, n, L)
    k = n + 1
    x_g = np.zeros((n + 1, k))
    z_g = np.zeros((n + 1, k))
    for t in range(n):
        z_g[t + 1] = z_g[t]
        z_g[t + 1, t] -= eta[t]
        x_g[t + 1] = (1.0 - c[t]) * x_g[t] + c[t] * z_g[t + 1]

    basis = ["x0"] + [f"g{i}" for i in range(k)]
    return PepProblem(
        scenario=scenario, n=n, L=L, D=D, metric=metric,
        function_class=function_class, initial_cond=initial_cond,
        eta=eta, c=c, x_g=x_g, z_g=z_g, basis=basis,
    )


def _sym_outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    m = np.outer(a, b)
    return 0.5 * (m + m.T)


def interpolation_rows(problem: PepProblem) -> tuple[np.ndarray, np.ndarray]:
    """Pairwise class constraints as (F, Q): F @ fvals - <Q_r, G> >= 0 per row.

    Smooth (possibly nonconvex) class, ordered pair (i, j):

        f_i - f_j >= (1/2) <g_i + g_j, x_i - x_j>
                     + ||g_i - g_j||^2 / (4L) - (L/4) ||x_i - x_j||^2

    Smooth convex class, ordered pair (i, j):

        f_i - f_j >= <g_j, x_i - x_j> + ||g_i - g_j||^2 / (2L)

    Both families are exact interpolation characterizations, so the
    convex feasible set is contained in the nonconvex one.  Duplicate
    points (identical position expressions) are kept: their pairwise
    rows collapse to forcing equal gradients and values, which is the
    intended semantics.
    """
    n, L, k = problem.n, problem.L, problem.gram_size
    eye = np.eye(k)
    rows_f = []
    rows_q = []
    for i in range(n + 1):
        for j in range(n + 1):
            if i == j:
                continue
            d = problem.x_g[i] - problem.x_g[j]
            gi, gj = eye[i], eye[j]
            if problem.function_class == "smooth_nonconvex":
                q = (
                    0.5 * _sym_outer(gi + gj, d)
                    + _sym_outer(gi - gj, gi - gj) / (4.0 * L)
                    - 0.25 * L * _sym_outer(d, d)
                )
            else:
                q = _sym_outer(gj, d) + _sym_outer(gi - gj, gi - gj) / (2.0 * L)
            fr = np.zeros(n + 1)
            fr[i] = 1.0
            fr[j] = -1.0
            rows_f.append(fr)
            rows_q.append(q.reshape(-1))
    return np.asarray(rows_f), np.asarray(rows_q)
