"""Smooth, lower-bounded test objectives with exact gradients.

Every :class:`Problem` carries a smoothness constant ``L`` that upper
bounds the Hessian spectral norm either globally or on a stated box, the
exact infimum ``f_star``, and analytic objective/gradient callables.
Where ``L`` is only certified on a box, runs must stay inside it (the
optimizers abort loudly when an iterate leaves the box by more than 10%).

A :class:`NoiseModel` turns the exact gradient into an unbiased
bounded-variance oracle.  The draw at step ``t`` is a pure function of
``(seed, t)``, so two runs with the same seed consume identical noise no
matter which algorithm is stepping -- the pathwise equivalence tests
rely on this.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError

__all__ = [
    "Problem",
    "NoiseModel",
    "noise_draw",
    "noisy_grad",
    "make_oracle",
    "quad",
    "rosenbrock2d",
    "nonconvex_cos",
    "quartic_well",
    "builtin_suite",
    "problem_from_config",
]

# Scale for the 2-d Rosenbrock objective: the Hessian spectral norm of
# (1-x)^2 + 100(y-x^2)^2 over the box [-2, 2]^2 peaks at ~5718 (corner
# (-2, -2)); dividing by 5800 certifies L = 1 on that box.
ROSENBROCK_SCALE = 1.0 / 5800.0
ROSENBROCK_BOX = 2.0

# Box half-width for the quartic double well; |f''| = |3x^2 - 1| <= 5.75 there.
QUARTIC_BOX = 1.5
QUARTIC_L = 3.0 * QUARTIC_BOX**2 - 1.0

# Per-coordinate minimum of u^2/2 + cos(u).  The derivative u - sin(u)
# vanishes only at u = 0, giving the value 1; a grid + Newton refinement
# test re-derives this to 1e-12.
COS_WELL_MIN = 1.0


@dataclass(frozen=True)
class Problem:
    """Immutable L-smooth objective with exact analytic gradient.

    ``box`` is ``None`` for globally certified problems, otherwise the
    half-width b of the symmetric box [-b, b]^d on which ``L`` holds.
    """

    name: str
    dim: int
    L: float
    f_star: float
    objective: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    box: float | None = None

    def f(self, x: np.ndarray) -> float:
        x = self._check(x)
        return float(self.objective(x))

    def grad(self, x: np.ndarray) -> np.ndarray:
        x = self._check(x)
        return np.asarray(self.gradient(x), dtype=float)

    def _check(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ConfigError(
                f"point of shape {x.shape} passed to problem '{self.name}' of dimension {self.dim}"
            )
        if not np.all(np.isfinite(x)):
            raise ConfigError(f"non-finite point passed to problem '{self.name}'")
        return x

    def in_box(self, x: np.ndarray, margin: float = 1.1) -> bool:
        """True when x lies within ``margin`` times the certified box."""
        if self.box is None:
            return True
        return bool(np.max(np.abs(x)) <= margin * self.box)


@dataclass(frozen=True)
class NoiseModel:
    """Additive gradient noise: zero mean, total variance at most sigma2.

    ``kind='gaussian'`` adds isotropic Gaussian noise with per-coordinate
    variance sigma2/d, so the total variance is sigma2 independent of the
    dimension.  ``kind='none'`` leaves the oracle exact (and requires
    sigma2 = 0).
    """

    sigma2: float = 0.0
    kind: str = "none"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("none", "gaussian"):
            raise ConfigError(f"unknown noise kind {self.kind!r}")
        if self.kind == "none" and self.sigma2 != 0.0:
            raise ConfigError("noise kind 'none' requires sigma2 = 0")
        if self.kind == "gaussian" and not self.sigma2 > 0.0:
            raise ConfigError("gaussian noise requires sigma2 > 0")


def noise_draw(noise: NoiseModel, dim: int, t: int) -> np.ndarray:
    """The noise vector consumed at step t.  Pure in (seed, t, dim)."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy=(int(noise.seed) & (2**63 - 1), int(t))))
    return rng.standard_normal(dim) * np.sqrt(noise.sigma2 / dim)


def noisy_grad(problem: Problem, noise: NoiseModel, x: np.ndarray, t: int) -> np.ndarray:
    """Gradient oracle: exact gradient plus the (seed, t) noise draw.

    With ``kind='none'`` the output is bit-identical to the exact
    gradient (no RNG is touched at all).
    """
    g = problem.grad(x)
    if noise.kind == "none":
        return g
    return g + noise_draw(noise, problem.dim, t)


def make_oracle(problem: Problem, noise: NoiseModel) -> Callable[[np.ndarray, int], np.ndarray]:
    """Bind (problem, noise) into the two-argument oracle the optimizers use."""

    def oracle(x: np.ndarray, t: int) -> np.ndarray:
        return noisy_grad(problem, noise, x, t)

    return oracle


# -- builtin objectives ---------------------------------------------------


def quad(dim: int = 2, L: float = 1.0) -> Problem:
    """f(x) = (L/2) ||x||^2 with gradient Lx; globally L-smooth, f* = 0."""
    return Problem(
        name="quad",
        dim=dim,
        L=L,
        f_star=0.0,
        objective=lambda x: 0.5 * L * float(x @ x),
        gradient=lambda x: L * x,
        box=None,
    )


def rosenbrock2d() -> Problem:
    """Scaled 2-d Rosenbrock valley, minimum 0 at (1, 1).

    The classic objective is multiplied by ROSENBROCK_SCALE so the
    Hessian spectral norm stays below 1 on the box [-2, 2]^2; L = 1 is
    certified there by dense sampling.
    """
    s = ROSENBROCK_SCALE

    def objective(x: np.ndarray) -> float:
        return s * float((1.0 - x[0]) ** 2 + 100.0 * (x[1] - x[0] ** 2) ** 2)

    def gradient(x: np.ndarray) -> np.ndarray:
        gx = -2.0 * (1.0 - x[0]) - 400.0 * x[0] * (x[1] - x[0] ** 2)
        gy = 200.0 * (x[1] - x[0] ** 2)
        return s * np.array([gx, gy])

    return Problem(
        name="rosenbrock2d",
        dim=2,
        L=1.0,
        f_star=0.0,
        objective=objective,
        gradient=gradient,
        box=ROSENBROCK_BOX,
    )


def nonconvex_cos(dim: int = 4) -> Problem:
    """f(x) = sum_i x_i^2/2 + cos(x_i); gradient x - sin(x); global L = 2.

    Each coordinate has |f''| = |1 - cos| <= 2.  The per-coordinate
    minimum is COS_WELL_MIN at the origin, so f* = dim * COS_WELL_MIN.
    Despite the wavy landscape the curvature never drops below 0; the
    value of the problem here is its non-quadratic gradient.
    """
    return Problem(
        name="nonconvex_cos",
        dim=dim,
        L=2.0,
        f_star=dim * COS_WELL_MIN,
        objective=lambda x: float(np.sum(0.5 * x * x + np.cos(x))),
        gradient=lambda x: x - np.sin(x),
        box=None,
    )


def quartic_well(dim: int = 2) -> Problem:
    """f(x) = sum_i x_i^4/4 - x_i^2/2: a genuinely nonconvex double well.

    Negative curvature near the origin, minima at +-1 per coordinate
    with value -1/4, so f* = -dim/4.  L = 5.75 is certified on the box
    [-1.5, 1.5]^d; runs must stay inside it.
    """
    return Problem(
        name="quartic_well",
        dim=dim,
        L=QUARTIC_L,
        f_star=-dim / 4.0,
        objective=lambda x: float(np.sum(0.25 * x**4 - 0.5 * x * x)),
        gradient=lambda x: x**3 - x,
        box=QUARTIC_BOX,
    )


def builtin_suite() -> list[Problem]:
    """The four desk problems used by the verification harness."""
    return [quad(dim=2, L=1.0), rosenbrock2d(), nonconvex_cos(dim=4), quartic_well(dim=2)]


_BUILTINS: dict[str, Callable[..., Problem]] = {
    "quad": quad,
    "rosenbrock2d": rosenbrock2d,
    "nonconvex_cos": nonconvex_cos,
    "quartic_well": quartic_well,
}


def problem_from_config(cfg: dict) -> Problem:
    """Build a problem from a run-config entry.

    Builtins are selected by name: ``{"name": "quad", "dim": 4, "L": 2.0}``.
    Custom quadratics use ``{"kind": "quad", "L": ..., "dim": ...}``.
    """
    import inspect

    cfg = dict(cfg)
    name = cfg.pop("name", None) or cfg.pop("kind", None)
    if name is None:
        raise ConfigError(f"problem config needs a 'name' or 'kind': {cfg!r}")
    if name not in _BUILTINS:
        raise ConfigError(f"unknown problem {name!r}; available: {sorted(_BUILTINS)}")
    factory = _BUILTINS[name]
    accepted = set(inspect.signature(factory).parameters)
    kwargs = {}
    want_L = None
    for k, v in cfg.items():
        if k in accepted:
            kwargs[k] = int(v) if k == "dim" else float(v)
        elif k == "L":
            want_L = float(v)  # fixed-L problem: validate below instead
        else:
            raise ConfigError(f"unknown parameter {k!r} for problem {name!r}")
    problem = factory(**kwargs)
    if want_L is not None and abs(problem.L - want_L) > 1e-12:
        raise ConfigError(
            f"problem {name!r} has fixed L = {problem.L}, config asked for L = {want_L}"
        )
    return problem
