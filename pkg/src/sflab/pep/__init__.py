"""Worst-case certification of the three-sequence method by semidefinite
programming over Gram matrices of gradients."""

from .build import PepProblem, Scenario, build, dec_c, inc_c, lin_step_dist, lin_step_grad
from .curve import CurvePoint, curve, dec_weight, fitted_growth_sq, inc_weight, lin_step_weight
from .solve import PepCertificate, PepSolverConfig, solve

__all__ = [
    "Scenario",
    "PepProblem",
    "build",
    "dec_c",
    "inc_c",
    "lin_step_grad",
    "lin_step_dist",
    "PepCertificate",
    "PepSolverConfig",
    "solve",
    "CurvePoint",
    "curve",
    "dec_weight",
    "inc_weight",
    "lin_step_weight",
    "fitted_growth_sq",
]
