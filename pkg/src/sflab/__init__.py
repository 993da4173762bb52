"""sflab: a desk-scale laboratory for schedule-free first-order methods.

Trajectories of the three-sequence iteration and its momentum twins,
potential-based descent certificates and rate bounds evaluated along
real runs, and worst-case performance certification via Gram-matrix
semidefinite programs.
"""

__version__ = "0.1.0"

from . import harness, lyapunov, optimizers, pep, problems, schedules  # noqa: F401
from .errors import (  # noqa: F401
    ConfigError,
    DomainEscapeError,
    MapInfeasibleError,
    NonFiniteGradientError,
    SfLabError,
    UndefinedCoefficientError,
)
