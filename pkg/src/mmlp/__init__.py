"""Primal-dual majorization-minimization solver for linear programs.

The dual-form problem ``min -b'y s.t. A'y <= c`` is solved through a smooth
barrier augmented Lagrangian; the multipliers ``x`` solve the standard
form ``min c'x s.t. Ax = b, x >= 0``.
"""

from ._backend import BACKEND
from .factorization import GramFactor, RankDeficient, factorize
from .model import DualLP, StandardLP, ValidationError, dual_of, primal_of, validate
from .solver import SolveOutcome, SolverConfig, Status, outer_solve

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DualLP",
    "GramFactor",
    "RankDeficient",
    "SolveOutcome",
    "SolverConfig",
    "StandardLP",
    "Status",
    "ValidationError",
    "dual_of",
    "factorize",
    "outer_solve",
    "primal_of",
    "validate",
]
