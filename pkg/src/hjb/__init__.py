"""Barrier-bracketed successive approximation for stationary HJB equations.

Solves ``-(sigma^2/2) Lap V + C_alpha |grad V|^p - h = 0`` with ``V = g`` on
the boundary of an interval, rectangle or ball, and checks the resulting
feedback control by Monte Carlo.
"""

from .control import MCReport, Policy, feedback_eval, policy_value_gap, simulate_cost
from .errors import (ConfigError, DomainError, ExprEvalError, ExprSyntaxError,
                     GridMismatchError, HJBError, SolverError, StructuralError)
from .expr import Expr, parse
from .grid import Field, Grid
from .iterate import IterationReport, build_barriers, iterate
from .model import Ball, Interval, Problem, Rectangle, hamiltonian_min, optimal_control
from .poisson import solve_poisson, solve_torsion
from .radial import RadialSolution, cross_check_1d, solve_radial

__version__ = "0.1.0"

__all__ = [
    "Ball", "ConfigError", "DomainError", "Expr", "ExprEvalError", "ExprSyntaxError", "Field",
    "Grid", "GridMismatchError", "HJBError", "Interval", "IterationReport", "MCReport",
    "Policy", "Problem", "RadialSolution", "Rectangle", "SolverError", "StructuralError",
    "build_barriers", "cross_check_1d", "feedback_eval", "hamiltonian_min", "iterate",
    "optimal_control", "parse", "policy_value_gap", "simulate_cost", "solve_poisson",
    "solve_radial", "solve_torsion",
]
