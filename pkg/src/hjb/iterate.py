"""Barrier construction and the successive-approximation solver.

Each step freezes the gradient term at the previous iterate and solves a
linear Dirichlet problem::

    -(sigma^2/2) Lap V_{k+1} = h - C_alpha |grad V_k|^p,   V_{k+1} = g on the boundary

starting from the super-solution ``g + B phi`` with ``B = 2H/sigma^2``.
Every step records whether the new iterate kept below the previous one
(``monotone_ok``) and whether it stayed inside ``[g, g + B phi]``
(``bracket_ok``).
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, StructuralError
from .grid import Field, grad_p_norm, sup_diff
from .model import interior_values, pde_residual
from .poisson import LinearSolveSettings, solve_poisson, solve_torsion

logger = logging.getLogger(__name__)

DEFAULT_EPS = 1e-8
DEFAULT_MAX_ITERS = 500
MONO_REL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Barriers:
    v_minus: Field
    v_plus: Field
    B: float
    H: float
    phi: Field


@dataclass(frozen=True)
class StepRecord:
    k: int
    sup_diff: float
    max_residual: float
    min_V: float
    max_V: float
    monotone_ok: bool
    bracket_ok: bool
    # largest increase over the previous iterate (positive means a violation)
    max_increase: float = 0.0


@dataclass(eq=False)
class IterationReport:
    V: Field
    per_step: list = field(default_factory=list)
    converged: bool = False
    steps: int = 0
    eps: float = DEFAULT_EPS
    tol_mono: float = 0.0
    barriers: Barriers | None = None
    history: list | None = None

    @property
    def final_sup_diff(self):
        return self.per_step[-1].sup_diff if self.per_step else float("nan")

    @property
    def max_residual(self):
        return self.per_step[-1].max_residual if self.per_step else float("nan")

    @property
    def monotone_ok(self):
        return all(s.monotone_ok for s in self.per_step)

    @property
    def bracket_ok(self):
        return all(s.bracket_ok for s in self.per_step)

    def monotone_violations(self):
        return [s.k for s in self.per_step if not s.monotone_ok]

    def write_convergence_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "sup_diff", "max_residual", "min_V", "max_V"])
            for s in self.per_step:
                w.writerow([s.k] + [format(v, ".17g") for v in
                                    (s.sup_diff, s.max_residual, s.min_V, s.max_V)])


def build_barriers(problem, grid, settings=None, B=None):
    """Sub-solution ``g`` and super-solution ``g + B phi``.

    ``B`` defaults to ``2H/sigma^2`` with ``H`` the largest sampled value of
    ``h``; a larger ``B`` may be passed, a smaller one is rejected.
    """
    h = problem.h_field(grid)
    H = float(h.values.max())
    B_min = 2.0 * H / problem.sigma ** 2
    if B is None:
        B = B_min
    elif B < B_min:
        raise ConfigError(f"B = {B} is below the admissible minimum 2H/sigma^2 = {B_min}",
                          module="iterate")
    tf = solve_torsion(grid, settings)
    g = problem.g
    v_minus = grid.constant(g)
    v_plus = Field(grid, g + B * tf.phi.values)
    mask = grid.boundary_mask
    if not (np.all(v_minus.values <= v_plus.values)
            and np.array_equal(v_plus.values[mask], v_minus.values[mask])):
        raise StructuralError("barriers are not ordered with equality on the boundary")
    return Barriers(v_minus=v_minus, v_plus=v_plus, B=float(B), H=H, phi=tf.phi)


# overflow is caught by the finiteness checks, which raise StructuralError
@np.errstate(over="ignore", invalid="ignore")
def iterate(problem, grid, eps=DEFAULT_EPS, max_iters=DEFAULT_MAX_ITERS, settings=None,
            barriers=None, keep_history=False, strict=False):
    """Run the successive-approximation scheme from the super-solution.

    A step that rises above its predecessor by more than ``tol_mono`` is
    recorded with ``monotone_ok=False``; one that leaves ``[g, g + B phi]``
    by more than ``tol_mono`` is recorded with ``bracket_ok=False``.  Both
    are logged once per kind.  With ``strict=True`` either raises
    :class:`StructuralError` instead.
    """
    if not eps > 0:
        raise ConfigError("eps must be positive", module="iterate")
    if max_iters < 1:
        raise ConfigError("max_iters must be at least 1", module="iterate")
    settings = settings or LinearSolveSettings()
    if barriers is None:
        barriers = build_barriers(problem, grid, settings)
    h = problem.h_field(grid)
    V = barriers.v_plus
    tol_mono = MONO_REL_TOL * (1.0 + float(np.max(np.abs(V.values))))
    report = IterationReport(V=V, eps=eps, tol_mono=tol_mono, barriers=barriers,
                             history=[V] if keep_history else None)
    lo = barriers.v_minus.values - tol_mono
    hi = barriers.v_plus.values + tol_mono
    warned = set()
    for k in range(1, max_iters + 1):
        source = h.values - problem.c_alpha * grad_p_norm(V, problem.p).values
        if not np.all(np.isfinite(source)):
            raise StructuralError(f"step {k}: the iteration diverged (gradient term overflowed)")
        V_new = solve_poisson(grid, source, problem.sigma, problem.g, settings, guess=V)
        if not V_new.is_finite():
            raise StructuralError(f"step {k} produced non-finite values")
        diff = sup_diff(V_new, V)
        increase = float(np.max(V_new.values - V.values))
        monotone = increase <= tol_mono
        bracket = bool(np.all(V_new.values >= lo) and np.all(V_new.values <= hi))
        resid = float(np.max(np.abs(interior_values(pde_residual(problem, V_new, h)))))
        report.per_step.append(StepRecord(k, diff, resid, float(V_new.values.min()),
                                          float(V_new.values.max()), monotone, bracket,
                                          increase))
        problems = []
        if not bracket:
            problems.append(("bracket",
                             f"step {k} left the barrier bracket [g, g + B phi] "
                             f"(min {V_new.values.min():.6g}, max {V_new.values.max():.6g})"))
        if not monotone:
            problems.append(("monotone",
                             f"step {k} increased the iterate by {increase:.3e} "
                             f"(tol {tol_mono:.3e})"))
        if problems:
            if strict:
                raise StructuralError("; ".join(m for _, m in problems))
            for kind, msg in problems:
                if kind not in warned:
                    logger.warning("%s; further violations are recorded in the report", msg)
                    warned.add(kind)
        V = V_new
        if keep_history:
            report.history.append(V)
        if diff < eps:
            report.converged = True
            break
    report.V = V
    report.steps = len(report.per_step)
    return report


def check_supersolution(problem, field):
    """Smallest interior residual; ``>= -tol`` certifies a super-solution."""
    return float(np.min(interior_values(pde_residual(problem, field))))


def check_subsolution(problem, field):
    """Largest interior residual; ``<= tol`` certifies a sub-solution."""
    return float(np.max(interior_values(pde_residual(problem, field))))
