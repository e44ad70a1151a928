"""Radial reduction on balls.

For a ball of radius ``R`` in ``N`` dimensions and a source depending on
``r`` only, the solution is ``V(x) = u(|x - c|)`` with

    -(sigma^2/2) (u'' + (N-1)/r u') + C_alpha |u'|^p - h(r) = 0,
    u'(0) = 0,  u(R) = g.

The origin row uses the limit ``u'' + (N-1)/r u' -> N u''(0)`` with the
mirror node ``u(-dr) = u(dr)``.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .errors import ConfigError, StructuralError
from .grid import Field, Grid
from .iterate import DEFAULT_EPS, DEFAULT_MAX_ITERS, MONO_REL_TOL, IterationReport, StepRecord
from .model import Ball, Interval

logger = logging.getLogger(__name__)


def radial_torsion(r, R, N):
    """Closed-form ball torsion function ``(R^2 - r^2) / (2N)``."""
    return (R * R - np.asarray(r, dtype=float) ** 2) / (2.0 * N)


def radial_derivative(u, dr):
    """Nodal ``u'``: zero at the origin, central inside, one-sided at ``R``."""
    d = np.empty_like(u)
    d[0] = 0.0
    d[1:-1] = (u[2:] - u[:-2]) / (2.0 * dr)
    d[-1] = (3.0 * u[-1] - 4.0 * u[-2] + u[-3]) / (2.0 * dr)
    return d


def _radial_matrix(n, dr, N, coef):
    """Banded form of ``-coef (u'' + (N-1)/r u')`` with rows 0..n-2.

    The last unknown ``u_{n-1} = g`` is eliminated by the caller.
    """
    m = n - 1
    ab = np.zeros((3, m))
    k = coef / (dr * dr)
    # origin row: -coef * 2N (u1 - u0) / dr^2
    ab[1, 0] = 2.0 * N * k
    if m > 1:
        ab[0, 1] = -2.0 * N * k
    i = np.arange(1, m)
    a = (N - 1) / (2.0 * i)  # (N-1)/r_i * dr/2
    # row i: -k[(1 - a) u_{i-1} - 2 u_i + (1 + a) u_{i+1}]
    ab[1, 1:] = 2.0 * k
    ab[2, :m - 1] = -k * (1.0 - a)      # sub-diagonal entry for row i sits at column i-1
    upper = -k * (1.0 + a)              # coefficient of u_{i+1}
    ab[0, 2:] = upper[:-1]
    return ab


def _radial_apply(u, dr, N, coef):
    """``-coef (u'' + (N-1)/r u')`` at rows 0..n-2."""
    out = np.empty(u.size - 1)
    k = coef / (dr * dr)
    out[0] = -coef * 2.0 * N * (u[1] - u[0]) / (dr * dr)
    i = np.arange(1, u.size - 1)
    a = (N - 1) / (2.0 * i)
    out[1:] = -k * ((1.0 - a) * u[:-2] - 2.0 * u[1:-1] + (1.0 + a) * u[2:])
    return out


@dataclass(eq=False)
class RadialSolution:
    r_nodes: np.ndarray
    u: np.ndarray
    N: int
    center: np.ndarray
    radius: float
    g: float
    report: IterationReport
    B: float = float("nan")
    H: float = float("nan")

    @property
    def du(self):
        return radial_derivative(self.u, self.r_nodes[1] - self.r_nodes[0])

    @property
    def origin_slope(self):
        """Second-order one-sided ``u'(0)``; should vanish."""
        dr = self.r_nodes[1] - self.r_nodes[0]
        return float((-3.0 * self.u[0] + 4.0 * self.u[1] - self.u[2]) / (2.0 * dr))

    def profile(self, r):
        r = np.asarray(r, dtype=float)
        return np.interp(r, self.r_nodes, self.u)

    def reconstruct(self, x):
        """``V(x) = u(|x - center|)`` by linear interpolation in ``r``."""
        d = np.atleast_1d(np.asarray(x, dtype=float))
        if d.size != self.N:
            raise ValueError(f"point has dimension {d.size}, ball has {self.N}")
        d = d - self.center
        r = float(np.sqrt(np.dot(d, d)))
        if r > self.radius * (1 + 1e-12):
            raise ValueError(f"point {tuple(np.atleast_1d(x))} lies outside the ball")
        if r >= self.radius:
            return self.g
        return float(np.interp(r, self.r_nodes, self.u))

    def write_profile_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["r", "u"])
            for r, u in zip(self.r_nodes, self.u):
                w.writerow([format(r, ".17g"), format(u, ".17g")])


def _radial_source(problem, r):
    h = problem.h
    if not h.is_radial():
        raise ConfigError(
            f"source {h.source!r} references {sorted(h.variables() - {'r'})}; "
            "a radial problem may use only r", module="radial")
    # evaluate along the first axis from the center; only r is referenced
    coords = [np.zeros_like(r) for _ in range(problem.dim)]
    coords[0] = r
    vals = h.evaluate_array(coords)
    if np.any(vals < 0):
        raise ConfigError("source h is negative somewhere on [0, R]", module="model")
    return vals


# overflow is caught by the finiteness checks, which raise StructuralError
@np.errstate(over="ignore", invalid="ignore")
def solve_radial(problem, nodes, eps=DEFAULT_EPS, max_iters=DEFAULT_MAX_ITERS, strict=False,
                 B=None):
    """Successive approximation for the radial profile on ``[0, R]``."""
    if not isinstance(problem.domain, Ball):
        raise ConfigError("solve_radial needs a ball domain", module="radial")
    if nodes < 3:
        raise ConfigError("radial solve needs at least 3 nodes", module="radial")
    if not eps > 0 or max_iters < 1:
        raise ConfigError("eps must be positive and max_iters at least 1", module="radial")
    R = problem.domain.radius
    N = problem.dim
    r = np.linspace(0.0, R, nodes)
    dr = r[1] - r[0]
    h = _radial_source(problem, r)
    H = float(h.max())
    sigma, g = problem.sigma, problem.g
    B_min = 2.0 * H / sigma ** 2
    if B is None:
        B = B_min
    elif B < B_min:
        raise ConfigError(f"B = {B} is below 2H/sigma^2 = {B_min}", module="radial")
    phi = radial_torsion(r, R, N)
    phi[-1] = 0.0
    v_plus = g + B * phi
    coef = 0.5 * sigma * sigma
    ab = _radial_matrix(nodes, dr, N, coef)
    tol_mono = MONO_REL_TOL * (1.0 + float(np.max(np.abs(v_plus))))
    lo, hi = g - tol_mono, v_plus + tol_mono

    rgrid = Grid((nodes,), (dr,), (0.0,))
    report = IterationReport(V=Field(rgrid, v_plus), eps=eps, tol_mono=tol_mono)
    u = v_plus
    warned = set()
    for k in range(1, max_iters + 1):
        du = radial_derivative(u, dr)
        src = h[:-1] - problem.c_alpha * np.abs(du[:-1]) ** problem.p
        if not np.all(np.isfinite(src)):
            raise StructuralError(f"radial step {k}: the iteration diverged "
                                  "(gradient term overflowed)", module="radial")
        # homogeneous shift u = g + w: the radial operator kills constants
        w = solve_banded((1, 1), ab, src)
        u_new = np.empty(nodes)
        u_new[:-1] = g + w
        u_new[-1] = g
        if not np.all(np.isfinite(u_new)):
            raise StructuralError(f"radial step {k} produced non-finite values", module="radial")
        diff = float(np.max(np.abs(u_new - u)))
        increase = float(np.max(u_new - u))
        monotone = increase <= tol_mono
        bracket = bool(np.all(u_new >= lo) and np.all(u_new <= hi))
        du_new = radial_derivative(u_new, dr)
        resid = (_radial_apply(u_new, dr, N, coef)
                 + problem.c_alpha * np.abs(du_new[:-1]) ** problem.p - h[:-1])
        report.per_step.append(StepRecord(k, diff, float(np.max(np.abs(resid))),
                                          float(u_new.min()), float(u_new.max()),
                                          monotone, bracket, increase))
        problems = []
        if not bracket:
            problems.append(("bracket",
                             f"radial step {k} left the barrier bracket [g, g + B phi]"))
        if not monotone:
            problems.append(("monotone",
                             f"radial step {k} increased the iterate by {increase:.3e} "
                             f"(tol {tol_mono:.3e})"))
        if problems:
            if strict:
                raise StructuralError("; ".join(m for _, m in problems), module="radial")
            for kind, msg in problems:
                if kind not in warned:
                    logger.warning("%s; further violations are recorded in the report", msg)
                    warned.add(kind)
        u = u_new
        if diff < eps:
            report.converged = True
            break
    report.V = Field(rgrid, u)
    report.steps = len(report.per_step)
    return RadialSolution(r_nodes=r, u=u, N=N, center=problem.domain.center, radius=R,
                          g=g, report=report, B=float(B), H=H)


def interval_problem(problem):
    """The same problem posed on the interval ``(c - R, c + R)`` (N = 1 only)."""
    if not isinstance(problem.domain, Ball) or problem.dim != 1:
        raise ConfigError("cross-check needs a one-dimensional ball", module="radial")
    c = float(problem.domain.center[0])
    R = problem.domain.radius
    return problem.with_(domain=Interval(c - R, c + R))


def cross_check_1d(problem, nodes=401, eps=DEFAULT_EPS, max_iters=DEFAULT_MAX_ITERS,
                   radial=None):
    """Sup difference between the radial and interval solvers on shared nodes.

    The interval solver uses ``2*nodes - 1`` nodes so that every interval
    node sits on a radial node.
    """
    from .iterate import iterate

    if radial is None:
        radial = solve_radial(problem, nodes, eps, max_iters)
    nodes = radial.r_nodes.size
    iprob = interval_problem(problem)
    grid = iprob.grid(2 * nodes - 1)
    rep = iterate(iprob, grid, eps, max_iters)
    x = grid.axis(0)
    c = float(problem.domain.center[0])
    recon = np.array([radial.reconstruct([min(max(xi, c - radial.radius), c + radial.radius)])
                      for xi in x])
    return float(np.max(np.abs(recon - rep.V.values)))
