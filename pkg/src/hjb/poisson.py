"""Dirichlet solves of ``-(sigma^2/2) Lap u = f`` with constant boundary value.

Writing ``u = g + w`` turns every solve into a homogeneous problem for ``w``,
so the right-hand side is exactly the interior samples of ``f``.  One axis
uses banded elimination; more axes use conjugate gradients on the SPD
interior operator.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.linalg import solve_banded
from scipy.sparse.linalg import cg

from .errors import ConfigError, SolverError
from .grid import Field, Grid, to_field


@dataclass(frozen=True)
class LinearSolveSettings:
    rel_residual_tol: float = 1e-10
    max_linear_iters: int | None = None  # default: 10 x total nodes

    def __post_init__(self):
        if not self.rel_residual_tol > 0:
            raise ConfigError("rel_residual_tol must be positive", module="poisson")
        if self.max_linear_iters is not None and self.max_linear_iters < 1:
            raise ConfigError("max_linear_iters must be at least 1", module="poisson")

    def iters_for(self, grid):
        return self.max_linear_iters or 10 * grid.size


@dataclass(frozen=True, eq=False)
class TorsionField:
    phi: Field
    max_phi: float
    boundary_check: float


@lru_cache(maxsize=32)
def _negative_laplacian(grid: Grid):
    """Sparse ``-Lap_h`` restricted to interior nodes (C order)."""
    ops = []
    sizes = [n - 2 for n in grid.dims]
    for k, (m, h) in enumerate(zip(sizes, grid.spacing)):
        d = sp.diags([-np.ones(m - 1), 2.0 * np.ones(m), -np.ones(m - 1)], [-1, 0, 1]) / (h * h)
        term = None
        for j, mj in enumerate(sizes):
            factor = d if j == k else sp.identity(mj)
            term = factor if term is None else sp.kron(term, factor)
        ops.append(term)
    return sum(ops[1:], ops[0]).tocsr()


def _interior_residual(grid, coef, w_int, f_int):
    """``||f + coef * Lap_h w|| / ||f||`` for a homogeneous-boundary ``w``."""
    if grid.ndim == 1:
        h2 = grid.spacing[0] ** 2
        w = np.concatenate([[0.0], w_int, [0.0]])
        lap = (w[2:] - 2.0 * w[1:-1] + w[:-2]) / h2
        r = f_int + coef * lap
    else:
        r = f_int - coef * (_negative_laplacian(grid) @ w_int)
    fn = np.linalg.norm(f_int)
    rn = np.linalg.norm(r)
    return rn / fn if fn > 0 else rn


def _solve_homogeneous(grid, f_int, coef, settings, w0=None):
    """Interior solution of ``-coef Lap w = f``, ``w = 0`` on the boundary."""
    if not np.any(f_int):
        return np.zeros_like(f_int), 0.0
    if grid.ndim == 1:
        m = f_int.size
        k = coef / grid.spacing[0] ** 2
        ab = np.empty((3, m))
        ab[0, :] = -k
        ab[1, :] = 2.0 * k
        ab[2, :] = -k
        w = solve_banded((1, 1), ab, f_int)
        return w, _interior_residual(grid, coef, w, f_int)
    A = _negative_laplacian(grid)
    b = f_int / coef
    maxiter = settings.iters_for(grid)
    tol = settings.rel_residual_tol
    w = w0
    # restarts guard against drift between the recursive and true residual
    for _ in range(4):
        w, info = cg(A, b, x0=w, rtol=tol, atol=0.0, maxiter=maxiter)
        res = _interior_residual(grid, coef, w, f_int)
        if info < 0:
            break
        if res <= tol:
            return w, res
        if info > 0:
            break
    raise SolverError(f"conjugate gradients did not converge within {maxiter} iterations", res)


def _solve(grid, f, coef, g, settings, guess=None):
    settings = settings or LinearSolveSettings()
    f = to_field(grid, f)
    inner = grid.interior
    f_int = np.ascontiguousarray(f.values[inner]).ravel()
    w0 = None
    if guess is not None:
        w0 = np.ascontiguousarray(to_field(grid, guess).values[inner]).ravel() - g
    w, res = _solve_homogeneous(grid, f_int, coef, settings, w0)
    u = np.full(grid.dims, float(g))
    u[inner] = g + w.reshape([n - 2 for n in grid.dims])
    return Field(grid, u), res


def solve_poisson(grid, f, sigma, g, settings=None, guess=None):
    """Solve ``-(sigma^2/2) Lap u = f`` inside, ``u = g`` on the boundary.

    ``f`` is read at interior nodes only.  ``guess`` warm-starts the
    iterative path and is ignored in 1-d.
    """
    if not sigma > 0:
        raise ConfigError("sigma must be positive", module="poisson")
    u, _ = _solve(grid, f, 0.5 * sigma * sigma, g, settings, guess)
    return u


def solve_torsion(grid, settings=None):
    """Torsion function: ``-Lap phi = 1`` inside, ``phi = 0`` on the boundary."""
    phi, _ = _solve(grid, 1.0, 1.0, 0.0, settings)
    vals = phi.values
    interior = vals[grid.interior]
    if not np.all(interior > 0):
        raise SolverError("torsion function is not positive at every interior node",
                          float("nan"))
    bcheck = float(np.max(np.abs(vals[grid.boundary_mask])))
    return TorsionField(phi=phi, max_phi=float(vals.max()), boundary_check=bcheck)
