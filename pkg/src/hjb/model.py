"""Problem definition, the Legendre-transform Hamiltonian and the feedback law.

The PDE is ``-(sigma^2/2) Lap V + C_alpha |grad V|^p - h = 0`` with
``V = g`` on the boundary, where ``p = alpha/(alpha-1)`` and
``C_alpha = (alpha-1)/alpha^p``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import expr as _expr
from .errors import ConfigError, DomainError, GridMismatchError
from .grid import Field, Grid, grad_p_norm, laplacian


def _check_alpha(alpha):
    if not (isinstance(alpha, (int, float, np.floating)) and 1.0 < alpha <= 2.0):
        raise DomainError(f"alpha must lie in the interval (1, 2], got {alpha!r}")


def conjugate_exponent(alpha):
    """Hoelder conjugate ``p = alpha/(alpha-1)``; ``p >= 2`` on (1, 2]."""
    _check_alpha(alpha)
    return alpha / (alpha - 1.0)


def cost_constant(alpha):
    """``C_alpha = (alpha-1)/alpha^p``; equals 1/4 at alpha = 2."""
    p = conjugate_exponent(alpha)
    return (alpha - 1.0) / alpha ** p


def hamiltonian_min(xi, alpha):
    """Exact value of ``inf_v { xi.v + |v|^alpha }``, i.e. ``-C_alpha |xi|^p``."""
    p = conjugate_exponent(alpha)
    norm = float(np.linalg.norm(np.atleast_1d(np.asarray(xi, dtype=float))))
    return -cost_constant(alpha) * norm ** p


def optimal_control(xi, alpha):
    """Unique minimizer of ``v -> xi.v + |v|^alpha``.

    Solves ``xi + alpha |v|^(alpha-2) v = 0``: the minimizer points along
    ``-xi`` with length ``(|xi|/alpha)^(1/(alpha-1))``.  Returns the zero
    vector at ``xi = 0``.
    """
    _check_alpha(alpha)
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    norm = float(np.linalg.norm(xi))
    if norm == 0.0:
        return np.zeros_like(xi)
    length = (norm / alpha) ** (1.0 / (alpha - 1.0))
    return -(length / norm) * xi


# -- domains -------------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ConfigError(f"interval needs a < b, got ({self.a}, {self.b})", module="model")

    @property
    def dim(self):
        return 1

    @property
    def center(self):
        return np.array([0.5 * (self.a + self.b)])

    @property
    def lo(self):
        return np.array([float(self.a)])

    @property
    def hi(self):
        return np.array([float(self.b)])

    def contains(self, x):
        x = np.atleast_1d(x)
        return bool(self.a < x[0] < self.b)

    def to_dict(self):
        return {"type": "interval", "a": self.a, "b": self.b}


@dataclass(frozen=True)
class Rectangle:
    lo_: tuple
    hi_: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo_)
        hi = tuple(float(v) for v in self.hi_)
        if len(lo) != len(hi) or not lo:
            raise ConfigError("rectangle corners must have equal, positive length", module="model")
        if any(a >= b for a, b in zip(lo, hi)):
            raise ConfigError(f"rectangle needs lo < hi componentwise, got {lo}, {hi}",
                              module="model")
        object.__setattr__(self, "lo_", lo)
        object.__setattr__(self, "hi_", hi)

    @property
    def dim(self):
        return len(self.lo_)

    @property
    def lo(self):
        return np.array(self.lo_)

    @property
    def hi(self):
        return np.array(self.hi_)

    @property
    def center(self):
        return 0.5 * (self.lo + self.hi)

    def contains(self, x):
        x = np.atleast_1d(x)
        return bool(np.all((self.lo < x) & (x < self.hi)))

    def to_dict(self):
        return {"type": "rectangle", "lo": list(self.lo_), "hi": list(self.hi_)}


@dataclass(frozen=True)
class Ball:
    center_: tuple
    radius: float

    def __post_init__(self):
        c = tuple(float(v) for v in np.atleast_1d(self.center_))
        if not c:
            raise ConfigError("ball center must have at least one coordinate", module="model")
        if not self.radius > 0:
            raise ConfigError(f"ball radius must be positive, got {self.radius}", module="model")
        object.__setattr__(self, "center_", c)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return len(self.center_)

    @property
    def center(self):
        return np.array(self.center_)

    @property
    def lo(self):
        return self.center - self.radius

    @property
    def hi(self):
        return self.center + self.radius

    def contains(self, x):
        d = np.atleast_1d(x) - self.center
        return bool(np.dot(d, d) < self.radius ** 2)

    def to_dict(self):
        return {"type": "ball", "center": list(self.center_), "radius": self.radius}


DomainSpec = Interval | Rectangle | Ball


def domain_from_dict(d):
    kind = d.get("type")
    if kind == "interval":
        return Interval(float(d["a"]), float(d["b"]))
    if kind == "rectangle":
        return Rectangle(tuple(d["lo"]), tuple(d["hi"]))
    if kind == "ball":
        return Ball(tuple(d["center"]), float(d["radius"]))
    raise ConfigError(f"unknown domain type {kind!r}", module="model")


# -- problem -------------------------------------------------------------------

@dataclass(frozen=True)
class Problem:
    """One Dirichlet problem instance.  ``h`` may be an :class:`Expr`,
    an expression string, or a number (constant source)."""

    alpha: float
    sigma: float
    domain: DomainSpec
    h: object = 0.0
    g: float = 0.0
    p: float = field(init=False)
    c_alpha: float = field(init=False)

    def __post_init__(self):
        _check_alpha(self.alpha)
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma!r}")
        if not self.g >= 0:
            raise DomainError(f"boundary datum g must be non-negative, got {self.g!r}")
        h = self.h
        n = self.domain.dim
        if isinstance(h, (int, float)):
            h = _expr.constant(float(h), n)
        elif isinstance(h, str):
            h = _expr.parse(h, n)
        elif not isinstance(h, _expr.Expr):
            raise ConfigError("h must be an expression, expression string or number",
                              module="model")
        if h.n_vars != n:
            raise ConfigError(f"h is declared over {h.n_vars} variables, domain has {n}",
                              module="model")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "g", float(self.g))
        object.__setattr__(self, "p", conjugate_exponent(self.alpha))
        object.__setattr__(self, "c_alpha", cost_constant(self.alpha))

    @property
    def dim(self):
        return self.domain.dim

    def with_(self, **changes):
        kw = dict(alpha=self.alpha, sigma=self.sigma, domain=self.domain, h=self.h, g=self.g)
        kw.update(changes)
        return Problem(**kw)

    def h_at(self, x):
        return self.h.evaluate(x, self.domain.center)

    def h_field(self, grid):
        """Samples of ``h`` on every node, checked to be finite and >= 0."""
        vals = self.h.evaluate_array(grid.coords, self.domain.center)
        if np.any(vals < 0):
            i = np.unravel_index(int(np.argmin(vals)), vals.shape)
            pt = tuple(float(c[i]) for c in grid.coords)
            raise ConfigError(f"source h is negative ({vals[i]:.6g}) at {pt}", module="model")
        return Field(grid, vals)

    def grid(self, nodes):
        if isinstance(self.domain, Ball):
            raise ConfigError("ball domains are solved by the radial module", module="grid")
        return Grid.box(self.domain.lo, self.domain.hi, nodes)


def pde_residual(problem, V, h=None):
    """Discrete residual ``-(sigma^2/2) Lap_h V + C|grad_h V|^p - h``.

    Interior values only; boundary entries are zero.
    """
    if not isinstance(V, Field):
        raise GridMismatchError("pde_residual needs a Field")
    grid = V.grid
    if grid.ndim != problem.dim:
        raise GridMismatchError(f"field has {grid.ndim} axes, problem has {problem.dim}")
    if h is None:
        h = problem.h_field(grid)
    res = (-0.5 * problem.sigma ** 2 * laplacian(V).values
           + problem.c_alpha * grad_p_norm(V, problem.p).values
           - h.values)
    res[grid.boundary_mask] = 0.0
    return Field(grid, res)


def interior_values(f):
    return f.values[f.grid.interior]


def running_cost(v, alpha):
    """``|v|^alpha`` for a control vector."""
    return float(np.linalg.norm(v)) ** alpha


def legendre_plugback(xi, alpha):
    """``xi.v* + |v*|^alpha`` at the closed-form minimizer."""
    v = optimal_control(xi, alpha)
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    return float(np.dot(xi, v)) + float(np.linalg.norm(v)) ** alpha


__all__ = [
    "Ball", "DomainSpec", "Interval", "Problem", "Rectangle", "conjugate_exponent",
    "cost_constant", "domain_from_dict", "hamiltonian_min", "legendre_plugback",
    "optimal_control", "pde_residual", "running_cost",
]
