"""Uniform box grids, nodal fields and the finite-difference operators."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigError, GridMismatchError


@dataclass(frozen=True)
class Grid:
    """Uniform tensor-product grid; nodes include both box faces."""

    dims: tuple
    spacing: tuple
    origin: tuple

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(n) for n in self.dims))
        object.__setattr__(self, "spacing", tuple(float(h) for h in self.spacing))
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))
        if not (len(self.dims) == len(self.spacing) == len(self.origin)) or not self.dims:
            raise ConfigError("grid dims, spacing and origin must have the same positive length",
                              module="grid")
        if any(n < 3 for n in self.dims):
            raise ConfigError(f"every axis needs at least 3 nodes, got {self.dims}", module="grid")
        if any(not h > 0 for h in self.spacing):
            raise ConfigError(f"grid spacing must be positive, got {self.spacing}", module="grid")

    @classmethod
    def box(cls, lo, hi, nodes):
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        nodes = np.broadcast_to(np.atleast_1d(nodes), lo.shape)
        if np.any(hi <= lo):
            raise ConfigError("box needs lo < hi on every axis", module="grid")
        if np.any(nodes < 3):
            raise ConfigError(f"every axis needs at least 3 nodes, got {tuple(nodes)}", module="grid")
        spacing = (hi - lo) / (nodes - 1)
        return cls(tuple(nodes), tuple(spacing), tuple(lo))

    @property
    def ndim(self):
        return len(self.dims)

    @property
    def size(self):
        return int(np.prod(self.dims))

    @property
    def upper(self):
        return tuple(o + (n - 1) * h for o, n, h in zip(self.origin, self.dims, self.spacing))

    def axis(self, k):
        n, h, o = self.dims[k], self.spacing[k], self.origin[k]
        # end node pinned to the exact upper bound
        x = o + h * np.arange(n)
        x[-1] = self.upper[k]
        return x

    @cached_property
    def coords(self):
        """Coordinate arrays, one per axis, each of shape ``dims``."""
        return tuple(np.meshgrid(*(self.axis(k) for k in range(self.ndim)), indexing="ij"))

    @cached_property
    def boundary_mask(self):
        mask = np.zeros(self.dims, dtype=bool)
        for k in range(self.ndim):
            idx = [slice(None)] * self.ndim
            idx[k] = 0
            mask[tuple(idx)] = True
            idx[k] = -1
            mask[tuple(idx)] = True
        return mask

    @property
    def interior(self):
        return (slice(1, -1),) * self.ndim

    def field(self, values):
        return Field(self, values)

    def constant(self, value):
        return Field(self, np.full(self.dims, float(value)))

    def sample(self, fn):
        """Field from a callable taking per-axis coordinate arrays."""
        return Field(self, np.broadcast_to(np.asarray(fn(*self.coords), dtype=float), self.dims))

    def nodes_list(self):
        return np.stack([c.ravel() for c in self.coords], axis=1)


@dataclass(frozen=True, eq=False)
class Field:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != self.grid.dims:
            raise GridMismatchError(f"values of shape {vals.shape} on grid {self.grid.dims}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def with_values(self, values):
        return Field(self.grid, values)

    def is_finite(self):
        return bool(np.all(np.isfinite(self.values)))

    def __add__(self, other):
        return self.with_values(self.values + _vals(self, other))

    def __sub__(self, other):
        return self.with_values(self.values - _vals(self, other))

    def __mul__(self, other):
        return self.with_values(self.values * _vals(self, other))

    __radd__ = __add__
    __rmul__ = __mul__

    def interpolate(self, x):
        """Multilinear interpolation at point ``x`` (must lie in the box)."""
        return float(multilinear(self.grid, self.values, x))


def _vals(f, other):
    if isinstance(other, Field):
        check_same_grid(f, other)
        return other.values
    return other


def check_same_grid(a, b):
    if a.grid != b.grid:
        raise GridMismatchError(f"fields live on different grids: {a.grid.dims} vs {b.grid.dims}")


def to_field(grid, f):
    if isinstance(f, Field):
        if f.grid != grid:
            raise GridMismatchError("field is not on the requested grid")
        return f
    return Field(grid, np.broadcast_to(np.asarray(f, dtype=float), grid.dims))


def laplacian(f):
    """Five-point (2d+1 in d dimensions) Laplacian; zero on boundary nodes."""
    g = f.grid
    u = f.values
    out = np.zeros(g.dims)
    inner = g.interior
    for k, h in enumerate(g.spacing):
        plus = list(inner)
        minus = list(inner)
        plus[k] = slice(2, None)
        minus[k] = slice(None, -2)
        out[inner] += (u[tuple(plus)] - 2.0 * u[inner] + u[tuple(minus)]) / (h * h)
    return Field(g, out)


def gradient(f):
    """Central differences inside, second-order one-sided on the faces."""
    g = f.grid
    grads = np.gradient(f.values, *g.spacing, edge_order=2)
    if g.ndim == 1:
        grads = [grads]
    return [Field(g, d) for d in grads]


def grad_p_norm(f, p):
    """Pointwise ``|grad f|^p``."""
    sq = sum(d.values ** 2 for d in gradient(f))
    if p == 2:
        return Field(f.grid, sq)
    return Field(f.grid, sq ** (0.5 * p))


def sup_diff(a, b):
    check_same_grid(a, b)
    return float(np.max(np.abs(a.values - b.values)))


def multilinear(grid, values, x):
    """Multilinear interpolation of nodal ``values`` at a point ``x``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    idx = []
    frac = []
    for k in range(grid.ndim):
        s = (x[k] - grid.origin[k]) / grid.spacing[k]
        if s < -1e-9 or s > grid.dims[k] - 1 + 1e-9:
            raise ValueError(f"point {tuple(x)} lies outside the grid box")
        i = min(max(int(np.floor(s)), 0), grid.dims[k] - 2)
        idx.append(i)
        frac.append(min(max(s - i, 0.0), 1.0))
    total = 0.0
    for corner in range(1 << grid.ndim):
        w = 1.0
        node = []
        for k in range(grid.ndim):
            bit = (corner >> k) & 1
            w *= frac[k] if bit else 1.0 - frac[k]
            node.append(idx[k] + bit)
        if w:
            total += w * values[tuple(node)]
    return total


# -- CSV export ----------------------------------------------------------------

def _fmt(v):
    return format(float(v), ".17g")


def _fmt_list(vals):
    return "[" + ", ".join(_fmt(v) if isinstance(v, float) else str(v) for v in vals) + "]"


def write_field_csv(field, path):
    g = field.grid
    lines = [f"# grid: dims={_fmt_list(g.dims)}, spacing={_fmt_list(g.spacing)}, "
             f"origin={_fmt_list(g.origin)}"]
    nodes = g.nodes_list()
    vals = field.values.ravel()
    for pt, v in zip(nodes, vals):
        lines.append(",".join(_fmt(c) for c in pt) + "," + _fmt(v))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_field_csv(path):
    import ast
    import re

    with open(path) as fh:
        header = fh.readline()
        m = re.match(r"# grid: dims=(\[.*?\]), spacing=(\[.*?\]), origin=(\[.*?\])", header)
        if not m:
            raise ConfigError(f"{path}: missing grid header", module="grid")
        dims, spacing, origin = (ast.literal_eval(s) for s in m.groups())
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    grid = Grid(dims, spacing, origin)
    return Field(grid, data[:, -1].reshape(grid.dims))
