"""Monte Carlo verification of the feedback law.

Paths follow ``dX = v(X) dt + sigma dW`` by Euler-Maruyama until the first
step that lands outside the open domain.  Each path pays
``sum (h(X_n) + |v(X_n)|^alpha) dt`` plus the exit cost ``g``.

Path ``i`` draws its normals from its own generator derived from
``(seed, i)``, and costs are reduced in index order with ``math.fsum``, so a
report depends only on ``(seed, n_paths, dt, policy)`` and not on how many
workers ran it.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import _jsonio
from . import expr as _expr
from . import kernels
from .errors import ConfigError, DomainError
from .grid import Field, gradient, multilinear
from .iterate import IterationReport
from .kernels import _common as kc
from .model import Ball, optimal_control
from .radial import RadialSolution

MAX_STEPS = 10 ** 6          # hard cap T_max = MAX_STEPS * dt
CAP_FRACTION = 1e-3          # reports with more capped paths than this are invalid
CHUNK = 256                  # paths per work item
ADMISSIBILITY_SAMPLES = 4096


@dataclass(frozen=True, eq=False)
class Policy:
    """A feedback control ``x -> v(x)``.

    Build with :meth:`zero`, :meth:`constant`, :meth:`optimal` or
    :meth:`custom`.
    """

    kind: str
    name: str
    drift: np.ndarray | None = None
    field: Field | None = None
    grad: np.ndarray | None = None
    radial: RadialSolution | None = None
    exprs: tuple = ()

    @classmethod
    def zero(cls):
        return cls("zero", "zero")

    @classmethod
    def constant(cls, drift, name=None):
        d = np.atleast_1d(np.asarray(drift, dtype=float)).copy()
        if not np.all(np.isfinite(d)):
            raise ConfigError("constant drift must be finite", module="control")
        d.setflags(write=False)
        label = "constant(" + ", ".join(format(v, "g") for v in d) + ")"
        return cls("constant", name or label, drift=d)

    @classmethod
    def optimal(cls, solution, name="optimal"):
        """Feedback ``v*`` from a converged grid or radial solution."""
        if isinstance(solution, IterationReport):
            if not solution.converged:
                raise ConfigError("optimal policy needs a converged solution", module="control")
            solution = solution.V
        if isinstance(solution, RadialSolution):
            if not solution.report.converged:
                raise ConfigError("optimal policy needs a converged solution", module="control")
            return cls("radial", name, radial=solution)
        if not isinstance(solution, Field):
            raise ConfigError("optimal policy needs a Field, IterationReport or RadialSolution",
                              module="control")
        grad = np.stack([d.values.ravel() for d in gradient(solution)])
        grad.setflags(write=False)
        return cls("grid", name, field=solution, grad=grad)

    @classmethod
    def custom(cls, components, n_vars=None, name="custom"):
        """Drift given componentwise by expressions in ``x1..xN`` and ``r``."""
        comps = [components] if isinstance(components, (str, _expr.Expr)) else list(components)
        n = n_vars if n_vars is not None else len(comps)
        exprs = tuple(c if isinstance(c, _expr.Expr) else _expr.parse(c, n) for c in comps)
        if len(exprs) != n or any(e.n_vars != n for e in exprs):
            raise ConfigError(f"custom policy needs {n} components over {n} variables",
                              module="control")
        return cls("custom", name, exprs=exprs)

    @property
    def dim(self):
        if self.kind == "constant":
            return self.drift.size
        if self.kind == "grid":
            return self.field.grid.ndim
        if self.kind == "radial":
            return self.radial.N
        if self.kind == "custom":
            return len(self.exprs)
        return None


@dataclass(frozen=True)
class MCReport:
    mean_cost: float
    std_error: float
    n_paths: int
    dt: float
    mean_exit_time: float
    max_exit_time: float
    seed: int
    capped_paths: int = 0

    @property
    def valid(self):
        return self.capped_paths <= CAP_FRACTION * self.n_paths

    def to_dict(self):
        d = asdict(self)
        d["valid"] = self.valid
        return d

    def to_json(self):
        return _jsonio.dumps(self.to_dict())

    def write_json(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json())


def _sample_domain(domain, n, rng):
    """Uniform samples in the closed domain plus its center and corner/pole points."""
    lo, hi = domain.lo, domain.hi
    pts = rng.uniform(lo, hi, size=(n, domain.dim))
    if isinstance(domain, Ball):
        d = pts - domain.center
        r = np.sqrt(np.sum(d * d, axis=1))
        scale = np.where(r > domain.radius, domain.radius / np.where(r == 0, 1, r), 1.0)
        pts = domain.center + d * scale[:, None]
        poles = [domain.center + s * domain.radius * e
                 for e in np.eye(domain.dim) for s in (-1.0, 1.0)]
        return np.vstack([pts, poles, domain.center])
    corners = np.array([[hi[k] if (c >> k) & 1 else lo[k] for k in range(domain.dim)]
                        for c in range(1 << domain.dim)])
    return np.vstack([pts, corners, domain.center])


def check_admissible(problem, policy, n_samples=ADMISSIBILITY_SAMPLES):
    """Sampled boundedness check for custom policies; returns the sup of ``|v|``.

    Custom drifts are accepted only if they evaluate to finite values on
    samples of the closed domain, a practical stand-in for integrability.
    """
    if policy.kind != "custom":
        return None
    pts = _sample_domain(problem.domain, n_samples, np.random.default_rng(0))
    coords = [pts[:, k] for k in range(problem.dim)]
    try:
        v = np.column_stack([e.evaluate_array(coords, problem.domain.center)
                             for e in policy.exprs])
    except _expr.ExprEvalError as exc:
        raise ConfigError(f"custom policy is not admissible: {exc.args[0]}",
                          module="control") from None
    return float(np.max(np.sqrt(np.sum(v * v, axis=1))))


def _context(problem, policy, x0, dt, max_steps):
    dom = problem.domain
    dim = problem.dim
    if policy.dim not in (None, dim):
        raise ConfigError(f"policy has dimension {policy.dim}, problem has {dim}",
                          module="control")
    exprs = [problem.h] + list(policy.exprs)
    ops, op_off, consts, const_off, depth = kc.pack_programs(exprs)
    kind = {"zero": kc.POLICY_ZERO, "constant": kc.POLICY_CONSTANT, "grid": kc.POLICY_GRID,
            "radial": kc.POLICY_RADIAL, "custom": kc.POLICY_CUSTOM}[policy.kind]
    dummy1 = np.zeros(1)
    grid_origin, grid_spacing, grid_dims = np.zeros(dim), np.ones(dim), np.full(dim, 2, np.int64)
    grad = np.zeros((dim, 1))
    rad_dr, rad_du = 1.0, np.zeros(2)
    if policy.kind == "grid":
        g = policy.field.grid
        grid_origin = np.asarray(g.origin, dtype=float)
        grid_spacing = np.asarray(g.spacing, dtype=float)
        grid_dims = np.asarray(g.dims, dtype=np.int64)
        grad = np.ascontiguousarray(policy.grad)
    elif policy.kind == "radial":
        sol = policy.radial
        if not isinstance(dom, Ball) or not np.allclose(sol.center, dom.center):
            raise ConfigError("radial policy needs the ball it was solved on", module="control")
        rad_dr = float(sol.r_nodes[1] - sol.r_nodes[0])
        rad_du = np.ascontiguousarray(sol.du)
    ball = isinstance(dom, Ball)
    return kc.PathContext(
        dim=dim, x0=np.asarray(x0, dtype=float).copy(), dt=float(dt),
        noise=problem.sigma * math.sqrt(dt), alpha=problem.alpha, g=problem.g,
        max_steps=int(max_steps),
        domain_kind=kc.DOMAIN_BALL if ball else kc.DOMAIN_BOX,
        dom_lo=np.ascontiguousarray(dom.lo, dtype=float),
        dom_hi=np.ascontiguousarray(dom.hi, dtype=float),
        dom_center=np.ascontiguousarray(dom.center, dtype=float),
        dom_r2=float(dom.radius ** 2) if ball else 0.0,
        expr_center=np.ascontiguousarray(dom.center, dtype=float),
        ops=ops, op_off=op_off,
        consts=consts if consts.size else dummy1, const_off=const_off,
        stack_size=depth, policy_kind=kind,
        drift=policy.drift if policy.drift is not None else np.zeros(dim),
        grid_origin=grid_origin, grid_spacing=grid_spacing, grid_dims=grid_dims, grad=grad,
        rad_dr=rad_dr, rad_du=rad_du, h_expr=problem.h, custom_exprs=tuple(policy.exprs))


def worker_count(workers=None):
    """Workers from the argument, else ``HJB_THREADS`` (0 or unset means auto)."""
    if workers is None:
        env = os.environ.get("HJB_THREADS", "0").strip() or "0"
        try:
            workers = int(env)
        except ValueError:
            raise ConfigError(f"HJB_THREADS must be an integer, got {env!r}",
                              module="control") from None
    if workers < 0:
        raise ConfigError("worker count must be non-negative", module="control")
    return workers or (os.cpu_count() or 1)


def simulate_cost(problem, policy, x0, dt, n_paths, seed, workers=None, max_steps=MAX_STEPS,
                  backend=None):
    """Monte Carlo estimate of the expected cost of ``policy`` started at ``x0``."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.size != problem.dim:
        raise ConfigError(f"x0 has dimension {x0.size}, problem has {problem.dim}",
                          module="control")
    if not problem.domain.contains(x0):
        raise DomainError(f"x0 = {tuple(x0)} is not strictly inside the domain",
                          module="control")
    if not dt > 0:
        raise ConfigError("dt must be positive", module="control")
    if int(n_paths) != n_paths or n_paths < 2:
        raise ConfigError("n_paths must be an integer of at least 2", module="control")
    if int(seed) != seed or seed < 0:
        raise ConfigError("seed must be a non-negative integer", module="control")
    n_paths, seed = int(n_paths), int(seed)
    check_admissible(problem, policy)
    ctx = _context(problem, policy, x0, dt, max_steps)
    run = kernels.get_backend(backend).run_paths

    costs = np.empty(n_paths)
    steps = np.empty(n_paths, dtype=np.int64)
    status = np.empty(n_paths, dtype=np.int32)
    chunks = [np.arange(s, min(s + CHUNK, n_paths)) for s in range(0, n_paths, CHUNK)]

    def work(idx):
        c, s, st = run(ctx, idx, seed)
        costs[idx], steps[idx], status[idx] = c, s, st

    nw = min(worker_count(workers), len(chunks))
    if nw <= 1:
        for idx in chunks:
            work(idx)
    else:
        with ThreadPoolExecutor(max_workers=nw) as pool:
            list(pool.map(work, chunks))

    exit_times = steps * float(dt)
    return MCReport(
        mean_cost=math.fsum(costs) / n_paths,
        std_error=float(np.std(costs, ddof=1)) / math.sqrt(n_paths),
        n_paths=n_paths,
        dt=float(dt),
        mean_exit_time=math.fsum(exit_times) / n_paths,
        max_exit_time=float(exit_times.max()),
        seed=seed,
        capped_paths=int(np.count_nonzero(status == kc.CAPPED)),
    )


def value_at(solution, x):
    """``V(x)`` from a grid field, iteration report or radial solution."""
    if isinstance(solution, IterationReport):
        solution = solution.V
    if isinstance(solution, RadialSolution):
        return solution.reconstruct(x)
    if isinstance(solution, Field):
        return float(multilinear(solution.grid, solution.values, x))
    raise TypeError("expected a Field, IterationReport or RadialSolution")


def policy_value_gap(problem, solution, policy, x0, dt, n_paths, seed, workers=None,
                     return_report=False):
    """``mean_cost(policy) - V(x0)``; non-negative up to noise for admissible policies."""
    rep = simulate_cost(problem, policy, x0, dt, n_paths, seed, workers)
    gap = rep.mean_cost - value_at(solution, x0)
    return (gap, rep) if return_report else gap


def feedback_eval(V, x, alpha):
    """Optimal drift at ``x``: interpolated gradient fed through the feedback law."""
    if isinstance(V, IterationReport):
        V = V.V
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if isinstance(V, RadialSolution):
        d = x - V.center
        r = float(np.sqrt(np.dot(d, d)))
        if r > V.radius:
            raise DomainError(f"point {tuple(x)} lies outside the ball", module="control")
        if r == 0.0:
            return np.zeros_like(x)
        du = float(np.interp(r, V.r_nodes, V.du))
        return optimal_control(du * d / r, alpha)
    if not isinstance(V, Field):
        raise TypeError("expected a Field, IterationReport or RadialSolution")
    g = V.grid
    if x.size != g.ndim or np.any(x < g.origin) or np.any(x > g.upper):
        raise DomainError(f"point {tuple(x)} lies outside the grid box", module="control")
    xi = np.array([multilinear(g, d.values, x) for d in gradient(V)])
    return optimal_control(xi, alpha)
