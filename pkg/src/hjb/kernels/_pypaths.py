"""Vectorized numpy path stepper (fallback when the extension is missing).

Paths of a batch advance in lockstep; each keeps its own generator and
block of normals, so results do not depend on the batch size.
"""

from __future__ import annotations

import numpy as np

from ._common import (BLOCK, CAPPED, DOMAIN_BOX, EXITED, POLICY_CONSTANT, POLICY_CUSTOM,
                      POLICY_GRID, POLICY_RADIAL, POLICY_ZERO, path_rng)

BATCH = 1024


def _grid_gradient(ctx, x):
    dim = ctx.dim
    dims = ctx.grid_dims
    idx, frac = [], []
    for k in range(dim):
        s = (x[:, k] - ctx.grid_origin[k]) / ctx.grid_spacing[k]
        i = np.clip(np.floor(s), 0, dims[k] - 2).astype(np.int64)
        idx.append(i)
        frac.append(np.clip(s - i, 0.0, 1.0))
    xi = np.zeros_like(x)
    for corner in range(1 << dim):
        w = np.ones(x.shape[0])
        lin = np.zeros(x.shape[0], dtype=np.int64)
        for k in range(dim):
            bit = (corner >> k) & 1
            w = w * (frac[k] if bit else 1.0 - frac[k])
            lin = lin * dims[k] + idx[k] + bit
        for comp in range(dim):
            xi[:, comp] = xi[:, comp] + w * ctx.grad[comp, lin]
    return xi


def _radial_gradient(ctx, x):
    d = x - ctx.dom_center
    r = _norm(d)
    n = ctx.rad_du.size
    s = r / ctx.rad_dr
    i = np.minimum(np.floor(s), n - 2).astype(np.int64)
    s = np.minimum(s - i, 1.0)
    du = (1.0 - s) * ctx.rad_du[i] + s * ctx.rad_du[i + 1]
    safe = np.where(r == 0, 1.0, r)
    xi = du[:, None] * (d / safe[:, None])
    xi[r == 0] = 0.0
    return xi


def _sq(a):
    # summed in axis order to match the compiled kernel bit for bit
    s = np.zeros(a.shape[0])
    for k in range(a.shape[1]):
        s = s + a[:, k] * a[:, k]
    return s


def _norm(a):
    return np.sqrt(_sq(a))


def _control(ctx, x):
    """Drift ``v`` and ``|v|^alpha`` for a batch of positions."""
    kind = ctx.policy_kind
    m = x.shape[0]
    if kind == POLICY_ZERO:
        return np.zeros_like(x), np.zeros(m)
    if kind in (POLICY_GRID, POLICY_RADIAL):
        xi = _grid_gradient(ctx, x) if kind == POLICY_GRID else _radial_gradient(ctx, x)
        nrm = _norm(xi)
        zero = nrm == 0
        safe = np.where(zero, 1.0, nrm)
        length = np.power(safe / ctx.alpha, 1.0 / (ctx.alpha - 1.0))
        q = length / safe
        v = -(q[:, None] * xi)
        va = np.power(length, ctx.alpha)
        v[zero] = 0.0
        va[zero] = 0.0
        return v, va
    if kind == POLICY_CONSTANT:
        v = np.broadcast_to(ctx.drift, x.shape).copy()
    elif kind == POLICY_CUSTOM:
        coords = [x[:, k] for k in range(ctx.dim)]
        v = np.column_stack([e.evaluate_array(coords, ctx.expr_center)
                             for e in ctx.custom_exprs])
    else:
        raise ValueError(f"unknown policy kind {kind}")
    return v, np.power(_norm(v), ctx.alpha)


def _outside(ctx, x):
    if ctx.domain_kind == DOMAIN_BOX:
        return np.any((x <= ctx.dom_lo) | (x >= ctx.dom_hi), axis=1)
    return _sq(x - ctx.dom_center) >= ctx.dom_r2


def _run_batch(ctx, indices, seed, block, costs, steps, status):
    m = len(indices)
    rngs = [path_rng(seed, int(i)) for i in indices]
    act = np.arange(m)
    x = np.tile(ctx.x0, (m, 1))
    cost = np.zeros(m)
    nstep = np.zeros(m, dtype=np.int64)
    dt, noise = ctx.dt, ctx.noise
    while act.size:
        z = np.stack([rngs[i].standard_normal((block, ctx.dim)) for i in act])
        for j in range(block):
            v, va = _control(ctx, x)
            coords = [x[:, k] for k in range(ctx.dim)]
            h = ctx.h_expr.evaluate_array(coords, ctx.expr_center)
            cost = cost + (h + va) * dt
            x = x + v * dt + noise * z[:, j, :]
            nstep = nstep + 1
            out = _outside(ctx, x)
            capped = ~out & (nstep >= ctx.max_steps)
            done = out | capped
            if np.any(done):
                ids = act[done]
                costs[ids] = np.where(out[done], cost[done] + ctx.g, cost[done])
                steps[ids] = nstep[done]
                status[ids] = np.where(out[done], EXITED, CAPPED)
                keep = ~done
                act, x, cost, nstep, z = act[keep], x[keep], cost[keep], nstep[keep], z[keep]
                if not act.size:
                    break


def run_paths(ctx, indices, seed, block=BLOCK):
    """Simulate the paths ``indices``; returns ``(costs, steps, status)``."""
    idx = np.asarray(indices, dtype=np.int64)
    n = idx.size
    costs = np.zeros(n)
    steps = np.zeros(n, dtype=np.int64)
    status = np.zeros(n, dtype=np.int32)
    for start in range(0, n, BATCH):
        sl = slice(start, min(start + BATCH, n))
        _run_batch(ctx, idx[sl], seed, block, costs[sl], steps[sl], status[sl])
    return costs, steps, status
