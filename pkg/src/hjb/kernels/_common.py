"""Data shared by both path-kernel backends."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BLOCK = 1024  # normal variates are drawn per path in blocks of this many steps

ALIVE, EXITED, CAPPED = 0, 1, 2

DOMAIN_BOX, DOMAIN_BALL = 0, 1
POLICY_ZERO, POLICY_CONSTANT, POLICY_GRID, POLICY_RADIAL, POLICY_CUSTOM = range(5)


def path_rng(seed, index):
    """Independent generator for path ``index``; independent of scheduling."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


@dataclass(eq=False)
class PathContext:
    """Flat, array-only description of one simulation.

    Expressions are carried twice: as RPN programs (``ops``/``consts`` with
    offsets, program 0 is ``h`` and programs ``1..dim`` are custom policy
    components) for the compiled stepper, and as :class:`Expr` objects for the
    vectorized one.
    """

    dim: int
    x0: np.ndarray
    dt: float
    noise: float             # sigma * sqrt(dt)
    alpha: float
    g: float
    max_steps: int
    domain_kind: int
    dom_lo: np.ndarray
    dom_hi: np.ndarray
    dom_center: np.ndarray
    dom_r2: float
    expr_center: np.ndarray
    ops: np.ndarray          # int32 (n_ops, 2)
    op_off: np.ndarray       # int64 (n_progs + 1,)
    consts: np.ndarray
    const_off: np.ndarray
    stack_size: int
    policy_kind: int
    drift: np.ndarray
    grid_origin: np.ndarray
    grid_spacing: np.ndarray
    grid_dims: np.ndarray    # int64
    grad: np.ndarray         # (dim, n_nodes) nodal gradient, C order
    rad_dr: float
    rad_du: np.ndarray
    h_expr: object = None
    custom_exprs: tuple = ()


def pack_programs(exprs):
    """Concatenate RPN programs of ``exprs`` into flat arrays."""
    ops, consts = [], []
    op_off, const_off = [0], [0]
    depth = 1
    for e in exprs:
        o, c, d = e.to_rpn()
        ops.append(o)
        consts.append(c)
        op_off.append(op_off[-1] + len(o))
        const_off.append(const_off[-1] + len(c))
        depth = max(depth, d)
    return (np.ascontiguousarray(np.concatenate(ops), dtype=np.int32).reshape(-1, 2),
            np.asarray(op_off, dtype=np.int64),
            np.ascontiguousarray(np.concatenate(consts), dtype=np.float64),
            np.asarray(const_off, dtype=np.int64),
            depth)
