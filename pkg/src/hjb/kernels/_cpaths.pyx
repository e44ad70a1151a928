# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# cython: initializedcheck=False
"""Compiled Euler-Maruyama path stepper.

Arithmetic follows the vectorized backend operation for operation so the
two agree to the last few ulps.
"""

import numpy as np

from libc.math cimport sqrt, pow, sin, cos, exp, log, fabs, floor, isfinite, NAN
from libc.stdlib cimport malloc, free

from ..errors import ExprEvalError
from ..expr import ERROR_MESSAGES
from ._common import BLOCK, path_rng

DEF MAX_DIM = 8

cdef enum:
    OP_CONST = 0
    OP_VAR = 1
    OP_ADD = 2
    OP_SUB = 3
    OP_MUL = 4
    OP_DIV = 5
    OP_POW = 6
    OP_NEG = 7
    OP_SIN = 8
    OP_COS = 9
    OP_EXP = 10
    OP_LOG = 11
    OP_ABS = 12
    OP_MIN = 13
    OP_MAX = 14

cdef enum:
    ST_ALIVE = 0
    ST_EXITED = 1
    ST_CAPPED = 2

cdef enum:
    P_ZERO = 0
    P_CONSTANT = 1
    P_GRID = 2
    P_RADIAL = 3
    P_CUSTOM = 4


cdef struct Ctx:
    int dim
    double dt
    double noise
    double alpha
    double inv_am1
    double g
    long long max_steps
    int domain_kind
    const double* lo
    const double* hi
    const double* dcenter
    double r2
    const double* ecenter
    const int* ops
    const long long* op_off
    const double* consts
    const long long* const_off
    int policy
    const double* drift
    const double* gorigin
    const double* gspacing
    const long long* gdims
    const double* grad
    long long n_nodes
    double rad_dr
    const double* rad_du
    long long rad_n


cdef double eval_prog(const Ctx* c, int prog, const double* x, double r,
                      double* stack, int* err) noexcept nogil:
    cdef long long i
    cdef long long o0 = c.op_off[prog]
    cdef long long o1 = c.op_off[prog + 1]
    cdef long long c0 = c.const_off[prog]
    cdef int sp = 0
    cdef int op, arg
    cdef double a, b
    for i in range(o0, o1):
        op = c.ops[2 * i]
        arg = c.ops[2 * i + 1]
        if op == OP_CONST:
            stack[sp] = c.consts[c0 + arg]
            sp += 1
        elif op == OP_VAR:
            stack[sp] = r if arg == c.dim else x[arg]
            sp += 1
        elif op == OP_NEG:
            stack[sp - 1] = -stack[sp - 1]
        elif op == OP_SIN:
            stack[sp - 1] = sin(stack[sp - 1])
        elif op == OP_COS:
            stack[sp - 1] = cos(stack[sp - 1])
        elif op == OP_EXP:
            stack[sp - 1] = exp(stack[sp - 1])
        elif op == OP_LOG:
            if stack[sp - 1] <= 0:
                err[0] = 1
                return NAN
            stack[sp - 1] = log(stack[sp - 1])
        elif op == OP_ABS:
            stack[sp - 1] = fabs(stack[sp - 1])
        else:
            b = stack[sp - 1]
            a = stack[sp - 2]
            sp -= 1
            if op == OP_ADD:
                stack[sp - 1] = a + b
            elif op == OP_SUB:
                stack[sp - 1] = a - b
            elif op == OP_MUL:
                stack[sp - 1] = a * b
            elif op == OP_DIV:
                if b == 0:
                    err[0] = 2
                    return NAN
                stack[sp - 1] = a / b
            elif op == OP_POW:
                if a < 0 and b != floor(b):
                    err[0] = 3
                    return NAN
                if a == 0 and b < 0:
                    err[0] = 2
                    return NAN
                stack[sp - 1] = pow(a, b)
            elif op == OP_MIN:
                stack[sp - 1] = a if a <= b else b
            else:
                stack[sp - 1] = a if a >= b else b
    if not isfinite(stack[0]):
        err[0] = 4
        return NAN
    return stack[0]


cdef void grid_gradient(const Ctx* c, const double* x, double* xi) noexcept nogil:
    cdef int k, corner, bit, comp
    cdef long long idx[MAX_DIM]
    cdef double frac[MAX_DIM]
    cdef double s, w
    cdef long long i, lin
    for k in range(c.dim):
        s = (x[k] - c.gorigin[k]) / c.gspacing[k]
        i = <long long>floor(s)
        if i < 0:
            i = 0
        if i > c.gdims[k] - 2:
            i = c.gdims[k] - 2
        idx[k] = i
        s = s - i
        if s < 0:
            s = 0
        if s > 1:
            s = 1
        frac[k] = s
        xi[k] = 0
    for corner in range(1 << c.dim):
        w = 1
        lin = 0
        for k in range(c.dim):
            bit = (corner >> k) & 1
            if bit:
                w = w * frac[k]
            else:
                w = w * (1 - frac[k])
            lin = lin * c.gdims[k] + idx[k] + bit
        for comp in range(c.dim):
            xi[comp] = xi[comp] + w * c.grad[comp * c.n_nodes + lin]


cdef void radial_gradient(const Ctx* c, const double* x, double* xi) noexcept nogil:
    cdef int k
    cdef double r2 = 0, r, s, du, d
    cdef long long i
    for k in range(c.dim):
        d = x[k] - c.dcenter[k]
        r2 = r2 + d * d
    r = sqrt(r2)
    if r == 0:
        for k in range(c.dim):
            xi[k] = 0
        return
    s = r / c.rad_dr
    i = <long long>floor(s)
    if i > c.rad_n - 2:
        i = c.rad_n - 2
    s = s - i
    if s > 1:
        s = 1
    du = (1 - s) * c.rad_du[i] + s * c.rad_du[i + 1]
    for k in range(c.dim):
        xi[k] = du * ((x[k] - c.dcenter[k]) / r)


cdef int advance(const Ctx* c, double* x, double* cost, long long* steps,
                 const double[:, ::1] z, double* stack, double* xi, double* v,
                 int* err) noexcept nogil:
    cdef Py_ssize_t j
    cdef int k
    cdef double rr, d, nrm, length, va, hval, q
    for j in range(z.shape[0]):
        rr = 0
        for k in range(c.dim):
            d = x[k] - c.ecenter[k]
            rr = rr + d * d
        rr = sqrt(rr)
        if c.policy == P_ZERO:
            for k in range(c.dim):
                v[k] = 0
            va = 0
        elif c.policy == P_GRID or c.policy == P_RADIAL:
            if c.policy == P_GRID:
                grid_gradient(c, x, xi)
            else:
                radial_gradient(c, x, xi)
            nrm = 0
            for k in range(c.dim):
                nrm = nrm + xi[k] * xi[k]
            nrm = sqrt(nrm)
            if nrm == 0:
                for k in range(c.dim):
                    v[k] = 0
                va = 0
            else:
                length = pow(nrm / c.alpha, c.inv_am1)
                q = length / nrm
                for k in range(c.dim):
                    v[k] = -(q * xi[k])
                va = pow(length, c.alpha)
        else:
            if c.policy == P_CONSTANT:
                for k in range(c.dim):
                    v[k] = c.drift[k]
            else:
                for k in range(c.dim):
                    v[k] = eval_prog(c, 1 + k, x, rr, stack, err)
                    if err[0]:
                        return -err[0]
            nrm = 0
            for k in range(c.dim):
                nrm = nrm + v[k] * v[k]
            va = pow(sqrt(nrm), c.alpha)
        hval = eval_prog(c, 0, x, rr, stack, err)
        if err[0]:
            return -err[0]
        cost[0] = cost[0] + (hval + va) * c.dt
        for k in range(c.dim):
            x[k] = x[k] + v[k] * c.dt + c.noise * z[j, k]
        steps[0] += 1
        if c.domain_kind == 0:
            for k in range(c.dim):
                if x[k] <= c.lo[k] or x[k] >= c.hi[k]:
                    cost[0] = cost[0] + c.g
                    return ST_EXITED
        else:
            rr = 0
            for k in range(c.dim):
                d = x[k] - c.dcenter[k]
                rr = rr + d * d
            if rr >= c.r2:
                cost[0] = cost[0] + c.g
                return ST_EXITED
        if steps[0] >= c.max_steps:
            return ST_CAPPED
    return ST_ALIVE


def run_paths(ctx, indices, seed, int block=BLOCK):
    """Simulate the paths ``indices``; returns ``(costs, steps, status)``."""
    cdef int dim = ctx.dim
    if dim > MAX_DIM:
        raise ValueError(f"compiled kernel supports at most {MAX_DIM} dimensions")
    idx = np.asarray(indices, dtype=np.int64)
    cdef Py_ssize_t n = idx.shape[0]
    costs = np.zeros(n)
    steps_out = np.zeros(n, dtype=np.int64)
    status = np.zeros(n, dtype=np.int32)

    cdef const double[::1] lo = ctx.dom_lo
    cdef const double[::1] hi = ctx.dom_hi
    cdef const double[::1] dcenter = ctx.dom_center
    cdef const double[::1] ecenter = ctx.expr_center
    cdef const int[:, ::1] ops = ctx.ops
    cdef const long long[::1] op_off = ctx.op_off
    cdef const double[::1] consts = ctx.consts
    cdef const long long[::1] const_off = ctx.const_off
    cdef const double[::1] drift = ctx.drift
    cdef const double[::1] gorigin = ctx.grid_origin
    cdef const double[::1] gspacing = ctx.grid_spacing
    cdef const long long[::1] gdims = ctx.grid_dims
    cdef const double[:, ::1] grad = ctx.grad
    cdef const double[::1] rad_du = ctx.rad_du
    cdef const double[::1] x0 = ctx.x0

    cdef Ctx c
    c.dim = dim
    c.dt = ctx.dt
    c.noise = ctx.noise
    c.alpha = ctx.alpha
    c.inv_am1 = 1.0 / (ctx.alpha - 1.0)
    c.g = ctx.g
    c.max_steps = ctx.max_steps
    c.domain_kind = ctx.domain_kind
    c.lo = &lo[0]
    c.hi = &hi[0]
    c.dcenter = &dcenter[0]
    c.r2 = ctx.dom_r2
    c.ecenter = &ecenter[0]
    c.ops = &ops[0, 0]
    c.op_off = &op_off[0]
    c.consts = &consts[0] if consts.shape[0] else NULL
    c.const_off = &const_off[0]
    c.policy = ctx.policy_kind
    c.drift = &drift[0]
    c.gorigin = &gorigin[0]
    c.gspacing = &gspacing[0]
    c.gdims = &gdims[0]
    c.grad = &grad[0, 0]
    c.n_nodes = grad.shape[1]
    c.rad_dr = ctx.rad_dr
    c.rad_du = &rad_du[0]
    c.rad_n = rad_du.shape[0]

    cdef double* stack = <double*>malloc((ctx.stack_size + 1) * sizeof(double))
    cdef double* xbuf = <double*>malloc(3 * dim * sizeof(double))
    if stack == NULL or xbuf == NULL:
        free(stack)
        free(xbuf)
        raise MemoryError()
    cdef double* xi = xbuf + dim
    cdef double* v = xbuf + 2 * dim
    cdef double cst
    cdef long long stp
    cdef int st, err, k
    cdef Py_ssize_t p
    cdef const double[:, ::1] zv
    try:
        for p in range(n):
            rng = path_rng(seed, int(idx[p]))
            for k in range(dim):
                xbuf[k] = x0[k]
            cst = 0
            stp = 0
            st = ST_ALIVE
            err = 0
            while st == ST_ALIVE:
                zv = rng.standard_normal((block, dim))
                with nogil:
                    st = advance(&c, xbuf, &cst, &stp, zv, stack, xi, v, &err)
            if st < 0:
                raise ExprEvalError(ERROR_MESSAGES[-st])
            costs[p] = cst
            steps_out[p] = stp
            status[p] = st
    finally:
        free(stack)
        free(xbuf)
    return costs, steps_out, status
