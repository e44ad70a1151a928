"""Independent reference values used to validate the solvers.

Nothing here reuses the closed forms in :mod:`hjb.model`; each oracle is
derived separately (direct search, series, or a transformed linear
problem).
"""

from __future__ import annotations

import math

import numpy as np

ZOOM_POINTS = 21
ZOOM_ROUNDS = 30


def legendre_brute_force(xi, alpha, points=ZOOM_POINTS, rounds=ZOOM_ROUNDS):
    """Numerical ``min_v { xi.v + |v|^alpha }`` by zooming grid search.

    The search box ``|v_k| <= max(|xi|^(1/(alpha-1)), 1)`` contains every
    minimizer: beyond that radius ``|v|^alpha`` dominates ``|xi||v|``.
    Each round keeps a window of two grid cells around the best node, so
    the window shrinks by ``(points - 1) / 4`` per round.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    n = xi.size
    L = max(float(np.linalg.norm(xi)) ** (1.0 / (alpha - 1.0)), 1.0)
    center = np.zeros(n)
    half = np.full(n, L)
    best_v, best = center, 0.0   # v = 0 gives 0
    for _ in range(rounds):
        axes = [np.linspace(c - h, c + h, points) for c, h in zip(center, half)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
        vals = mesh @ xi + np.sum(mesh * mesh, axis=1) ** (0.5 * alpha)
        i = int(np.argmin(vals))
        if vals[i] < best:
            best, best_v = float(vals[i]), mesh[i]
        center = best_v
        half = 2.0 * (2.0 * half / (points - 1))
    return best, best_v


def sample_legendre_cases(n_samples, seed, alpha_range=(1.25, 2.0), xi_bound=2.0,
                          max_dim=3):
    """Random ``(xi, alpha)`` pairs; dimension drawn from ``1..max_dim``."""
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(n_samples):
        n = int(rng.integers(1, max_dim + 1))
        alpha = float(rng.uniform(*alpha_range))
        xi = rng.uniform(-xi_bound, xi_bound, size=n)
        cases.append((xi, alpha))
    return cases


def cole_hopf_value(x, sigma=1.0, R=1.0):
    """Exact solution on ``(-R, R)`` for ``alpha = 2``, ``h = 1``, ``g = 0``.

    With ``V = -2 sigma^2 ln w`` the equation becomes ``w'' = w / sigma^4``
    and ``w = cosh(x/sigma^2) / cosh(R/sigma^2)``.
    """
    k = 1.0 / sigma ** 2
    return 2.0 * sigma ** 2 * (math.log(math.cosh(k * R)) - math.log(math.cosh(k * x)))


COLE_HOPF_CENTER = 2.0 * math.log(math.cosh(1.0))


def square_torsion_center(terms=200):
    """``phi(1/2, 1/2)`` for ``-Lap phi = 1`` on the unit square.

    Uses the single-sum series
    ``phi(x, 1/2) = x(1-x)/2 - (4/pi^3) sum_odd sin(n pi x) / (n^3 cosh(n pi/2))``.
    """
    s = math.fsum(math.sin(n * math.pi / 2) / (n ** 3 * math.cosh(n * math.pi / 2))
                  for n in range(1, 2 * terms, 2))
    return 0.125 - 4.0 / math.pi ** 3 * s


def interval_exit_time(x, sigma=1.0, R=1.0):
    """Mean exit time of ``sigma W`` from ``(-R, R)``: ``(R^2 - x^2)/sigma^2``."""
    return (R * R - x * x) / sigma ** 2
