"""Reference problems with known answers, shared by tests and benchmarks."""

from __future__ import annotations

import numpy as np

from .model import Ball, Interval, Problem, Rectangle
from .oracle import COLE_HOPF_CENTER, cole_hopf_value  # noqa: F401  (re-exported)


def cole_hopf(h=1.0):
    """``alpha = 2, sigma = 1, g = 0`` on ``(-1, 1)``; ``V(0) = 2 ln cosh 1`` for ``h = 1``."""
    return Problem(alpha=2.0, sigma=1.0, domain=Interval(-1.0, 1.0), h=h, g=0.0)


def manufactured_1d():
    """Exact solution ``x(1 - x)`` on ``(0, 1)``; quadratic, so the stencil is exact."""
    return Problem(alpha=2.0, sigma=1.0, domain=Interval(0.0, 1.0),
                   h="1 + (1 - 2*x1)^2 / 4", g=0.0)


def manufactured_1d_exact(x):
    x = np.asarray(x, dtype=float)
    return x * (1.0 - x)


def symmetric_square():
    """Source symmetric under ``x1 <-> x2`` on the unit square."""
    return Problem(alpha=2.0, sigma=1.0, domain=Rectangle((0.0, 0.0), (1.0, 1.0)),
                   h="sin(pi*x1)*sin(pi*x2)", g=0.0)


def radial_manufactured(N, g=0.5, R=1.0):
    """Ball problem with exact solution ``u = g + R^2 - r^2`` (``alpha = 2``, ``sigma = 1``).

    ``-(1/2)(u'' + (N-1)u'/r) = N`` and ``|u'|^2/4 = r^2``, so ``h = N + r^2``.
    """
    return Problem(alpha=2.0, sigma=1.0, domain=Ball((0.0,) * N, R), h=f"{N} + r^2", g=g)


def radial_manufactured_exact(r, g=0.5, R=1.0):
    return g + R * R - np.asarray(r, dtype=float) ** 2
