import math

import numpy as np
import pytest

from hjb.oracle import (COLE_HOPF_CENTER, cole_hopf_value, interval_exit_time,
                        legendre_brute_force, sample_legendre_cases, square_torsion_center)


def test_cole_hopf_closed_form():
    assert cole_hopf_value(0.0) == pytest.approx(COLE_HOPF_CENTER)
    assert cole_hopf_value(1.0) == 0.0 and cole_hopf_value(-1.0) == 0.0
    # -(1/2)V'' + V'^2/4 = 1 by central differences
    x, d = 0.37, 1e-4
    v = [cole_hopf_value(x + k * d) for k in (-1, 0, 1)]
    lhs = -0.5 * (v[0] - 2 * v[1] + v[2]) / d ** 2 + ((v[2] - v[0]) / (2 * d)) ** 2 / 4
    assert lhs == pytest.approx(1.0, abs=1e-5)


def test_square_torsion_series_converged():
    assert square_torsion_center() == pytest.approx(0.0736713532815, abs=1e-12)
    assert square_torsion_center(50) == pytest.approx(square_torsion_center(), abs=1e-10)


def test_exit_time():
    assert interval_exit_time(0.0) == 1.0
    assert interval_exit_time(0.5, sigma=2.0) == pytest.approx(0.75 / 4)


@pytest.mark.parametrize("xi, alpha, expected", [
    ([2.0], 2.0, -1.0),
    ([0.0, 0.0], 1.5, 0.0),
    ([3.0, 4.0], 2.0, -6.25),
])
def test_brute_force_examples(xi, alpha, expected):
    val, v = legendre_brute_force(np.array(xi), alpha)
    assert val == pytest.approx(expected, abs=1e-6)
    assert float(np.dot(xi, v)) + float(np.linalg.norm(v)) ** alpha == pytest.approx(val)


def test_sampling_is_seeded():
    a = sample_legendre_cases(20, seed=4)
    b = sample_legendre_cases(20, seed=4)
    assert all(np.array_equal(x, y) and s == t for (x, s), (y, t) in zip(a, b))
    assert all(1.25 <= al <= 2.0 and np.all(np.abs(x) <= 2.0) and 1 <= x.size <= 3
               for x, al in a)
    assert not math.isnan(a[0][1])
