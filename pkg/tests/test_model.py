import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hjb.errors import ConfigError, DomainError
from hjb.model import (Ball, Interval, Problem, Rectangle, conjugate_exponent, cost_constant,
                       domain_from_dict, hamiltonian_min, legendre_plugback, optimal_control,
                       pde_residual)
from hjb.oracle import legendre_brute_force

alphas = st.floats(1.2, 2.0)
vectors = st.lists(st.floats(-2.0, 2.0), min_size=1, max_size=3).map(np.array)


@pytest.mark.parametrize("alpha, p, c", [
    (2.0, 2.0, 0.25),
    (1.5, 3.0, 0.5 / 1.5 ** 3),
    (4.0 / 3.0, 4.0, (1.0 / 3.0) / (4.0 / 3.0) ** 4),
])
def test_exponent_and_constant(alpha, p, c):
    assert conjugate_exponent(alpha) == pytest.approx(p)
    assert cost_constant(alpha) == pytest.approx(c)


@pytest.mark.parametrize("alpha", [1.0, 0.5, 2.5, float("nan"), "2"])
def test_alpha_outside_range(alpha):
    with pytest.raises(DomainError):
        conjugate_exponent(alpha)


def test_hamiltonian_examples():
    assert hamiltonian_min([0.0], 2.0) == 0.0
    assert hamiltonian_min([2.0], 2.0) == pytest.approx(-1.0)
    assert hamiltonian_min([3.0, 4.0], 2.0) == pytest.approx(-25.0 / 4.0)
    np.testing.assert_allclose(optimal_control([2.0], 2.0), [-1.0])
    np.testing.assert_array_equal(optimal_control([0.0, 0.0], 1.5), [0.0, 0.0])


@given(vectors, alphas)
def test_closed_form_matches_brute_force(xi, alpha):
    brute, _ = legendre_brute_force(xi, alpha)
    assert abs(hamiltonian_min(xi, alpha) - brute) <= 1e-3


@given(vectors, alphas)
def test_first_order_condition(xi, alpha):
    v = optimal_control(xi, alpha)
    n = np.linalg.norm(v)
    if n == 0:
        # either xi = 0 or |v*| = (|xi|/alpha)^(1/(alpha-1)) underflowed
        assert (np.linalg.norm(xi) / alpha) ** (1 / (alpha - 1)) == 0.0
        return
    foc = xi + alpha * n ** (alpha - 2) * v
    assert np.max(np.abs(foc)) <= 1e-10 * (1 + np.linalg.norm(xi))


@given(vectors, alphas)
def test_plugback_identity(xi, alpha):
    h = hamiltonian_min(xi, alpha)
    assert legendre_plugback(xi, alpha) == pytest.approx(h, rel=1e-10, abs=1e-300)


@given(vectors, alphas, vectors)
def test_minimizer_beats_any_other_control(xi, alpha, w):
    if w.size != xi.size:
        w = np.resize(w, xi.size)
    v = optimal_control(xi, alpha)
    best = float(xi @ v) + float(np.linalg.norm(v)) ** alpha
    other = float(xi @ w) + float(np.linalg.norm(w)) ** alpha
    assert best <= other + 1e-12


@given(vectors, alphas)
def test_conjugacy(xi, alpha):
    # the Legendre conjugate of |v|^alpha is C_alpha |xi|^p; Young: xi.v <= |v|^a + C|xi|^p
    p = conjugate_exponent(alpha)
    c = cost_constant(alpha)
    v = -optimal_control(xi, alpha)  # maximizer of xi.v - |v|^alpha
    assert float(xi @ v) - float(np.linalg.norm(v)) ** alpha == pytest.approx(
        c * float(np.linalg.norm(xi)) ** p, rel=1e-10, abs=1e-14)


@given(st.floats(0.01, 3.0), alphas)
def test_hamiltonian_homogeneity(s, alpha):
    xi = np.array([0.3, -0.4])
    p = conjugate_exponent(alpha)
    assert hamiltonian_min(s * xi, alpha) == pytest.approx(s ** p * hamiltonian_min(xi, alpha),
                                                           rel=1e-12)


def test_domains():
    assert Interval(0, 2).center.tolist() == [1.0]
    r = Rectangle((0, 0), (1, 2))
    assert r.dim == 2 and r.contains([0.5, 1.0]) and not r.contains([1.0, 1.0])
    b = Ball((1.0, 1.0), 2.0)
    assert b.contains([1.0, 2.9]) and not b.contains([1.0, 3.0])
    for d in (Interval(-1, 1), r, b):
        assert domain_from_dict(d.to_dict()) == d


@pytest.mark.parametrize("bad", [
    lambda: Interval(1, 1),
    lambda: Rectangle((0, 0), (1,)),
    lambda: Rectangle((0, 1), (1, 1)),
    lambda: Ball((0,), 0.0),
    lambda: domain_from_dict({"type": "torus"}),
])
def test_bad_domains(bad):
    with pytest.raises(ConfigError):
        bad()


def test_problem_validation():
    with pytest.raises(DomainError):
        Problem(2.0, 0.0, Interval(0, 1))
    with pytest.raises(DomainError):
        Problem(2.0, 1.0, Interval(0, 1), g=-1.0)
    with pytest.raises(ConfigError):
        Problem(2.0, 1.0, Interval(0, 1), h=[1, 2])
    p = Problem(2, 1, Interval(0, 1), h="x1")
    assert p.p == 2.0 and p.c_alpha == 0.25
    with pytest.raises(ConfigError):
        Problem(2.0, 1.0, Interval(0, 1), h="-1").h_field(p.grid(5))
    with pytest.raises(ConfigError):
        p.with_(domain=Ball((0.0,), 1.0)).grid(5)


def test_residual_vanishes_on_manufactured_solution():
    p = Problem(2.0, 1.0, Interval(0, 1), h="1 + (1 - 2*x1)^2 / 4")
    grid = p.grid(21)
    x = grid.axis(0)
    res = pde_residual(p, grid.field(x * (1 - x)))
    assert np.max(np.abs(res.values)) <= 1e-12
    assert math.isclose(float(res.values[0]), 0.0)
