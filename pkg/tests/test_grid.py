import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hjb.errors import ConfigError, GridMismatchError
from hjb.grid import (Field, Grid, grad_p_norm, gradient, laplacian, multilinear,
                      read_field_csv, sup_diff, write_field_csv)


def test_box_geometry():
    g = Grid.box([0.0, -1.0], [1.0, 1.0], [5, 9])
    assert g.dims == (5, 9) and g.spacing == (0.25, 0.25) and g.ndim == 2
    assert g.size == 45
    assert g.axis(1)[-1] == 1.0
    assert g.boundary_mask.sum() == 45 - 3 * 7


@pytest.mark.parametrize("args", [
    ([0.0], [1.0], 2),
    ([1.0], [0.0], 5),
    ([0.0, 0.0], [1.0, 1.0], [5, 2]),
])
def test_box_rejects(args):
    with pytest.raises(ConfigError):
        Grid.box(*args)


def test_field_values_are_read_only_and_checked():
    g = Grid.box([0.0], [1.0], 5)
    f = g.constant(2.0)
    with pytest.raises(ValueError):
        f.values[0] = 1.0
    with pytest.raises(GridMismatchError):
        Field(g, np.zeros(4))
    with pytest.raises(GridMismatchError):
        sup_diff(f, Grid.box([0.0], [1.0], 7).constant(0.0))


@pytest.mark.parametrize("nodes", [5, 11, 33])
def test_laplacian_exact_on_quadratics(nodes):
    g = Grid.box([0.0, 0.0], [1.0, 2.0], nodes)
    X, Y = g.coords
    lap = laplacian(g.field(3 * X ** 2 - Y ** 2 + X * Y + 2))
    np.testing.assert_allclose(lap.values[g.interior], 4.0, atol=1e-9)
    assert np.all(lap.values[g.boundary_mask] == 0.0)


def test_gradient_exact_on_quadratics_including_faces():
    g = Grid.box([0.0], [1.0], 11)
    x = g.axis(0)
    (d,) = gradient(g.field(x * (1 - x)))
    np.testing.assert_allclose(d.values, 1 - 2 * x, atol=1e-12)
    np.testing.assert_allclose(grad_p_norm(g.field(x * (1 - x)), 3.0).values,
                               np.abs(1 - 2 * x) ** 3, atol=1e-12)


@given(st.floats(0, 1), st.floats(0, 2))
def test_multilinear_reproduces_bilinear(x, y):
    g = Grid.box([0.0, 0.0], [1.0, 2.0], [6, 9])
    X, Y = g.coords
    vals = 1 + 2 * X - Y + 0.5 * X * Y
    assert multilinear(g, vals, [x, y]) == pytest.approx(1 + 2 * x - y + 0.5 * x * y, abs=1e-12)


def test_multilinear_rejects_outside():
    g = Grid.box([0.0], [1.0], 5)
    with pytest.raises(ValueError):
        multilinear(g, np.zeros(5), [1.5])


def test_field_csv_round_trip(tmp_path):
    g = Grid.box([0.0, -1.0], [1.0, 1.0], [4, 5])
    X, Y = g.coords
    f = g.field(np.sin(X) * np.exp(Y) / 3)
    path = tmp_path / "f.csv"
    write_field_csv(f, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "# grid: dims=[4, 5], spacing=[0.33333333333333331, 0.5], origin=[0, -1]"
    assert len(lines) == 21
    x, y, v = (float(t) for t in lines[7].split(","))
    assert (x, y) == (float(X.ravel()[6]), float(Y.ravel()[6]))
    back = read_field_csv(path)
    assert back.grid == g
    np.testing.assert_array_equal(back.values, f.values)
