import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ppoisson.grid import (
    BOUNDARY,
    INTERIOR,
    Grid2D,
    GridError,
    ScalarField,
    VectorField,
    divergence,
    gradient,
    parse_domain,
    sup_over_ball,
)


def f(grid, fn):
    return ScalarField.from_function(grid, fn)


def test_disc_classification_threshold():
    g = Grid2D.disc(1.0, 0.05)
    r = g.radius_from((0, 0))
    assert np.array_equal(g.interior, r < 1.0 - 0.025)


def test_interior_nodes_have_full_neighbourhood():
    for g in (Grid2D.disc(1.0, 0.07), Grid2D.square(0.5, 0.03), Grid2D.annulus(0.2, 0.9, 0.04)):
        act = g.active
        for j, i in np.argwhere(g.interior):
            assert act[j - 1 : j + 2, i - 1 : i + 2].all()
        assert set(np.unique(g.labels[act])) <= {BOUNDARY, INTERIOR}


def test_grid_validation():
    with pytest.raises(GridError):
        Grid2D.disc(1.0, -0.1)
    with pytest.raises(GridError):
        Grid2D.disc(0.01, 0.5)
    with pytest.raises(ValueError):
        parse_domain("hexagon:1")


def test_gradient_affine_exact():
    g = Grid2D.disc(1.0, 0.05)
    gr = gradient(f(g, lambda x, y: 3 * x - 2 * y)).values[g.active]
    assert np.allclose(gr, [3.0, -2.0], atol=1e-12, rtol=0)


def test_gradient_constant_is_zero():
    g = Grid2D.square(1.0, 0.1)
    assert np.abs(gradient(f(g, lambda x, y: 0 * x + 7.0)).values[g.active]).max() < 1e-12


def test_gradient_quadratic_central_exact():
    g = Grid2D.square(1.0, 0.1)
    X, _ = g.XY
    gx = gradient(f(g, lambda x, y: x * x)).values[..., 0]
    assert np.abs(gx - 2 * X)[g.interior].max() < 1e-12


def test_gradient_order4_exact_on_quartics():
    g = Grid2D.disc(1.0, 1 / 16)
    X, Y = g.XY
    gr = gradient(f(g, lambda x, y: x**4 - 2 * x * y**3 + y**2), order=4).values
    m = g.active
    assert np.abs(gr[..., 0] - (4 * X**3 - 2 * Y**3))[m].max() < 1e-11
    assert np.abs(gr[..., 1] - (-6 * X * Y**2 + 2 * Y))[m].max() < 1e-11


@settings(max_examples=30, deadline=None)
@given(
    a=st.floats(-5, 5),
    b=st.floats(-5, 5),
    c=st.tuples(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3)),
)
def test_gradient_linear(a, b, c):
    g = Grid2D.disc(1.0, 0.1)
    u = f(g, lambda x, y: np.sin(2 * x) + y * y)
    w = f(g, lambda x, y: c[0] * x * y + c[1] * x**3 + c[2])
    lhs = gradient(ScalarField(g, a * u.values + b * w.values)).values
    rhs = a * gradient(u).values + b * gradient(w).values
    m = g.active
    assert np.allclose(lhs[m], rhs[m], rtol=0, atol=1e-11)


def test_divergence_examples():
    g = Grid2D.disc(1.0, 0.05)
    X, Y = g.XY
    vf = VectorField(g, np.stack([X, Y], axis=-1))
    assert np.allclose(divergence(vf).values[g.interior], 2.0)
    const = VectorField(g, np.ones(g.shape + (2,)))
    assert np.abs(divergence(const).values[g.interior]).max() < 1e-12


def test_div_grad_paraboloid():
    g = Grid2D.disc(1.0, 0.05)
    lap = divergence(gradient(f(g, lambda x, y: x * x + y * y))).values
    deep = g.interior & (g.radius_from((0, 0)) < 0.8)
    assert np.allclose(lap[deep], 4.0, atol=1e-10)


def test_sup_over_ball_examples():
    g = Grid2D.disc(1.0, 0.01)
    assert sup_over_ball(f(g, lambda x, y: 0 * x - 2.5), (0, 0), 0.3) == pytest.approx(2.5)
    assert abs(sup_over_ball(f(g, np.hypot), (0, 0), 0.5) - 0.5) <= 0.01
    assert abs(sup_over_ball(f(g, lambda x, y: x * y), (0, 0), 0.5) - 0.125) <= 0.01
    with pytest.raises(GridError):
        sup_over_ball(f(g, np.hypot), (0, 0), 0.015)


@settings(max_examples=25, deadline=None)
@given(r1=st.floats(0.1, 0.9), r2=st.floats(0.1, 0.9), cx=st.floats(-0.3, 0.3))
def test_sup_over_ball_monotone(r1, r2, cx):
    g = Grid2D.disc(1.0, 0.05)
    u = f(g, lambda x, y: np.cos(3 * x) * y)
    lo, hi = sorted((r1, r2))
    assert sup_over_ball(u, (cx, 0.1), lo) <= sup_over_ball(u, (cx, 0.1), hi)
