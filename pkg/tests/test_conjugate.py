import numpy as np
import pytest

from ppoisson.conjugate import cell_circulation, conjugate_function, one_form, verify_conjugate
from ppoisson.exact import radial_p_harmonic, render
from ppoisson.grid import Grid2D, GridError, ScalarField


def rect(s):
    return Grid2D.square(0.2, s, origin=(0.55, 0.0))


def oracle(s, p=1.5):
    g = rect(s)
    return g, render(radial_p_harmonic(p), g), g.nearest_node((0.55, 0.0))


def test_affine_case_exact():
    g = Grid2D.square(1.0, 1 / 32)
    base = g.nearest_node((0.3, 0.2))
    pair = conjugate_function(ScalarField.from_function(g, lambda x, y: x), 1.5, base)
    X, Y = g.XY
    m = g.active
    assert np.abs(pair.v.values - (Y - Y[base]))[m].max() < 1e-12
    rep = verify_conjugate(pair)
    assert rep.norm_identity_error < 1e-12 and rep.dual_residual < 1e-10
    assert pair.v.values[base] == 0.0


def test_p_prime():
    _, u, b = oracle(1 / 32)
    pair = conjugate_function(u, 1.5, b)
    assert pair.p_prime == 3.0 and 1 / pair.p + 1 / pair.p_prime == 1.0
    for p in (1.1, 1.5, 1.9):
        assert p / (p - 1) > 2


def test_base_point_zero_and_errors():
    g, u, base = oracle(1 / 32)
    for b in (base, (3, 4), (10, 9)):
        assert conjugate_function(u, 1.5, b).v.values[b] == 0.0
    with pytest.raises(GridError):
        conjugate_function(u, 1.5, (g.ny, 0))
    holed = u.values.copy()
    holed[base] = np.nan
    with pytest.raises(GridError):
        conjugate_function(ScalarField(g, holed), 1.5, base)
    with pytest.raises(GridError):
        # u ≡ 0: |∇u|^(p-2) singular for p < 2
        conjugate_function(ScalarField(g, np.zeros(g.shape)), 1.5, base)
    with pytest.raises(ValueError):
        conjugate_function(u, 1.0, base)


def test_curl_residual_refines():
    res = [conjugate_function(u, 1.5, b).curl_residual for _, u, b in (oracle(s) for s in (1 / 32, 1 / 64, 1 / 128))]
    assert all(a / b >= 1.5 for a, b in zip(res, res[1:]))


def test_norm_identity_refines():
    errs = [verify_conjugate(conjugate_function(u, 1.5, b)).norm_identity_error for _, u, b in (oracle(s) for s in (1 / 64, 1 / 128, 1 / 256))]
    assert errs[1] < 5e-2
    assert errs[1] <= 0.5 * errs[0] and errs[2] <= 0.5 * errs[1]


def test_scaling_homogeneity():
    g, u, b = oracle(1 / 64)
    a = conjugate_function(u, 1.5, b)
    c = 3.7
    s = conjugate_function(ScalarField(g, c * u.values), 1.5, b)
    m = g.active
    assert np.allclose(s.v.values[m], c ** (1.5 - 1) * a.v.values[m], rtol=1e-12, atol=1e-15)
    assert verify_conjugate(s).norm_identity_error == pytest.approx(verify_conjugate(a).norm_identity_error, rel=1e-9)


def test_path_independence_bound():
    g, u, b = oracle(1 / 64)
    xy = conjugate_function(u, 1.5, b, order="xy")
    yx = conjugate_function(u, 1.5, b, order="yx")
    m = g.active
    gap = np.abs(xy.v.values - yx.v.values)[m].max()
    cells = (g.nx - 1) * (g.ny - 1)
    assert gap <= xy.curl_residual * cells


def test_involution_recovers_primal():
    gaps = []
    for s in (1 / 64, 1 / 128):
        g, u, b = oracle(s)
        v = conjugate_function(u, 1.5, b).v
        back = conjugate_function(v, 3.0, b).v
        d = (back.values + u.values)[g.active]
        gaps.append(np.ptp(d))
    assert gaps[1] < gaps[0] and gaps[1] < 1e-3


def test_circulation_of_exact_form():
    g = Grid2D.square(1.0, 0.1)
    X, Y = g.XY
    # ω = ∇(x² y): closed, trapezoid circulation is O(h³) per cell
    circ = cell_circulation(2 * X * Y, X * X, g.spacing)
    assert np.abs(circ).max() < g.spacing**3
    wx, wy, floored = one_form(ScalarField.from_function(g, lambda x, y: x), 1.5)
    assert floored == 0 and np.allclose(wy[g.active], 1.0)
