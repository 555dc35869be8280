import math

import numpy as np
import pytest

from ppoisson.exact import (
    DomainError,
    lq_example,
    lq_norm_power,
    profile_by_label,
    radial_p_harmonic,
    radial_p_poisson_rhs,
    render,
    torsional_creep,
)
from ppoisson.grid import Grid2D, gradient

R = np.geomspace(0.01, 0.9, 100)


def test_torsional_closed_form():
    prof = torsional_creep(3)
    assert prof.value(0.5) == pytest.approx(0.2357022603955158, rel=1e-14)
    assert prof.derivative(0.5) == pytest.approx(math.sqrt(0.5), rel=1e-14)
    p2 = torsional_creep(2)
    assert np.allclose(p2.value(R), R**2 / 2, rtol=1e-14)
    assert np.allclose(p2.derivative(R), R, rtol=1e-14)
    with pytest.raises(ValueError):
        torsional_creep(1.0)


@pytest.mark.parametrize("p", [1.3, 1.5, 2.0, 3.0, 4.5])
def test_torsional_rhs_is_two(p):
    h = radial_p_poisson_rhs(torsional_creep(p), p)(np.linspace(0.01, 1, 60))
    assert np.allclose(h, 2.0, rtol=1e-6, atol=0)


@pytest.mark.parametrize("p", [1.5, 3.0, 4.0])
def test_p_harmonic_rhs_vanishes(p):
    h = radial_p_poisson_rhs(radial_p_harmonic(p), p)(np.linspace(0.01, 1, 60))
    assert np.abs(h).max() < 1e-6


def test_p_harmonic_closed_form():
    p3 = radial_p_harmonic(3)
    assert p3.value(1.0) == pytest.approx(1.0) and p3.derivative(1.0) == pytest.approx(0.5)
    assert np.allclose(radial_p_harmonic(4).value(R), R ** (2 / 3))
    with pytest.raises(ValueError):
        radial_p_harmonic(2)
    with pytest.raises(DomainError):
        radial_p_harmonic(1.5).value(0.0)


def test_lq_values():
    prof = lq_example(3, 4)
    # reference values from an independent 30-digit quadrature
    assert prof.derivative(0.25) == pytest.approx(0.6516601109044572, rel=1e-13)
    assert prof.value(1e-6) == pytest.approx(1.294421774775134e-08, rel=1e-8)
    assert prof.value(1e-6) < 1e-2
    assert prof.value(0.25) == pytest.approx(0.11819000936665176, rel=1e-10)
    v = prof.value(np.linspace(1e-4, 0.95, 200))
    assert (np.diff(v) > 0).all()
    with pytest.raises(DomainError):
        prof.value(1.0)


def test_lq_rhs_matches_flux_differencing():
    prof = lq_example(3, 4)
    r = np.linspace(0.01, 0.9, 80)
    num = radial_p_poisson_rhs(prof, 3)(r)
    assert np.allclose(num, prof.rhs(r), rtol=1e-5, atol=0)


@pytest.mark.parametrize(
    "prof,p",
    [(torsional_creep(3), 3), (torsional_creep(1.5), 1.5), (radial_p_harmonic(4), 4), (lq_example(3, 4), 3)],
)
def test_value_derivative_consistency(prof, p):
    r = np.geomspace(0.01, 0.9, 100)
    d = 1e-6 * r
    fd = (prof.value(r + d) - prof.value(r - d)) / (2 * d)
    assert np.allclose(fd, prof.derivative(r), rtol=1e-6, atol=0)


@pytest.mark.parametrize("prof,p", [(torsional_creep(3), 3), (radial_p_harmonic(4), 4), (lq_example(3, 4), 3)])
def test_analytic_flux_derivative_calibrates_numeric(prof, p):
    r = np.linspace(0.01, 0.9, 50)
    a = radial_p_poisson_rhs(prof, p, analytic=True)(r)
    n = radial_p_poisson_rhs(prof, p)(r)
    assert np.allclose(n, a, rtol=1e-5, atol=1e-6)


def test_rhs_domain_error():
    with pytest.raises(DomainError):
        radial_p_poisson_rhs(torsional_creep(3), 3)(0.0)


def test_render_examples():
    g = Grid2D.square(1.0, 0.05)
    X, Y = g.XY
    v = render(torsional_creep(2), g)
    assert np.abs(v.values - (X**2 + Y**2) / 2)[g.active].max() < 1e-14
    gd = Grid2D.disc(1.0, 1 / 64)
    v3 = render(torsional_creep(3), gd)
    r = gd.radius_from((0, 0))
    ring = gd.active & (np.abs(r - 0.5) < 1e-12)
    vals = v3.values[ring]
    assert ring.sum() >= 4 and np.ptp(vals) < 1e-15
    mag = gradient(v3).magnitude()[ring]
    assert np.abs(mag - math.sqrt(0.5)).max() < 5 * gd.spacing**2
    with pytest.raises(DomainError):
        render(lq_example(3, 4), Grid2D.disc(1.0, 0.1))


def test_labels():
    assert profile_by_label("torsional", 3).label
    with pytest.raises(KeyError, match="valid labels"):
        profile_by_label("nope", 3)


def test_lq_norm_refinement_stable():
    prof = lq_example(3, 4)
    vals = [lq_norm_power(prof.rhs, 4, 0.01, 0.9, s) for s in (1 / 128, 1 / 256, 1 / 512)]
    assert all(abs(b - a) / a < 0.01 for a, b in zip(vals, vals[1:]))
