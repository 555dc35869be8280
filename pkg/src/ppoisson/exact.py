"""Radial closed-form solutions of the p-Poisson equation.

In polar form a radial field ``v(|x|)`` has

    Δ_p v = (1/r) d/dr ( r |v'(r)|^(p-2) v'(r) ),

so each profile below can be checked against its right-hand side without
any 2D discretisation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .grid import Grid2D, ScalarField


class DomainError(ValueError):
    """Radius outside the profile's domain of validity."""


@dataclass(frozen=True)
class RadialProfile:
    """A radial field ``value(r)`` with analytic ``derivative(r)``.

    ``rhs`` is the advertised right-hand side h(r) and ``flux_derivative`` the
    analytic d/dr of ``r |v'|^(p-2) v'`` when known.  ``r_max`` bounds the
    radii where the formulas are valid; ``finite_at_zero`` says whether
    ``value`` extends continuously to r = 0.
    """

    label: str
    p: float
    value: Callable
    derivative: Callable
    rhs: Optional[Callable] = None
    flux_derivative: Optional[Callable] = None
    r_max: float = math.inf
    finite_at_zero: bool = True

    def check_radii(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if (r < 0).any() or (r >= self.r_max).any():
            raise DomainError(f"{self.label}: radii must lie in [0, {self.r_max})")
        return r


def _check_p(p):
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")


def torsional_creep(p: float) -> RadialProfile:
    """v = ((p-1)/p) r^(p/(p-1)), a solution of Δ_p v = 2 with |∇v| = r^(1/(p-1))."""
    _check_p(p)
    a = p / (p - 1)
    return RadialProfile(
        label="torsional",
        p=p,
        value=lambda r: (1 / a) * np.asarray(r, dtype=float) ** a,
        derivative=lambda r: np.asarray(r, dtype=float) ** (1 / (p - 1)),
        rhs=lambda r: np.full(np.shape(r), 2.0),
        # flux is r * r^(1/(p-1))^(p-1) = r^2
        flux_derivative=lambda r: 2 * np.asarray(r, dtype=float),
    )


def radial_p_harmonic(p: float) -> RadialProfile:
    """The fundamental radial solution u = r^((p-2)/(p-1)) of Δ_p u = 0 (r > 0)."""
    _check_p(p)
    if p == 2:
        raise ValueError("the radial p-harmonic power is degenerate at p = 2 (use log r)")
    m = (p - 2) / (p - 1)

    def derivative(r):
        r = np.asarray(r, dtype=float)
        if p < 2 and (r == 0).any():
            raise DomainError("radial p-harmonic derivative is singular at r = 0 for p < 2")
        with np.errstate(divide="ignore"):
            return m * r ** (-1 / (p - 1))

    def value(r):
        r = np.asarray(r, dtype=float)
        if p < 2 and (r == 0).any():
            raise DomainError("radial p-harmonic value is singular at r = 0 for p < 2")
        return r**m

    return RadialProfile(
        label="p-harmonic",
        p=p,
        value=value,
        derivative=derivative,
        rhs=lambda r: np.zeros(np.shape(r)),
        flux_derivative=lambda r: np.zeros(np.shape(r)),
        finite_at_zero=p > 2,
    )


# Gauss-Legendre rule for the piecewise integration in lq_example
_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)


def lq_example(p: float, q: float) -> RadialProfile:
    """The field with v'(r) = (r^(1-2/q) / |ln r|^(2/q))^(1/(p-1)) on 0 < r < 1.

    Its right-hand side lies in L^q (barely), and |∇v| is Hölder with exponent
    no better than (1 - 2/q)/(p - 1) at the origin.
    """
    _check_p(p)
    if not q > 2:
        raise ValueError(f"q must exceed 2, got {q}")
    a = (1 - 2 / q) / (p - 1)
    b = (2 / q) / (p - 1)

    def derivative(r):
        r = np.asarray(r, dtype=float)
        if (r >= 1).any():
            raise DomainError("lq_example is defined for r < 1 only")
        with np.errstate(divide="ignore", invalid="ignore"):
            out = r**a * np.abs(np.log(r)) ** (-b)
        return np.where(r == 0, 0.0, out)

    def _integral(r0: float) -> float:
        # substitute rho = r0 * t^k so the integrand is smooth at t = 0
        k = 2.0 / a if a < 1 else 1.0

        def g(t):
            rho = r0 * t**k
            return float(derivative(rho)) * r0 * k * t ** (k - 1) if t > 0 else 0.0

        val, _ = integrate.quad(g, 0.0, 1.0, epsabs=1e-12, epsrel=1e-12, limit=200)
        return val

    def value(r):
        r = np.asarray(r, dtype=float)
        if (r >= 1).any() or (r < 0).any():
            raise DomainError("lq_example is defined for 0 <= r < 1 only")
        flat = r.ravel()
        nodes, inverse = np.unique(flat, return_inverse=True)
        out = np.zeros(nodes.shape)
        pos = nodes > 0
        if pos.any():
            rs = nodes[pos]
            # adaptive quadrature up to the smallest radius, then Gauss-Legendre on
            # panels with hi/lo <= 1.25 (the integrand is smooth on each)
            n_geo = int(np.ceil(np.log(rs[-1] / rs[0]) / np.log(1.25))) + 1
            brk = np.union1d(rs, np.geomspace(rs[0], rs[-1], max(n_geo, 2)))
            lo, hi = brk[:-1], brk[1:]
            mid, half = (hi + lo) / 2, (hi - lo) / 2
            pts = mid[:, None] + half[:, None] * _GL_X[None, :]
            pieces = half * (derivative(pts) @ _GL_W)
            cum = np.concatenate([[0.0], np.cumsum(pieces)])
            out[pos] = _integral(rs[0]) + cum[np.searchsorted(brk, rs)]
        return out[inverse].reshape(r.shape)

    def rhs(r):
        r = np.asarray(r, dtype=float)
        L = np.abs(np.log(r))
        return r ** (-2 / q) * L ** (-2 / q) * ((2 - 2 / q) + (2 / q) / L)

    return RadialProfile(
        label="lq",
        p=p,
        value=value,
        derivative=derivative,
        rhs=rhs,
        flux_derivative=lambda r: np.asarray(r, dtype=float) * rhs(r),
        r_max=1.0,
    )


def radial_p_poisson_rhs(profile: RadialProfile, p: float, analytic: bool = False) -> Callable:
    """Return r -> Δ_p of the radial field, by differencing the flux r|v'|^(p-2)v'.

    The centred step is 1e-5 r.  With ``analytic=True`` the profile's
    ``flux_derivative`` is used instead.
    """
    _check_p(p)

    def flux(r):
        d = profile.derivative(r)
        return r * np.abs(d) ** (p - 2) * d

    def h(r):
        r = np.asarray(r, dtype=float)
        if (r <= 0).any():
            raise DomainError("radial p-Laplacian needs r > 0")
        if analytic:
            if profile.flux_derivative is None:
                raise ValueError(f"profile {profile.label!r} has no analytic flux derivative")
            return profile.flux_derivative(r) / r
        step = 1e-5 * r
        return (flux(r + step) - flux(r - step)) / (2 * step) / r

    return h


def render(profile: RadialProfile, grid: Grid2D, center=None) -> ScalarField:
    """Sample ``profile.value(|x - center|)`` on the active nodes of ``grid``."""
    center = (0.0, 0.0) if center is None else center
    active = grid.active
    r = grid.radius_from(center)[active]
    profile.check_radii(r)
    if not profile.finite_at_zero and (r == 0).any():
        raise DomainError(f"{profile.label}: grid contains the singular point r = 0")
    values = np.full(grid.shape, np.nan)
    values[active] = profile.value(r)
    return ScalarField(grid, values)


def render_rhs(profile: RadialProfile, grid: Grid2D, center=None, r_floor: float = 0.0) -> ScalarField:
    """Sample the advertised right-hand side on the active nodes.

    Nodes with radius below ``r_floor`` are set to 0, as is a node sitting
    exactly on the centre where h is singular (the L^q example); a single
    node carries no mass there.
    """
    center = (0.0, 0.0) if center is None else center
    active = grid.active
    r = grid.radius_from(center)[active]
    profile.check_radii(r)
    vals = np.zeros(r.shape)
    keep = r >= r_floor
    with np.errstate(divide="ignore", invalid="ignore"):
        vals[keep] = profile.rhs(r[keep])
    vals[(r == 0) & ~np.isfinite(vals)] = 0.0
    values = np.full(grid.shape, np.nan)
    values[active] = vals
    return ScalarField(grid, values)


PROFILES = {
    "torsional": torsional_creep,
    "lq": lq_example,
    "p-harmonic": radial_p_harmonic,
}


def profile_by_label(label: str, p: float, q: Optional[float] = None) -> RadialProfile:
    if label not in PROFILES:
        raise KeyError(f"unknown profile {label!r}; valid labels: {', '.join(sorted(PROFILES))}")
    if label == "lq":
        if q is None:
            raise ValueError("profile 'lq' needs q")
        return lq_example(p, q)
    return PROFILES[label](p)


def lq_norm_power(
    rhs: Callable, q: float, r_inner: float, r_outer: float, spacing: float, center=(0.0, 0.0)
) -> float:
    """Node-sum approximation of ∬_{r_inner < r < r_outer} |h|^q on a grid of ``spacing``."""
    m = math.ceil(r_outer / spacing) + 1
    t = (np.arange(-m, m + 1)) * spacing
    X, Y = np.meshgrid(t + center[0], t + center[1])
    r = np.hypot(X - center[0], Y - center[1])
    ring = (r > r_inner) & (r < r_outer)
    return float(spacing**2 * np.sum(np.abs(rhs(r[ring])) ** q))
