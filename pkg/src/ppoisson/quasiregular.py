"""Discrete checks of the quasiregular structure of the complex gradient.

For a p-harmonic ``u`` the complex gradient ``f = u_x - i u_y`` satisfies
``|f_zbar| <= ((p-2)/p) |f_z|``.  Complex quantities are carried as pairs of
real arrays (real part, imaginary part) in the last axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .grid import Grid2D, GridError, ScalarField, VectorField, ball_mask, gradient, sup_over_ball
from .regularity import fit_exponent, holder_seminorm


@dataclass(frozen=True)
class WirtingerPair:
    grid: Grid2D
    fz: np.ndarray  # (ny, nx, 2): real, imaginary
    fzbar: np.ndarray

    def abs_fz(self) -> np.ndarray:
        return np.hypot(self.fz[..., 0], self.fz[..., 1])

    def abs_fzbar(self) -> np.ndarray:
        return np.hypot(self.fzbar[..., 0], self.fzbar[..., 1])

    def jacobian(self) -> np.ndarray:
        """|f_z|² − |f_zbar|², the Jacobian determinant of f as a planar map."""
        return self.abs_fz() ** 2 - self.abs_fzbar() ** 2


def complex_gradient(u: ScalarField) -> VectorField:
    """f = u_x − i u_y as the component pair (u_x, −u_y)."""
    g = gradient(u).values
    return VectorField(u.grid, np.stack([g[..., 0], -g[..., 1]], axis=-1))


def _jacobian_matrix(f: VectorField):
    a = gradient(f.component(0)).values
    b = gradient(f.component(1)).values
    # f = a + i b;  a_x, a_y, b_x, b_y
    return a[..., 0], a[..., 1], b[..., 0], b[..., 1]


def wirtinger(f: VectorField) -> WirtingerPair:
    """f_z = (f_x − i f_y)/2 and f_zbar = (f_x + i f_y)/2 by finite differences."""
    ax, ay, bx, by = _jacobian_matrix(f)
    fz = 0.5 * np.stack([ax + by, bx - ay], axis=-1)
    fzbar = 0.5 * np.stack([ax - by, bx + ay], axis=-1)
    return WirtingerPair(f.grid, fz, fzbar)


@dataclass(frozen=True)
class DilatationReport:
    sup_ratio: float
    violations: int
    admissible: int
    skipped_small_fz: int
    excluded: int
    bound: float
    tol_discrete: float


def _admissible(grid: Grid2D, good: np.ndarray, exclusion_radius: float) -> np.ndarray:
    """Interior nodes farther than ``exclusion_radius`` from every node outside ``good``."""
    dist = ndimage.distance_transform_edt(good) * grid.spacing
    return grid.interior & good & (dist > exclusion_radius)


def dilatation_check(u: ScalarField, p: float, exclusion_radius: float, tol_discrete: float = 0.0) -> DilatationReport:
    """sup |f_zbar|/|f_z| over admissible nodes, and the count exceeding (p−2)/p + tol.

    Nodes within ``exclusion_radius`` of the domain boundary or of the zero
    set of ∇u are excluded; nodes with |f_z| below 1e-10 max|f| are skipped
    and counted.  If every node is skipped (e.g. affine u,
    f_z = f_zbar = 0) the ratio is reported as 0.
    """
    if p < 2:
        raise ValueError("dilatation check needs p >= 2")
    f = complex_gradient(u)
    w = wirtinger(f)
    fmag = f.magnitude()
    finite = np.isfinite(w.fz).all(axis=-1) & np.isfinite(w.fzbar).all(axis=-1) & np.isfinite(fmag)
    grid = u.grid
    # f's own stencil needs its neighbours; use interior nodes only
    good = finite & grid.interior
    scale = float(np.max(fmag[good])) if good.any() else 0.0
    zero = good & (fmag <= 1e-10 * scale)
    adm = _admissible(grid, good & ~zero, exclusion_radius)
    if not adm.any():
        raise GridError("no admissible nodes for the dilatation check")
    afz, afzb = w.abs_fz(), w.abs_fzbar()
    small = adm & (afz <= 1e-10 * scale)
    use = adm & ~small
    bound = (p - 2) / p
    if use.any():
        ratio = afzb[use] / afz[use]
        sup_ratio = float(ratio.max())
        violations = int(np.sum(ratio > bound + tol_discrete))
    else:
        sup_ratio, violations = 0.0, 0
    return DilatationReport(
        sup_ratio=sup_ratio,
        violations=violations,
        admissible=int(use.sum()),
        skipped_small_fz=int(small.sum()),
        excluded=int(grid.interior.sum() - adm.sum()),
        bound=bound,
        tol_discrete=tol_discrete,
    )


@dataclass(frozen=True)
class DirichletGrowth:
    radii: np.ndarray
    integrals: np.ndarray
    slope: float
    r2: float
    predicted_slope: float


def dirichlet_growth(u: ScalarField, p: float, radii, center=(0.0, 0.0)) -> DirichletGrowth:
    """I(r) = ∬_{B_r} |Df|² per radius and the fitted log-log growth rate.

    The prediction for the decay rate is 2α = 2/(p−1).  Nodes where the
    centred stencil for Df is unavailable (outside the interior) do not
    contribute.
    """
    radii = np.sort(np.asarray(radii, dtype=float))
    if radii.size < 4:
        raise ValueError("dirichlet_growth needs at least 4 radii")
    f = complex_gradient(u)
    ax, ay, bx, by = _jacobian_matrix(f)
    dens = ax**2 + ay**2 + bx**2 + by**2
    grid = u.grid
    ok = grid.interior & np.isfinite(dens)
    h2 = grid.spacing**2
    I = np.array([h2 * dens[ball_mask(grid, center, r, ok)].sum() for r in radii])
    try:
        slope, r2 = fit_exponent(radii, I)
    except ValueError:
        slope, r2 = math.nan, math.nan
    return DirichletGrowth(radii, I, slope, r2, 2 / (p - 1))


def gradient_holder_check(u: ScalarField, p: float, R: float, center=(0.0, 0.0), pair_budget: int = 5_000_000) -> float:
    """[∇u]_{C^α(B_R)} R^(1+α) / ||u||_{L∞(B_2R)} with α = 1/(p−1).

    An empirical lower bound for the constant Λ(p); B_2R must lie in the domain.
    """
    if p < 2:
        raise ValueError("gradient_holder_check needs p >= 2")
    alpha = 1 / (p - 1)
    grid = u.grid
    if grid.distance_to_boundary(center) < 2 * R - 1e-12:
        raise GridError("B_2R must lie inside the domain")
    sup = sup_over_ball(u, center, 2 * R)
    if sup == 0:
        return 0.0
    g = gradient(u)
    region = ball_mask(grid, center, R, grid.interior)
    semi = holder_seminorm(g, alpha, region, pair_budget=pair_budget)
    return semi * R ** (1 + alpha) / sup


def small_gradient_check(u: ScalarField, p: float, R: float, grad_tol: float = 1e-6, center=(0.0, 0.0)) -> float:
    """sup_{2h < |x| <= R} |∇u(x)|/|x| · R² / ||u||_{L∞(B_2R)} for u with ∇u(center) ≈ 0."""
    if not 1 < p <= 2:
        raise ValueError("small_gradient_check needs 1 < p <= 2")
    grid = u.grid
    j, i = grid.nearest_node(center)
    g = gradient(u)
    mag = g.magnitude()
    scale = float(np.nanmax(np.abs(u.values[grid.active]))) or 1.0
    if mag[j, i] > grad_tol * max(scale, 1.0):
        raise ValueError(f"|∇u(center)| = {mag[j, i]:.3g} exceeds tolerance; the check needs a critical point")
    if grid.distance_to_boundary(center) < 2 * R - 1e-12:
        raise GridError("B_2R must lie inside the domain")
    sup = sup_over_ball(u, center, 2 * R)
    if sup == 0:
        return 0.0
    dist = grid.radius_from(center)
    region = grid.interior & (dist > 2 * grid.spacing) & (dist <= R * (1 + 1e-12))
    return float(np.max(mag[region] / dist[region])) * R**2 / sup
