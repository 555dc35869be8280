"""Hölder-regularity measurements for discrete solutions.

The sharp gradient exponent is ``beta(p, q) - 1``.  It is measured through
the decay of two excess quantities over balls ``B_r(x)``:

* ``s_osc(r) = sup |v(y) - v(x)|``
* ``s_lin(r) = sup |v(y) - v(x) - (y - x)·∇v(x)|``

and through log-log fits of these against ``r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.signal import fftconvolve

from .grid import Grid2D, GridError, ScalarField, gradient

INF = math.inf


def parse_q(q) -> float:
    """Accept a number or one of the infinity tokens ``inf``/``infinity``/``∞``."""
    if isinstance(q, str):
        if q.strip().lower() in ("inf", "infinity", "∞", "+inf"):
            return INF
        return float(q)
    return float(q)


def beta(p: float, q, epsilon_margin: float = 0.01) -> float:
    """Sharp exponent β: the gradient is C^(β-1) when h ∈ L^q.

    For q = ∞ only an open bound is available (2 for p < 2, p/(p-1) for
    p > 2); ``epsilon_margin`` is subtracted from it.
    """
    q = parse_q(q)
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    if p == 2:
        raise ValueError("beta is not defined for p = 2")
    if not q > 2:
        raise ValueError(f"q must exceed 2, got {q}")
    if epsilon_margin < 0:
        raise ValueError("epsilon_margin must be non-negative")
    if p < 2:
        return 2 - epsilon_margin if q == INF else 2 - 2 / q
    return p / (p - 1) - epsilon_margin if q == INF else (p - 2 / q) / (p - 1)


def kappa_im(p: float) -> float:
    """Optimal Hölder exponent of the gradient of p-harmonic functions in the plane."""
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    k = 1 / (p - 1)
    return (p / (p - 1) + math.sqrt(1 + 14 * k + k * k)) / 6


@dataclass(frozen=True)
class ExponentParams:
    p: float
    q: float
    beta: float
    alpha: Optional[float]
    kappa_im: float

    @classmethod
    def from_pq(cls, p: float, q, epsilon_margin: float = 0.01) -> ExponentParams:
        q = parse_q(q)
        return cls(
            p=p,
            q=q,
            beta=beta(p, q, epsilon_margin),
            alpha=1 / (p - 1) if p >= 2 else None,
            kappa_im=kappa_im(p),
        )


def fit_exponent(radii, values) -> tuple[float, float]:
    """Least-squares slope of log(values) against log(radii), with its R².

    Pairs with a value at or below 1e-14 are dropped; at least four must remain.
    """
    r = np.asarray(radii, dtype=float)
    y = np.asarray(values, dtype=float)
    keep = (r > 0) & (y > 1e-14) & np.isfinite(y)
    if keep.sum() < 4:
        raise ValueError(f"need at least 4 usable (r, value) pairs, got {int(keep.sum())}")
    lx, ly = np.log(r[keep]), np.log(y[keep])
    A = np.vstack([lx, np.ones_like(lx)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, ly, rcond=None)
    ss_res = float(np.sum((ly - (slope * lx + icpt)) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2


def _decade(off) -> int:
    return int(math.floor(math.log10(math.hypot(off[0], off[1]))))


def holder_seminorm(field, s: float, region=None, pair_budget: int = 5_000_000, full_output: bool = False):
    """Discrete [u]_{C^s(region)} = max |u(x) - u(y)| / |x - y|^s over node pairs.

    ``field`` may be a ScalarField or VectorField (Euclidean norm of the
    difference).  Pairs closer than two spacings are excluded.  When the
    number of admissible pairs exceeds ``pair_budget`` a deterministic subset
    is used, stratified by distance decade; the result is then a lower bound.
    With ``full_output=True`` returns ``(value, info)`` where ``info`` holds
    ``pairs`` (number examined) and ``subsampled``.
    """
    if not 0 < s <= 1:
        raise ValueError("s must lie in (0, 1]")
    grid = field.grid
    vals = field.values if field.values.ndim == 3 else field.values[..., None]
    ok = np.isfinite(vals).all(axis=-1) & grid.active
    region = ok if region is None else (np.asarray(region, dtype=bool) & ok)
    if region.sum() < 2:
        raise ValueError("region needs at least two defined nodes")
    js, is_ = np.nonzero(region)
    j0, j1, i0, i1 = js.min(), js.max() + 1, is_.min(), is_.max() + 1
    reg = region[j0:j1, i0:i1]
    V = vals[j0:j1, i0:i1]
    ny, nx = reg.shape
    h = grid.spacing

    counts = np.rint(fftconvolve(reg.astype(float), reg[::-1, ::-1].astype(float))).astype(np.int64)
    # counts[ny-1+dj, nx-1+di] = #{a : reg[a] and reg[a + (dj, di)]}
    DJ, DI = np.meshgrid(np.arange(ny), np.arange(-(nx - 1), nx), indexing="ij")
    C = counts[ny - 1 :, :]
    keep = ((DJ > 0) | (DI > 0)) & (DJ * DJ + DI * DI >= 4) & (C > 0)
    offsets = list(zip(DJ[keep].tolist(), DI[keep].tolist(), C[keep].tolist()))
    if not offsets:
        raise ValueError("no admissible node pairs (all closer than two spacings)")

    total = sum(c for *_, c in offsets)
    subsampled = total > pair_budget
    stride = {}
    if subsampled:
        # per distance decade: a strided subset of offsets (about sqrt(quota)
        # of them), and a strided subset of the node pairs of each offset
        by_decade = {}
        for off in offsets:
            by_decade.setdefault(_decade(off), []).append(off)
        quota = pair_budget / len(by_decade)
        offsets = []
        for d, offs in sorted(by_decade.items()):
            n_off = min(len(offs), max(1, math.ceil(math.sqrt(quota))))
            chosen = offs[:: math.ceil(len(offs) / n_off)]
            per = quota / len(chosen)
            for dj, di, c in chosen:
                stride[dj, di] = max(1, math.ceil(c / per))
            offsets.extend(chosen)

    best, examined = 0.0, 0
    for dj, di, _ in offsets:
        # pairs (a, a + (dj, di)) inside the cropped box; subsampling strides
        # the anchor nodes along both axes
        k = math.isqrt(stride[dj, di] - 1) + 1 if subsampled else 1
        a_j, b_j = slice(0, ny - dj, k), slice(dj, ny, k)
        if di >= 0:
            a_i, b_i = slice(0, nx - di, k), slice(di, nx, k)
        else:
            a_i, b_i = slice(-di, nx, k), slice(0, nx + di, k)
        m = reg[a_j, a_i] & reg[b_j, b_i]
        diff = V[a_j, a_i][m] - V[b_j, b_i][m]
        if diff.size == 0:
            continue
        examined += diff.shape[0]
        q = np.max(np.hypot.reduce(np.abs(diff), axis=-1)) / (h * math.hypot(dj, di)) ** s
        best = max(best, float(q))
    if full_output:
        return best, {"pairs": examined, "subsampled": subsampled}
    return best


@dataclass(frozen=True)
class ExcessScan:
    center: tuple[float, float]
    radii: np.ndarray  # decreasing
    s_osc: np.ndarray
    s_lin: np.ndarray
    fitted_exponent: float
    fit_r2: float


def _center_node(grid: Grid2D, center) -> tuple[int, int]:
    j, i = grid.nearest_node(center)
    if abs(grid.x[i] - center[0]) > 1e-9 * grid.spacing or abs(grid.y[j] - center[1]) > 1e-9 * grid.spacing:
        raise GridError(f"center {tuple(center)} is not a grid node")
    if not grid.interior[j, i]:
        raise GridError(f"center {tuple(center)} is not an interior node")
    return j, i


def scan_window(grid: Grid2D, center) -> tuple[float, float]:
    """Admissible radii [4 h, 0.25 dist(center, ∂Ω)] (non-empty or an error)."""
    lo = 4 * grid.spacing
    hi = 0.25 * grid.distance_to_boundary(center)
    if hi < lo:
        raise GridError(f"center {tuple(center)} is too close to the boundary for a scan")
    return lo, hi


def auto_radii(grid: Grid2D, center, n: int = 8) -> np.ndarray:
    """``n`` log-spaced radii in [4 h, min(0.1 R, 0.25 dist)], largest first.

    Each radius is snapped down to the distance of the farthest node it
    contains, so the discrete ball really reaches out to r.
    """
    lo, hi = scan_window(grid, center)
    hi = min(hi, 0.1 * grid.domain.params[-1])
    if hi <= lo:
        raise GridError("grid too coarse: fit window [4 h, 0.1 R] is empty")
    d = np.unique(grid.radius_from(center)[grid.active])
    target = np.geomspace(hi, lo, n)
    snapped = d[np.searchsorted(d, target * (1 + 1e-12), side="right") - 1]
    return np.unique(np.maximum(snapped, lo))[::-1]


def _check_radii(grid: Grid2D, center, radii) -> np.ndarray:
    radii = np.sort(np.asarray(radii, dtype=float))[::-1]
    lo, hi = scan_window(grid, center)
    if radii.min() < lo * (1 - 1e-9) or radii.max() > hi * (1 + 1e-9):
        raise GridError(f"radii must lie in [{lo:.6g}, {hi:.6g}] for this center")
    return radii


def excess_scan(v: ScalarField, center, radii=None) -> ExcessScan:
    """Oscillation and linear excess of ``v`` over balls about an interior node.

    ∇v(center) is the discrete gradient of ``v`` itself.  The exponent is the
    log-log slope of ``s_lin``; it is NaN when fewer than four radii carry a
    non-zero excess (e.g. affine ``v``).
    """
    grid = v.grid
    j, i = _center_node(grid, center)
    center = (float(grid.x[i]), float(grid.y[j]))
    radii = auto_radii(grid, center) if radii is None else _check_radii(grid, center, radii)
    g = gradient(v).values[j, i]
    X, Y = grid.XY
    osc = np.abs(v.values - v.values[j, i])
    lin = np.abs(v.values - v.values[j, i] - (X - center[0]) * g[0] - (Y - center[1]) * g[1])
    dist = grid.radius_from(center)
    ok = v.defined
    s_osc = np.array([osc[ok & (dist <= r * (1 + 1e-12))].max() for r in radii])
    s_lin = np.array([lin[ok & (dist <= r * (1 + 1e-12))].max() for r in radii])
    if (np.diff(s_osc) > 0).any() or (np.diff(s_lin) > 0).any():
        raise AssertionError("excess must be non-decreasing in r")
    try:
        slope, r2 = fit_exponent(radii, s_lin)
    except ValueError:
        slope, r2 = math.nan, math.nan
    return ExcessScan(center, radii, s_osc, s_lin, slope, r2)


@dataclass(frozen=True)
class GradientScan:
    center: tuple[float, float]
    radii: np.ndarray  # decreasing
    oscillation: np.ndarray
    fitted_exponent: float
    fit_r2: float


def gradient_oscillation_scan(v: ScalarField, center, radii=None) -> GradientScan:
    """sup_{B_r} |∇v(y) - ∇v(center)| per radius; its slope estimates the gradient's Hölder exponent."""
    grid = v.grid
    j, i = _center_node(grid, center)
    center = (float(grid.x[i]), float(grid.y[j]))
    radii = auto_radii(grid, center) if radii is None else _check_radii(grid, center, radii)
    g = gradient(v).values
    d = np.linalg.norm(g - g[j, i], axis=-1)
    ok = np.isfinite(d)
    dist = grid.radius_from(center)
    osc = np.array([d[ok & (dist <= r * (1 + 1e-12))].max() for r in radii])
    try:
        slope, r2 = fit_exponent(radii, osc)
    except ValueError:
        slope, r2 = math.nan, math.nan
    return GradientScan(center, radii, osc, slope, r2)


def radial_gradient_fit(v: ScalarField, center, rmin: float, rmax: float, step=(1, 0)):
    """Fit |∇v| against distance along the lattice ray ``center + k * step``.

    Returns ``(distances, magnitudes, slope, r2)``.
    """
    grid = v.grid
    j, i = _center_node(grid, center)
    g = gradient(v).magnitude()
    di, dj = step
    unit = grid.spacing * math.hypot(di, dj)
    ks = np.arange(max(1, math.ceil(rmin / unit - 1e-9)), math.floor(rmax / unit + 1e-9) + 1)
    jj, ii = j + dj * ks, i + di * ks
    if (jj < 0).any() or (ii < 0).any() or (jj >= grid.ny).any() or (ii >= grid.nx).any():
        raise GridError("ray leaves the grid")
    dist, mag = ks * unit, g[jj, ii]
    slope, r2 = fit_exponent(dist, mag)
    return dist, mag, slope, r2


def _interpolator(v: ScalarField):
    vals = np.where(v.grid.active, v.values, np.nan)
    return RegularGridInterpolator((v.grid.y, v.grid.x), vals, method="linear", bounds_error=False, fill_value=np.nan)


def _sample(v: ScalarField, px, py) -> np.ndarray:
    out = _interpolator(v)(np.column_stack([np.ravel(py), np.ravel(px)]))
    if not np.isfinite(out).all():
        raise GridError("rescaled grid maps outside the source domain")
    return out.reshape(np.shape(px))


def rescale_blowup(v: ScalarField, x0, r: float, S: float, target_grid: Grid2D) -> ScalarField:
    """V(x) = (v(x0 + r x) - v(x0)) / S on ``target_grid`` (bilinear sampling).

    If Δ_p v = h, then Δ_p V = (r^p / S^(p-1)) h(x0 + r x); see ``blowup_rhs``.
    """
    if not (r > 0 and S > 0):
        raise ValueError("r and S must be positive")
    X, Y = target_grid.XY
    act = target_grid.active
    v0 = _sample(v, np.array([x0[0]]), np.array([x0[1]]))[0]
    out = np.full(target_grid.shape, np.nan)
    out[act] = (_sample(v, x0[0] + r * X[act], x0[1] + r * Y[act]) - v0) / S
    return ScalarField(target_grid, out)


def blowup_rhs(h: ScalarField, x0, r: float, S: float, p: float, target_grid: Grid2D) -> ScalarField:
    """H(x) = (r^p / S^(p-1)) h(x0 + r x), the right-hand side solved by the blow-up."""
    X, Y = target_grid.XY
    act = target_grid.active
    out = np.full(target_grid.shape, np.nan)
    out[act] = r**p / S ** (p - 1) * _sample(h, x0[0] + r * X[act], x0[1] + r * Y[act])
    return ScalarField(target_grid, out)


def gradient_at(v: ScalarField, x0) -> np.ndarray:
    """Bilinearly interpolated discrete gradient of ``v`` at ``x0``."""
    g = gradient(v)
    return np.array([_sample(g.component(k), np.array([x0[0]]), np.array([x0[1]]))[0] for k in (0, 1)])


def gradient_scale(v: ScalarField, x0, beta: float) -> float:
    """ρ = |∇v(x0)|^(1/(β-1)), the radius at which the gradient constraint becomes active."""
    if not beta > 1:
        raise ValueError("beta must exceed 1")
    m = float(np.linalg.norm(gradient_at(v, x0)))
    if m == 0:
        raise ValueError("gradient vanishes at x0; rescaling radius is undefined")
    return m ** (1 / (beta - 1))


def rescale_gradient(v: ScalarField, x0, beta: float, target_grid: Grid2D) -> ScalarField:
    """w(y) = (v(x0 + ρ y) - v(x0)) / ρ^β with ρ = |∇v(x0)|^(1/(β-1)), so |∇w(0)| = 1."""
    rho = gradient_scale(v, x0, beta)
    X, Y = target_grid.XY
    act = target_grid.active
    v0 = _sample(v, np.array([x0[0]]), np.array([x0[1]]))[0]
    out = np.full(target_grid.shape, np.nan)
    out[act] = (_sample(v, x0[0] + rho * X[act], x0[1] + rho * Y[act]) - v0) / rho**beta
    return ScalarField(target_grid, out)


@dataclass(frozen=True)
class DyadicProbe:
    radii: np.ndarray  # increasing, r0 * 2^k
    s_osc: np.ndarray
    alt_i: np.ndarray
    alt_ii: np.ndarray
    # smallest k >= 1 realising alternative (ii), 0 where it fails
    k_ii: np.ndarray
    c_star: float


def dyadic_alternative_probe(v: ScalarField, center, r0: float, beta: float, C: float, limit: float = 0.25) -> DyadicProbe:
    """Check the two alternatives on the chain r0, 2 r0, 4 r0, ... (< ``limit``).

    (i)  S_r <= C r^β
    (ii) S_r <= 2^(-kβ) S_(2^k r) for some k >= 1 with 2^k r still in the chain.

    ``c_star`` is the smallest C for which (i) holds at every probed radius.
    """
    grid = v.grid
    j, i = _center_node(grid, center)
    center = (float(grid.x[i]), float(grid.y[j]))
    lo, hi = scan_window(grid, center)
    if r0 < lo * (1 - 1e-9):
        raise GridError(f"r0 must be at least 4 spacings ({lo:.6g})")
    radii = []
    r = r0
    while r < limit and r <= hi * (1 + 1e-9):
        radii.append(r)
        r *= 2
    if len(radii) < 3:
        raise GridError(f"dyadic chain too short ({len(radii)} radii); need at least 3")
    radii = np.array(radii)
    osc = np.abs(v.values - v.values[j, i])
    dist = grid.radius_from(center)
    ok = v.defined
    S = np.array([osc[ok & (dist <= rr * (1 + 1e-12))].max() for rr in radii])
    alt_i = S <= C * radii**beta
    k_ii = np.zeros(len(radii), dtype=int)
    for a in range(len(radii)):
        for b in range(a + 1, len(radii)):
            k = b - a
            if S[a] <= 2.0 ** (-k * beta) * S[b]:
                k_ii[a] = k
                break
    return DyadicProbe(radii, S, alt_i, k_ii > 0, k_ii, float(np.max(S / radii**beta)))
