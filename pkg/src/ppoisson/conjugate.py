"""The conjugate (stream) function of a p-harmonic function.

Given u, the one-form ω = (−|∇u|^(p−2) u_y, |∇u|^(p−2) u_x) is closed, and
its primitive v is p'-harmonic with |∇v|^p' = |∇u|^p.  v is built by
trapezoidal integration along staircase paths; the largest cell
circulation of ω certifies how closed the discrete form actually is.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridError, ScalarField, gradient
from .solver import residual


@dataclass(frozen=True, eq=False)
class ConjugatePair:
    u: ScalarField
    v: ScalarField
    p: float
    curl_residual: float
    base_node: tuple[int, int]
    floored_nodes: int = 0
    unreached_nodes: int = 0

    @property
    def p_prime(self) -> float:
        return self.p / (self.p - 1)


@dataclass(frozen=True)
class ConjugateReport:
    norm_identity_error: float
    dual_residual: float
    curl_residual: float
    compared_nodes: int


def one_form(u: ScalarField, p: float) -> tuple[np.ndarray, np.ndarray, int]:
    """Nodal (ω_x, ω_y) and the number of nodes whose |∇u| was floored.

    ∇u is taken to fourth order: with second-order one-sided closures the
    primitive picks up an O(h²) kink next to the boundary, which a discrete
    p'-Laplacian then amplifies by 1/h².
    """
    g = gradient(u, order=4).values
    mag = np.hypot(g[..., 0], g[..., 1])
    ok = np.isfinite(mag)
    scale = float(mag[ok].max()) if ok.any() else 0.0
    floor = 1e-12 * scale
    floored = ok & (mag < floor)
    if p < 2 and scale == 0.0:
        raise GridError("∇u vanishes identically; |∇u|^(p-2) is singular for p < 2")
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(ok, np.maximum(mag, floor) ** (p - 2), np.nan)
    return -w * g[..., 1], w * g[..., 0], int(floored.sum())


def _runs(ok: np.ndarray, k: int):
    """Bounds [lo, hi] of the run of True in 1-D ``ok`` containing index ``k``."""
    lo = hi = k
    while lo > 0 and ok[lo - 1]:
        lo -= 1
    while hi < ok.size - 1 and ok[hi + 1]:
        hi += 1
    return lo, hi


def _integrate_line(values: np.ndarray, ok: np.ndarray, k: int, h: float, start: float) -> np.ndarray:
    """Trapezoidal primitive along a line, anchored at index ``k`` with value ``start``."""
    out = np.full(values.size, np.nan)
    if not ok[k]:
        return out
    lo, hi = _runs(ok, k)
    seg = values[lo : hi + 1]
    cum = np.concatenate([[0.0], np.cumsum(0.5 * h * (seg[1:] + seg[:-1]))])
    out[lo : hi + 1] = start + cum - cum[k - lo]
    return out


def _staircase(wx, wy, ok, base, h, order):
    """Integrate along the first axis of ``order`` through ``base``, then along the other."""
    jb, ib = base
    v = np.full(ok.shape, np.nan)
    if order == "xy":
        row = _integrate_line(wx[jb], ok[jb], ib, h, 0.0)
        for i in np.flatnonzero(np.isfinite(row)):
            v[:, i] = _integrate_line(wy[:, i], ok[:, i], jb, h, row[i])
    elif order == "yx":
        col = _integrate_line(wy[:, ib], ok[:, ib], jb, h, 0.0)
        for j in np.flatnonzero(np.isfinite(col)):
            v[j] = _integrate_line(wx[j], ok[j], ib, h, col[j])
    else:
        raise ValueError(f"order must be 'xy' or 'yx', got {order!r}")
    return v


def cell_circulation(wx: np.ndarray, wy: np.ndarray, h: float) -> np.ndarray:
    """Trapezoidal circulation of ω around each grid cell, counter-clockwise; NaN on partial cells."""
    bottom = 0.5 * h * (wx[:-1, :-1] + wx[:-1, 1:])
    right = 0.5 * h * (wy[:-1, 1:] + wy[1:, 1:])
    top = 0.5 * h * (wx[1:, :-1] + wx[1:, 1:])
    left = 0.5 * h * (wy[:-1, :-1] + wy[1:, :-1])
    return bottom + right - top - left


def conjugate_function(u: ScalarField, p: float, base_point, order: str = "xy") -> ConjugatePair:
    """Primitive v of the conjugate one-form with v(base_point) = 0.

    ``base_point`` is a node index pair (j, i).  The default order integrates
    first along x through the base row, then along y in each column.  Nodes
    not reachable by such a path stay NaN and are counted.  The region should
    be simply connected; on an annulus the period of ω shows up as a large
    circulation around the hole only if a cell straddles it, so annuli must
    be avoided by the caller.
    """
    if p <= 1:
        raise ValueError(f"p must exceed 1, got {p}")
    grid = u.grid
    jb, ib = (int(k) for k in base_point)
    if not (0 <= jb < grid.ny and 0 <= ib < grid.nx) or not u.defined[jb, ib]:
        raise GridError(f"base node ({jb}, {ib}) is not a defined node")
    wx, wy, floored = one_form(u, p)
    ok = u.defined & np.isfinite(wx) & np.isfinite(wy)
    if not ok[jb, ib]:
        raise GridError(f"|∇u|^(p-2) is not finite at the base node ({jb}, {ib}); exclude it from the domain")
    v = _staircase(wx, wy, ok, (jb, ib), grid.spacing, order)
    circ = cell_circulation(wx, wy, grid.spacing)
    circ = circ[np.isfinite(circ)]
    return ConjugatePair(
        u=u,
        v=ScalarField(grid, v),
        p=p,
        curl_residual=float(np.abs(circ).max()) if circ.size else 0.0,
        base_node=(jb, ib),
        floored_nodes=floored,
        unreached_nodes=int((u.defined & ~np.isfinite(v)).sum()),
    )


def verify_conjugate(pair: ConjugatePair) -> ConjugateReport:
    """Check |∇v|^p' = |∇u|^p on interior nodes and the p'-harmonicity of v."""
    grid = pair.u.grid
    gu = gradient(pair.u).magnitude()
    gv = gradient(pair.v).magnitude()
    mask = grid.interior & np.isfinite(gu) & np.isfinite(gv)
    lhs = gv[mask] ** pair.p_prime
    rhs = gu[mask] ** pair.p
    err = float(np.max(np.abs(lhs - rhs) / (rhs + 1e-14))) if mask.any() else 0.0
    zero = ScalarField(grid, np.zeros(grid.shape))
    return ConjugateReport(
        norm_identity_error=err,
        dual_residual=residual(pair.v, zero, pair.p_prime),
        curl_residual=pair.curl_residual,
        compared_nodes=int(mask.sum()),
    )
