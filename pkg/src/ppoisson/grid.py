"""Uniform 2D grids with masked domains and the finite-difference operators on them.

Nodes are stored row-major: ``values[j, i]`` is the node at
``x = x[i]``, ``y = y[j]``.  Every node carries one of three labels:

* ``INTERIOR`` -- an unknown of the discrete problem,
* ``BOUNDARY`` -- non-interior nodes among the 8 neighbours of an interior node
  (Dirichlet data lives here),
* ``EXTERIOR`` -- everything else (values are NaN by convention).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

import numpy as np

EXTERIOR = 0
BOUNDARY = 1
INTERIOR = 2


class GridError(ValueError):
    """Raised for invalid grids or stencils that do not fit on a grid."""


@dataclass(frozen=True)
class Disc:
    radius: float
    kind = "disc"

    @property
    def params(self) -> tuple[float, ...]:
        return (self.radius,)

    def signed_depth(self, X, Y):
        # distance from the boundary curve, positive inside
        return self.radius - np.hypot(X, Y)


@dataclass(frozen=True)
class Square:
    half_width: float
    kind = "square"

    @property
    def params(self) -> tuple[float, ...]:
        return (self.half_width,)

    def signed_depth(self, X, Y):
        return self.half_width - np.maximum(np.abs(X), np.abs(Y))


@dataclass(frozen=True)
class Annulus:
    """Ring inner < |x| < outer; used for oracles that are singular at the origin."""

    inner: float
    outer: float
    kind = "annulus"

    @property
    def params(self) -> tuple[float, ...]:
        return (self.inner, self.outer)

    def signed_depth(self, X, Y):
        r = np.hypot(X, Y)
        return np.minimum(self.outer - r, r - self.inner)


Domain = Union[Disc, Square, Annulus]

_DOMAINS = {"disc": Disc, "square": Square, "annulus": Annulus}


def make_domain(kind: str, *params: float) -> Domain:
    try:
        cls = _DOMAINS[kind]
    except KeyError:
        raise GridError(f"unknown domain kind {kind!r}; expected one of {sorted(_DOMAINS)}") from None
    return cls(*map(float, params))


def parse_domain(text: str) -> Domain:
    """Parse ``disc:R``, ``square:a`` or ``annulus:r1,r2``."""
    kind, _, rest = text.partition(":")
    if not rest:
        raise GridError(f"domain {text!r} must look like disc:<R>, square:<a> or annulus:<r1>,<r2>")
    try:
        params = [float(s) for s in rest.split(",")]
    except ValueError:
        raise GridError(f"bad domain parameters in {text!r}") from None
    try:
        return make_domain(kind.strip(), *params)
    except TypeError:
        raise GridError(f"wrong number of parameters for domain {text!r}") from None


@dataclass(frozen=True, eq=False)
class Grid2D:
    """Uniform Cartesian grid centred on ``origin`` with a domain mask.

    ``origin`` is the centre of the domain and of the node array, so
    ``x[i] = origin[0] + (i - (nx - 1) / 2) * spacing``.
    """

    nx: int
    ny: int
    spacing: float
    origin: tuple[float, float]
    domain: Domain

    def __post_init__(self):
        if not self.spacing > 0:
            raise GridError("spacing must be positive")
        if self.nx < 3 or self.ny < 3:
            raise GridError("grid needs at least 3 nodes per axis")
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))
        labels = self.labels
        if not (labels == INTERIOR).any():
            raise GridError("domain contains no interior node at this spacing")
        edge = np.zeros_like(labels, dtype=bool)
        edge[0, :] = edge[-1, :] = edge[:, 0] = edge[:, -1] = True
        if (edge & (labels == INTERIOR)).any():
            raise GridError("interior nodes touch the edge of the node array")

    @classmethod
    def around(cls, domain: Domain, spacing: float, origin=(0.0, 0.0)) -> Grid2D:
        """Smallest symmetric grid holding ``domain`` plus its boundary layer."""
        extent = domain.params[-1]
        m = math.ceil(extent / spacing - 1e-9) + 1
        return cls(2 * m + 1, 2 * m + 1, spacing, origin, domain)

    @classmethod
    def disc(cls, radius: float, spacing: float, origin=(0.0, 0.0)) -> Grid2D:
        return cls.around(Disc(radius), spacing, origin)

    @classmethod
    def square(cls, half_width: float, spacing: float, origin=(0.0, 0.0)) -> Grid2D:
        return cls.around(Square(half_width), spacing, origin)

    @classmethod
    def annulus(cls, inner: float, outer: float, spacing: float, origin=(0.0, 0.0)) -> Grid2D:
        return cls.around(Annulus(inner, outer), spacing, origin)

    @cached_property
    def x(self) -> np.ndarray:
        return self.origin[0] + (np.arange(self.nx) - (self.nx - 1) / 2) * self.spacing

    @cached_property
    def y(self) -> np.ndarray:
        return self.origin[1] + (np.arange(self.ny) - (self.ny - 1) / 2) * self.spacing

    @cached_property
    def XY(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.y)

    @cached_property
    def labels(self) -> np.ndarray:
        X, Y = self.XY
        depth = self.domain.signed_depth(X - self.origin[0], Y - self.origin[1])
        interior = depth > self.spacing / 2
        # boundary layer = 8-neighbours of interior nodes, so every grid
        # triangle touching an interior node has all its vertices defined
        near = interior.copy()
        near[1:, :] |= interior[:-1, :]
        near[:-1, :] |= interior[1:, :]
        rows = near.copy()
        near[:, 1:] |= rows[:, :-1]
        near[:, :-1] |= rows[:, 1:]
        labels = np.full(interior.shape, EXTERIOR, dtype=np.int8)
        labels[near] = BOUNDARY
        labels[interior] = INTERIOR
        return labels

    @property
    def interior(self) -> np.ndarray:
        return self.labels == INTERIOR

    @property
    def boundary(self) -> np.ndarray:
        return self.labels == BOUNDARY

    @property
    def active(self) -> np.ndarray:
        """Interior or boundary nodes (where fields are defined)."""
        return self.labels != EXTERIOR

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    def distance_to_boundary(self, point) -> float:
        """Distance from ``point`` to the continuous domain boundary."""
        px = np.asarray([point[0] - self.origin[0]])
        py = np.asarray([point[1] - self.origin[1]])
        return float(self.domain.signed_depth(px, py)[0])

    def radius_from(self, center) -> np.ndarray:
        X, Y = self.XY
        return np.hypot(X - center[0], Y - center[1])

    def nearest_node(self, point) -> tuple[int, int]:
        """Index ``(j, i)`` of the node closest to ``point``."""
        i = int(round((point[0] - self.x[0]) / self.spacing))
        j = int(round((point[1] - self.y[0]) / self.spacing))
        if not (0 <= i < self.nx and 0 <= j < self.ny):
            raise GridError(f"point {tuple(point)} lies outside the grid")
        return j, i

    def same_as(self, other: Grid2D) -> bool:
        return (
            self is other
            or (
                self.nx == other.nx
                and self.ny == other.ny
                and self.spacing == other.spacing
                and self.origin == other.origin
                and self.domain == other.domain
            )
        )


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: Grid2D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise GridError(f"values shape {values.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: Grid2D, fn, where=None) -> ScalarField:
        """Evaluate ``fn(X, Y)`` on the active nodes (or on ``where``); NaN elsewhere."""
        where = grid.active if where is None else where
        X, Y = grid.XY
        values = np.full(grid.shape, np.nan)
        values[where] = np.broadcast_to(fn(X[where], Y[where]), X[where].shape)
        return cls(grid, values)

    @property
    def defined(self) -> np.ndarray:
        return self.grid.active & np.isfinite(self.values)


@dataclass(frozen=True, eq=False)
class VectorField:
    grid: Grid2D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape + (2,):
            raise GridError(f"values shape {values.shape} does not match grid {self.grid.shape} x 2")
        object.__setattr__(self, "values", values)

    def component(self, k: int) -> ScalarField:
        return ScalarField(self.grid, self.values[..., k])

    def magnitude(self) -> np.ndarray:
        return np.hypot(self.values[..., 0], self.values[..., 1])


def _diff(values: np.ndarray, defined: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Derivative along ``axis``: central where possible, else one-sided second order."""
    v = np.moveaxis(np.where(defined, values, np.nan), axis, -1)
    ok = np.moveaxis(defined, axis, -1)
    n = v.shape[-1]
    out = np.full(v.shape, np.nan)

    def shifted(a, k, fill):
        res = np.full(a.shape, fill, dtype=a.dtype)
        if k > 0:
            res[..., :-k] = a[..., k:]
        else:
            res[..., -k:] = a[..., : n + k]
        return res

    okp1, okm1 = shifted(ok, 1, False), shifted(ok, -1, False)
    okp2, okm2 = shifted(ok, 2, False), shifted(ok, -2, False)
    vp1, vm1 = shifted(v, 1, np.nan), shifted(v, -1, np.nan)
    vp2, vm2 = shifted(v, 2, np.nan), shifted(v, -2, np.nan)

    central = ok & okp1 & okm1
    forward = ok & ~central & okp1 & okp2
    backward = ok & ~central & ~forward & okm1 & okm2
    out[central] = (vp1[central] - vm1[central]) / (2 * h)
    out[forward] = (-3 * v[forward] + 4 * vp1[forward] - vp2[forward]) / (2 * h)
    out[backward] = (3 * v[backward] - 4 * vm1[backward] + vm2[backward]) / (2 * h)
    return np.moveaxis(out, -1, axis)


def _run_extent(ok: np.ndarray, reach: int) -> tuple[np.ndarray, np.ndarray]:
    """Consecutive defined neighbours before/after each node along the last axis, capped at ``reach``."""
    n = ok.shape[-1]
    before = np.zeros(ok.shape, dtype=int)
    after = np.zeros(ok.shape, dtype=int)
    run_b = np.ones(ok.shape, dtype=bool)
    run_a = np.ones(ok.shape, dtype=bool)
    for k in range(1, reach + 1):
        prev = np.zeros(ok.shape, dtype=bool)
        nxt = np.zeros(ok.shape, dtype=bool)
        prev[..., k:] = ok[..., : n - k]
        nxt[..., : n - k] = ok[..., k:]
        run_b &= prev
        run_a &= nxt
        before += run_b
        after += run_a
    return before, after


def _fd_weights(offsets) -> np.ndarray:
    """First-derivative weights on integer ``offsets`` (exact for polynomials of degree < len)."""
    o = np.asarray(offsets, dtype=float)
    rhs = np.zeros(o.size)
    rhs[1] = 1.0
    return np.linalg.solve(np.vander(o, increasing=True).T, rhs)


def _diff4(values: np.ndarray, defined: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Fourth-order derivative on five-node windows, as centred as the run allows.

    Nodes on runs shorter than five fall back to the second-order stencils.
    """
    low = _diff(values, defined, h, axis)
    v = np.moveaxis(np.where(defined, values, np.nan), axis, -1)
    ok = np.moveaxis(defined, axis, -1)
    before, after = _run_extent(ok, 4)
    start = np.clip(-2, -before, after - 4)  # first offset of the window
    usable = ok & (before + after >= 4)
    out = np.moveaxis(low, axis, -1).copy()
    n = v.shape[-1]
    for s in range(-4, 1):
        sel = usable & (start == s)
        if not sel.any():
            continue
        acc = np.zeros(v.shape)
        for w, k in zip(_fd_weights(range(s, s + 5)), range(s, s + 5)):
            sh = np.full(v.shape, np.nan)
            if k >= 0:
                sh[..., : n - k] = v[..., k:]
            else:
                sh[..., -k:] = v[..., : n + k]
            acc += w * sh
        out[sel] = acc[sel] / h
    return np.moveaxis(out, -1, axis)


def _check_interior(result: np.ndarray, grid: Grid2D, where: np.ndarray, what: str):
    bad = where & grid.interior & ~np.isfinite(result)
    if bad.any():
        j, i = np.argwhere(bad)[0]
        raise GridError(f"{what}: interior node ({j}, {i}) has no usable stencil; grid too coarse")


def gradient(f: ScalarField, order: int = 2) -> VectorField:
    """Nodal gradient of ``f``; NaN where no stencil fits (exterior nodes).

    ``order=2`` uses central differences with one-sided second-order
    closures; ``order=4`` uses five-node windows where the run is long enough.
    """
    if order not in (2, 4):
        raise ValueError(f"order must be 2 or 4, got {order}")
    diff = _diff if order == 2 else _diff4
    grid, ok = f.grid, f.defined
    gx = diff(f.values, ok, grid.spacing, axis=1)
    gy = diff(f.values, ok, grid.spacing, axis=0)
    _check_interior(gx, grid, ok, "gradient")
    _check_interior(gy, grid, ok, "gradient")
    return VectorField(grid, np.stack([gx, gy], axis=-1))


def divergence(vf: VectorField) -> ScalarField:
    grid = vf.grid
    ok = grid.active & np.isfinite(vf.values).all(axis=-1)
    dx = _diff(vf.values[..., 0], ok, grid.spacing, axis=1)
    dy = _diff(vf.values[..., 1], ok, grid.spacing, axis=0)
    out = dx + dy
    _check_interior(out, grid, ok, "divergence")
    return ScalarField(grid, out)


def ball_mask(grid: Grid2D, center, r: float, where=None) -> np.ndarray:
    """Nodes within distance ``r`` of ``center`` (restricted to ``where``, default active)."""
    where = grid.active if where is None else where
    return where & (grid.radius_from(center) <= r * (1 + 1e-12))


def sup_over_ball(f: ScalarField, center, r: float) -> float:
    """Max of ``|f|`` over the defined nodes within distance ``r`` of ``center``."""
    if r < 2 * f.grid.spacing * (1 - 1e-12):
        raise GridError(f"radius {r} is below two grid spacings ({2 * f.grid.spacing})")
    ball = ball_mask(f.grid, center, r, f.defined)
    if not ball.any():
        raise GridError(f"ball of radius {r} about {tuple(center)} misses the domain")
    return float(np.abs(f.values[ball]).max())
