"""Variational solver for Δ_p v = h with Dirichlet data.

The discrete energy averages the two diagonal P1 triangulations of every grid
cell.  Each cell then contains four right triangles, one at each corner, and
the gradient on a triangle is the pair of one-sided differences along its two
legs.  The energy is

    E(v) = Σ_T (h²/4) (1/p) (|∇_T v|² + ε²)^(p/2) + h² Σ_interior h_i v_i.

With the weights w_T = (|∇_T v|² + ε²)^((p-2)/2) frozen, the Euler-Lagrange
operator is a five-point stencil whose edge coefficient is a quarter of the
sum of the weights of the four triangles sharing that edge.  At p = 2 it is
the standard five-point Laplacian.  Because this frozen-weight operator is
exactly the one whose solve gives the Picard (Kačanov) update, that update is
a descent direction for E.  A line search along it keeps the energy
monotone for every p (for p > 2 the undamped update overshoots).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import minimize_scalar
from scipy.sparse.linalg import LinearOperator, cg

from .grid import Grid2D, GridError, ScalarField

log = logging.getLogger(__name__)

_ORIENTATIONS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


class SolverDivergence(RuntimeError):
    """Non-finite energy encountered during the iteration."""


@dataclass
class SolverConfig:
    p: float
    eps_schedule: tuple[float, ...] = tuple(10.0**-k for k in range(1, 9))
    picard_tol: float = 1e-12
    grad_tol: float = 1e-6
    max_outer: int = 2000
    max_linear_iters: int = 20000
    linear_tol: float = 1e-10
    damping: float = 1.0

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError(f"p must exceed 1, got {self.p}")
        eps = tuple(float(e) for e in self.eps_schedule)
        if not eps or any(e <= 0 for e in eps):
            raise ValueError("eps_schedule must be a non-empty list of positive numbers")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("eps_schedule must be strictly decreasing")
        self.eps_schedule = eps
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        for name in ("picard_tol", "grad_tol", "linear_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_outer < 1 or self.max_linear_iters < 1:
            raise ValueError("iteration caps must be positive")


@dataclass
class SolveReport:
    iterations: int = 0
    final_energy: float = float("nan")
    final_residual: float = float("nan")
    converged: bool = False
    energy_trace: list = field(default_factory=list)
    # index into eps_schedule for each energy_trace entry
    trace_phase: list = field(default_factory=list)
    linear_iterations: int = 0


def _shift(a: np.ndarray, dj: int, di: int, fill) -> np.ndarray:
    """out[j, i] = a[j + dj, i + di] (``fill`` outside the array)."""
    out = np.full(a.shape, fill, dtype=a.dtype)
    ny, nx = a.shape
    js, jd = (slice(dj, ny), slice(0, ny - dj)) if dj >= 0 else (slice(0, ny + dj), slice(-dj, ny))
    is_, id_ = (slice(di, nx), slice(0, nx - di)) if di >= 0 else (slice(0, nx + di), slice(-di, nx))
    out[jd, id_] = a[js, is_]
    return out


class _Stencil:
    """Triangle bookkeeping for one grid; reused across iterations."""

    def __init__(self, grid: Grid2D):
        self.grid = grid
        self.h = grid.spacing
        active = grid.active
        self.active = active
        self.interior = grid.interior
        self.tri = {}
        for sx, sy in _ORIENTATIONS:
            self.tri[sx, sy] = active & _shift(active, 0, sx, False) & _shift(active, sy, 0, False)
        self.n_tri = sum(int(m.sum()) for m in self.tri.values())
        self.index = np.full(grid.shape, -1, dtype=np.int64)
        self.index[self.interior] = np.arange(int(self.interior.sum()))

    def tri_gradients(self, v: np.ndarray):
        h = self.h
        for (sx, sy), mask in self.tri.items():
            gx = sx * (_shift(v, 0, sx, np.nan) - v) / h
            gy = sy * (_shift(v, sy, 0, np.nan) - v) / h
            yield (sx, sy), mask, gx, gy

    def weights(self, v: np.ndarray, p: float, eps: float):
        """Per-orientation triangle weights (0 where the triangle is absent)."""
        out = {}
        for key, mask, gx, gy in self.tri_gradients(v):
            s = np.where(mask, gx * gx + gy * gy, 0.0) + eps * eps
            with np.errstate(divide="ignore", invalid="ignore"):
                w = np.where(mask & (s > 0), s ** ((p - 2) / 2), 0.0)
            out[key] = w
        return out

    def edge_coefficients(self, w):
        """cx[j, i] couples (j, i)-(j, i+1); cy[j, i] couples (j, i)-(j+1, i)."""
        cx = 0.25 * (
            w[1, 1] + w[1, -1] + _shift(w[-1, 1], 0, 1, 0.0) + _shift(w[-1, -1], 0, 1, 0.0)
        )
        cy = 0.25 * (
            w[1, 1] + w[-1, 1] + _shift(w[1, -1], 1, 0, 0.0) + _shift(w[-1, -1], 1, 0, 0.0)
        )
        return cx, cy

    def energy(self, v: np.ndarray, rhs: np.ndarray, p: float, eps: float) -> float:
        total = 0.0
        for _, mask, gx, gy in self.tri_gradients(v):
            s = gx[mask] ** 2 + gy[mask] ** 2 + eps * eps
            total += np.sum(s ** (p / 2)) / p
        total *= self.h**2 / 4
        total += self.h**2 * np.sum(rhs[self.interior] * v[self.interior])
        return float(total)

    def apply(self, v: np.ndarray, cx, cy) -> np.ndarray:
        """(1/h²) Σ_j c_ij (v_j − v_i) at every node (garbage off the interior)."""
        vv = np.where(self.active, v, 0.0)
        right = cx * (_shift(vv, 0, 1, 0.0) - vv)
        up = cy * (_shift(vv, 1, 0, 0.0) - vv)
        flux = right - _shift(right, 0, -1, 0.0) + up - _shift(up, -1, 0, 0.0)
        return flux / self.h**2

    def assemble(self, v: np.ndarray, rhs: np.ndarray, cx, cy):
        """Interior system A x = b (A symmetric positive definite)."""
        idx, inner = self.index, self.interior
        n = int(inner.sum())
        rows, cols, vals = [], [], []
        diag = np.zeros(self.grid.shape)
        b = -self.h**2 * np.where(inner, rhs, 0.0)
        # neighbour (dj, di) with its edge coefficient seen from node (j, i)
        for dj, di, c in (
            (0, 1, cx),
            (0, -1, _shift(cx, 0, -1, 0.0)),
            (1, 0, cy),
            (-1, 0, _shift(cy, -1, 0, 0.0)),
        ):
            c = np.where(inner, c, 0.0)
            diag += c
            nidx = _shift(idx, dj, di, -1)
            nint = _shift(inner, dj, di, False)
            couple = inner & nint
            rows.append(idx[couple])
            cols.append(nidx[couple])
            vals.append(-c[couple])
            bnd = inner & ~nint
            vn = _shift(np.where(self.active, v, 0.0), dj, di, 0.0)
            b[bnd] += c[bnd] * vn[bnd]
        rows.append(idx[inner])
        cols.append(idx[inner])
        vals.append(diag[inner])
        A = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
        )
        return A, b[inner], diag[inner]


def _fields(v: ScalarField, h: ScalarField):
    if not v.grid.same_as(h.grid):
        raise GridError("v and h live on different grids")
    if not np.isfinite(v.values[v.grid.active]).all():
        raise GridError("v must be finite on interior and boundary nodes")
    if not np.isfinite(h.values[v.grid.interior]).all():
        raise GridError("h must be finite on interior nodes")
    return v.values, np.where(v.grid.interior, h.values, 0.0)


def energy(v: ScalarField, h: ScalarField, p: float, eps: float = 0.0) -> float:
    """Discrete ∬ (1/p)(|∇v|² + ε²)^(p/2) + h v over the triangulated domain."""
    vv, hh = _fields(v, h)
    return _Stencil(v.grid).energy(vv, hh, p, eps)


def discrete_operator(v: ScalarField, p: float, eps: float = 0.0) -> ScalarField:
    """The discrete div((|∇v|²+ε²)^((p-2)/2) ∇v) on interior nodes (NaN elsewhere)."""
    st = _Stencil(v.grid)
    out = st.apply(v.values, *st.edge_coefficients(st.weights(v.values, p, eps)))
    return ScalarField(v.grid, np.where(v.grid.interior, out, np.nan))


def residual(v: ScalarField, h: ScalarField, p: float, eps: float = 0.0) -> float:
    """Root-mean-square of div(w ∇v) − h over the interior nodes."""
    vv, hh = _fields(v, h)
    st = _Stencil(v.grid)
    r = st.apply(vv, *st.edge_coefficients(st.weights(vv, p, eps))) - hh
    return float(np.sqrt(np.mean(r[v.grid.interior] ** 2)))


def _linear_solve(A, b, x0, diag, config: SolverConfig):
    inv = 1.0 / diag
    M = LinearOperator(A.shape, matvec=lambda x: inv * x, dtype=float)
    count = [0]

    def cb(_):
        count[0] += 1

    x, info = cg(A, b, x0=x0, rtol=config.linear_tol, atol=0.0, maxiter=config.max_linear_iters, M=M, callback=cb)
    if info > 0:
        log.warning("linear solve stopped at max_linear_iters=%d", config.max_linear_iters)
    return x, count[0]


def _line_search(st: _Stencil, v, d, rhs, p, eps, damping):
    """Minimise the (convex) energy along v + t d over t in [0, 2 damping]."""
    inner = st.interior
    trial = v.copy()

    def e_at(t):
        trial[inner] = v[inner] + t * d
        e = st.energy(trial, rhs, p, eps)
        if not np.isfinite(e):
            raise SolverDivergence(f"non-finite energy at eps={eps}")
        return e

    res = minimize_scalar(e_at, bounds=(0.0, 2.0 * damping), method="bounded", options={"xatol": 1e-4})
    t = float(res.x) if e_at(float(res.x)) <= e_at(damping) else damping
    return e_at(t), trial


def solve_p_poisson(grid: Grid2D, h: ScalarField, boundary: ScalarField, config: SolverConfig):
    """Minimise the regularised energy by Picard iteration with ε-continuation.

    Returns ``(v, report)``.  ``v`` equals ``boundary`` on boundary nodes.
    The iteration starts from the p = 2 solution with the same data.
    """
    if not (grid.same_as(h.grid) and grid.same_as(boundary.grid)):
        raise GridError("h and boundary must live on the solver grid")
    bvals = boundary.values
    if not np.isfinite(bvals[grid.boundary]).all():
        raise GridError("boundary data must be finite on every boundary node")
    rhs = np.where(grid.interior, h.values, 0.0)
    if not np.isfinite(rhs).all():
        raise GridError("h must be finite on interior nodes")

    p = config.p
    st = _Stencil(grid)
    inner = grid.interior
    v = np.where(grid.boundary, bvals, np.nan)
    v[inner] = 0.0
    report = SolveReport()

    ones = {key: mask.astype(float) for key, mask in st.tri.items()}
    A, b, diag = st.assemble(v, rhs, *st.edge_coefficients(ones))
    x, nlin = _linear_solve(A, b, v[inner], diag, config)
    report.linear_iterations += nlin
    v[inner] = x

    for phase, eps in enumerate(config.eps_schedule):
        e_old = st.energy(v, rhs, p, eps)
        if not np.isfinite(e_old):
            raise SolverDivergence(f"non-finite energy at eps={eps}")
        report.energy_trace.append(e_old)
        report.trace_phase.append(phase)
        while report.iterations < config.max_outer:
            cx, cy = st.edge_coefficients(st.weights(v, p, eps))
            r = st.apply(v, cx, cy) - rhs
            if np.sqrt(np.mean(r[inner] ** 2)) < config.grad_tol:
                break
            A, b, diag = st.assemble(v, rhs, cx, cy)
            x, nlin = _linear_solve(A, b, v[inner], diag, config)
            report.linear_iterations += nlin
            report.iterations += 1
            d = x - v[inner]
            e_new, trial = _line_search(st, v, d, rhs, p, eps, config.damping)
            if e_new > e_old:
                # no descent along the Picard direction: stagnated at this eps
                break
            v = trial
            report.energy_trace.append(e_new)
            report.trace_phase.append(phase)
            decrease = (e_old - e_new) / max(abs(e_old), 1e-300)
            e_old = e_new
            if decrease < config.picard_tol:
                break
        if report.iterations >= config.max_outer:
            log.warning("max_outer=%d reached at eps=%g", config.max_outer, eps)
            break

    eps = config.eps_schedule[-1]
    report.final_energy = st.energy(v, rhs, p, eps)
    cx, cy = st.edge_coefficients(st.weights(v, p, eps))
    r = st.apply(v, cx, cy) - rhs
    report.final_residual = float(np.sqrt(np.mean(r[inner] ** 2)))
    report.converged = bool(report.final_residual < config.grad_tol)
    return ScalarField(grid, v), report
