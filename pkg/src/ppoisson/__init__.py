"""Finite-difference p-Poisson solver with gradient-regularity diagnostics."""

from .conjugate import ConjugatePair, conjugate_function, verify_conjugate
from .exact import lq_example, radial_p_harmonic, render, render_rhs, torsional_creep
from .grid import Grid2D, GridError, ScalarField, VectorField, gradient
from .regularity import beta, excess_scan, fit_exponent, holder_seminorm, kappa_im
from .solver import SolverConfig, residual, solve_p_poisson

__all__ = [
    "ConjugatePair",
    "Grid2D",
    "GridError",
    "ScalarField",
    "SolverConfig",
    "VectorField",
    "beta",
    "conjugate_function",
    "excess_scan",
    "fit_exponent",
    "gradient",
    "holder_seminorm",
    "kappa_im",
    "lq_example",
    "radial_p_harmonic",
    "render",
    "render_rhs",
    "residual",
    "solve_p_poisson",
    "torsional_creep",
    "verify_conjugate",
]
