"""Named end-to-end experiments, each returning a plain dict of results.

Every case takes a spacing override so it can be run cheaply; the default
spacing is the one the tolerances were calibrated at.
"""

from __future__ import annotations

import numpy as np

from .conjugate import conjugate_function, verify_conjugate
from .exact import lq_example, lq_norm_power, radial_p_harmonic, render, render_rhs, torsional_creep
from .grid import Grid2D, ScalarField
from .quasiregular import dilatation_check, dirichlet_growth
from .regularity import beta, excess_scan, gradient_oscillation_scan, kappa_im, radial_gradient_fit
from .solver import SolverConfig, residual, solve_p_poisson


def torsional_p3(spacing: float = 1 / 128) -> dict:
    p = 3.0
    grid = Grid2D.disc(1.0, spacing)
    prof = torsional_creep(p)
    v, rep = solve_p_poisson(grid, render_rhs(prof, grid), render(prof, grid), SolverConfig(p=p))
    scan = excess_scan(v, (0.0, 0.0))
    _, _, gslope, gr2 = radial_gradient_fit(v, (0.0, 0.0), 4 * spacing, 0.1)
    target = p / (p - 1)
    return {
        "p": p,
        "spacing": spacing,
        "converged": rep.converged,
        "iterations": rep.iterations,
        "final_residual": rep.final_residual,
        "radii": scan.radii,
        "s_osc": scan.s_osc,
        "s_lin": scan.s_lin,
        "fitted_exponent": scan.fitted_exponent,
        "fit_r2": scan.fit_r2,
        "expected_exponent": target,
        "gradient_fitted_exponent": gslope,
        "gradient_fit_r2": gr2,
        "passed": bool(
            rep.converged
            and abs(scan.fitted_exponent - target) <= 0.05
            and scan.fit_r2 >= 0.999
            and abs(gslope - 1 / (p - 1)) <= 0.05
        ),
    }


def lq_p3_q4(spacing: float = 1 / 1024) -> dict:
    p, q = 3.0, 4.0
    grid = Grid2D.disc(0.5, spacing)
    prof = lq_example(p, q)
    scan = gradient_oscillation_scan(render(prof, grid), (0.0, 0.0))
    bm1 = beta(p, q) - 1
    norms = [lq_norm_power(prof.rhs, q, 0.01, 0.5, s) for s in (4 * spacing, 2 * spacing, spacing)]
    changes = [abs(b - a) / a for a, b in zip(norms, norms[1:])]
    return {
        "p": p,
        "q": q,
        "spacing": spacing,
        "radii": scan.radii,
        "gradient_oscillation": scan.oscillation,
        "fitted_exponent": scan.fitted_exponent,
        "fit_r2": scan.fit_r2,
        "theoretical_beta_minus_1": bm1,
        "lq_norm_power": norms,
        "lq_relative_changes": changes,
        "passed": bool(bm1 <= scan.fitted_exponent <= bm1 + 0.15 and max(changes) < 0.01),
    }


def dilatation_p4(spacing: float = 1 / 128) -> dict:
    p = 4.0
    grid = Grid2D.annulus(0.2, 0.9, spacing)
    u = render(radial_p_harmonic(p), grid)
    dil = dilatation_check(u, p, exclusion_radius=2 * spacing, tol_discrete=0.05)
    growth = dirichlet_growth(u, p, np.linspace(0.3, 0.8, 6))
    flat = Grid2D.disc(1.0, 1 / 64)
    harmonic = dilatation_check(ScalarField.from_function(flat, lambda x, y: x**2 - y**2), 2.0, 2 / 64)
    return {
        "p": p,
        "spacing": spacing,
        "sup_ratio": dil.sup_ratio,
        "bound": dil.bound,
        "violations": dil.violations,
        "admissible": dil.admissible,
        "p2_sup_ratio": harmonic.sup_ratio,
        "growth_radii": growth.radii,
        "growth_integrals": growth.integrals,
        "growth_slope": growth.slope,
        "growth_slope_required": growth.predicted_slope - 0.2,
        "passed": bool(
            dil.sup_ratio <= dil.bound + 0.05
            and harmonic.sup_ratio < 0.05
            and growth.slope >= growth.predicted_slope - 0.2
        ),
    }


def conjugate_p15(spacing: float = 1 / 128) -> dict:
    p = 1.5
    out = {"p": p, "spacing": spacing, "levels": []}
    for s in (spacing, spacing / 2):
        grid = Grid2D.square(0.2, s, origin=(0.55, 0.0))
        u = render(radial_p_harmonic(p), grid)
        pair = conjugate_function(u, p, grid.nearest_node((0.55, 0.0)))
        rep = verify_conjugate(pair)
        primal = residual(u, ScalarField(grid, np.zeros(grid.shape)), p)
        out["levels"].append(
            {
                "spacing": s,
                "norm_identity_error": rep.norm_identity_error,
                "dual_residual": rep.dual_residual,
                "primal_residual": primal,
                "curl_residual": rep.curl_residual,
            }
        )
    a, b = out["levels"]
    out["norm_identity_passed"] = bool(
        a["norm_identity_error"] < 5e-2 and b["norm_identity_error"] <= 0.5 * a["norm_identity_error"]
    )
    # known to fail: the discrete p'-Laplacian of v, even of the exact -theta,
    # sits a few times above the primal residual on this region
    out["dual_residual_passed"] = bool(a["dual_residual"] < 2 * a["primal_residual"])
    out["passed"] = out["norm_identity_passed"] and out["dual_residual_passed"]
    return out


def exponent_formulas(spacing: float | None = None) -> dict:
    ps = (1.2, 1.5, 3.0, 5.0, 10.0)
    table = {str(p): {"kappa_im": kappa_im(p), "lower": min(p - 1, 1 / (p - 1))} for p in ps}
    b1, b2 = beta(4, 10), beta(1.5, 4)
    return {
        "beta_4_10": b1,
        "beta_1.5_4": b2,
        "kappa_im_2": kappa_im(2),
        "kappa_im_table": table,
        "passed": bool(
            b1 == 19 / 15
            and b2 == 1.5
            and abs(kappa_im(2) - 1) <= 1e-12
            and all(t["kappa_im"] > t["lower"] for t in table.values())
        ),
    }


CASES = {
    "torsional-p3": torsional_p3,
    "lq-p3-q4": lq_p3_q4,
    "dilatation-p4": dilatation_p4,
    "conjugate-p1.5": conjugate_p15,
    "exponents": exponent_formulas,
}
