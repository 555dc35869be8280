"""How regular is the torsional-creep solution at its critical point?

Solve Δ_3 v = 2 on the unit disc, then measure how fast v departs from its
best affine approximation on shrinking balls.  The decay rate is the sharp
exponent p/(p-1); a smoother-looking fit would mean the solver is smearing
the singular behaviour of ∇v at the origin.
"""

import numpy as np

from ppoisson import Grid2D, SolverConfig, excess_scan, render, render_rhs, solve_p_poisson, torsional_creep

p = 3.0
grid = Grid2D.disc(1.0, 1 / 128)
prof = torsional_creep(p)
v, rep = solve_p_poisson(grid, render_rhs(prof, grid), render(prof, grid), SolverConfig(p=p))
print(f"solver: {rep.iterations} Picard steps, residual {rep.final_residual:.2e}")

err = np.abs(v.values - render(prof, grid).values)[grid.active].max()
print(f"sup error against the closed form: {err:.2e}")

scan = excess_scan(v, (0.0, 0.0))
print("\n   r        excess S(r)")
for r, s in zip(scan.radii, scan.s_lin):
    print(f"  {r:.4f}   {s:.3e}")
print(f"\nfitted exponent {scan.fitted_exponent:.4f} (r2 {scan.fit_r2:.6f}); sharp value {p / (p - 1):.4f}")
