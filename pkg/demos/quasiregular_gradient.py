"""The complex gradient of a p-harmonic function is quasiregular.

For u = r^((p-2)/(p-1)) on an annulus the ratio |f_zbar|/|f_z| sits right
at the bound (p-2)/p everywhere, so it is a sharp test case.  A harmonic
function, by contrast, has an analytic complex gradient and ratio 0.
"""

import numpy as np

from ppoisson import Grid2D, ScalarField, radial_p_harmonic, render
from ppoisson.quasiregular import dilatation_check, dirichlet_growth

for p in (3.0, 4.0, 6.0):
    g = Grid2D.annulus(0.2, 0.9, 1 / 128)
    d = dilatation_check(render(radial_p_harmonic(p), g), p, exclusion_radius=2 * g.spacing)
    print(f"p={p:g}: sup |f_zbar|/|f_z| = {d.sup_ratio:.4f}, bound (p-2)/p = {d.bound:.4f}")

flat = Grid2D.disc(1.0, 1 / 64)
d = dilatation_check(ScalarField.from_function(flat, lambda x, y: np.exp(x) * np.cos(y)), 2.0, 0.05)
print(f"harmonic e^x cos y: ratio {d.sup_ratio:.2e}")

g = Grid2D.annulus(0.2, 0.9, 1 / 128)
growth = dirichlet_growth(render(radial_p_harmonic(4.0), g), 4.0, np.linspace(0.3, 0.8, 6))
print(f"Dirichlet integral of f grows like r^{growth.slope:.3f} (at least r^{growth.predicted_slope:.3f} expected)")
