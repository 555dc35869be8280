"""A right-hand side in L^q whose solution is no better than C^(1, β-1).

The radial L^q example is rendered on a fine grid (no solve needed: its
profile is known in closed form up to a quadrature).  Its gradient
oscillation near the origin decays at the predicted rate, with a
logarithmic correction that biases the fitted slope slightly upward.
"""

from ppoisson import Grid2D, lq_example, render
from ppoisson.regularity import beta, gradient_oscillation_scan
from ppoisson.exact import lq_norm_power

p, q = 3.0, 4.0
prof = lq_example(p, q)
print(f"beta - 1 = {beta(p, q) - 1:.4f}")

for s in (1 / 256, 1 / 512, 1 / 1024):
    scan = gradient_oscillation_scan(render(prof, Grid2D.disc(0.5, s)), (0.0, 0.0))
    print(f"spacing 1/{round(1 / s):<5d} gradient-oscillation slope {scan.fitted_exponent:.4f}")

# h itself is in L^q: the discrete integral of |h|^q settles
for s in (1 / 256, 1 / 512, 1 / 1024):
    print(f"spacing 1/{round(1 / s):<5d} ∫|h|^q = {lq_norm_power(prof.rhs, q, 0.01, 0.5, s):.6f}")
