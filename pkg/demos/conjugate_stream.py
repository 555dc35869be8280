"""Stream function of a p-harmonic function and the p'-harmonic dual.

For p = 1.5 the radial solution is u = 1/r and its conjugate is the angle
(up to sign and a constant).  We integrate the conjugate one-form on a
square inside the annulus and compare |∇v|^p' with |∇u|^p as the grid is
refined.  Integrating the conjugate of v at p' = 3 returns -u.
"""

import numpy as np

from ppoisson import Grid2D, radial_p_harmonic, render
from ppoisson.conjugate import conjugate_function, verify_conjugate

for s in (1 / 64, 1 / 128, 1 / 256):
    g = Grid2D.square(0.2, s, origin=(0.55, 0.0))
    u = render(radial_p_harmonic(1.5), g)
    base = g.nearest_node((0.55, 0.0))
    pair = conjugate_function(u, 1.5, base)
    rep = verify_conjugate(pair)
    X, Y = g.XY
    theta = -np.arctan2(Y, X)
    gap = np.ptp((pair.v.values - theta)[g.active])
    back = conjugate_function(pair.v, pair.p_prime, base).v
    inv = np.ptp((back.values + u.values)[g.active])
    print(
        f"1/{round(1 / s):<4d} norm identity {rep.norm_identity_error:.2e}  curl {rep.curl_residual:.1e}"
        f"  v vs -theta {gap:.1e}  involution {inv:.1e}"
    )
