"""An elliptic solution and its equations.

psi = Psi_n * P solves a heat-type equation in tau; we check it with finite
differences of the assembled function and show that the result does not
depend on where the contours are placed.
"""
import math

import numpy as np

from ecsjack import EllipticParams, P_elliptic, SolutionSpec
from ecsjack.verify import euler_residual, pde_residual, radius_invariance_check

spec = SolutionSpec(1.5, 1, 2, (2, 0))
z = np.exp(1j * np.array([0.3, 2.0]))

print("P_(2,0)(z; p) along a p scan")
for p in (0.0, 0.02, 0.05, 0.1, 0.2):
    print(f"  p = {p:4.2f}: {P_elliptic(spec, z, p):.10f}")

x = np.array([0.7, 3.1])
for p in (0.05, 0.1):
    P = EllipticParams.from_p(p)
    pde = pde_residual(spec, x, P)
    eul = euler_residual(spec, x, P)
    bad = pde_residual(spec, x, P, E_shift=1.0)
    print(f"\np = {p}: heat residual {pde.residual:.2e} (tol {pde.tolerance:g}), "
          f"Euler {eul.residual:.2e}, with E + 1: {bad.residual:.2e}")

mid = math.sqrt(10)
rep = radius_invariance_check(spec, z, 0.1, [0.8 * mid, mid, 1.2 * mid])
print(f"\nmoving the contour by +-20%: max relative change {rep.residual:.1e}")
