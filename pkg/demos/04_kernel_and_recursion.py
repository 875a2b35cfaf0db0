"""Kernel functions, integral transforms and the eigenvalue recursion.

Each level of the nested integral is one integral transform with the kernel
function.  Composing two transforms must give the three-level integral, and
the eigenvalues follow from a simple update rule.
"""
import numpy as np

from ecsjack import EllipticParams, P_elliptic, SolutionSpec, eigen_E
from ecsjack.ecsolve import monomial_base, recursion_eigenvalues, transform_step
from ecsjack.quadrature import GridSpec, make_schedule
from ecsjack.verify import kernel_check, random_torus_points

P = EllipticParams.from_p(0.05)
g = 1.5
for N, M in [(2, 0), (2, 1), (3, 2)]:
    pt = random_torus_points(N + M, 1, 7)[0]
    r1, r2 = kernel_check(N, M, pt[:N], pt[N:], P, g)
    print(f"kernel (N, M) = ({N}, {M}): Euler {r1.residual:.1e}, heat {r2.residual:.1e}")

spec = SolutionSpec(g, 1, 3, (2, 1, 0))
grid = GridSpec(M=32)
s1 = transform_step(monomial_base(2), 2, 1, 1, 1, 3.0, P, grid, g)
s2 = transform_step(s1, 3, 2, 0, 0, 2.0, P, grid, g)
z = np.exp(1j * np.array([0.3, 2.0, 4.0]))
sched = make_schedule(3, 0.05, 2.0, 2 / 3).with_z(z[None, :])
print("\ntwo transforms:", s2(z))
print("nested integral:", P_elliptic(spec, z, P, sched, grid))

d, E = recursion_eigenvalues(spec, P)
print(f"\nrecursion: d = {d}, E = {E.real:.12f}; closed form E = {eigen_E(spec, P).real:.12f}")
