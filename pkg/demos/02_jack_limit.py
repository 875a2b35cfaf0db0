"""Jack polynomials as the p = 0 limit of the integral representation.

At p = 0 the nested contour integral reproduces a Jack polynomial times an
explicit constant when r is ordered, and vanishes otherwise.
"""
import numpy as np

from ecsjack import C_constant, P_trig, SolutionSpec, jack_build, jack_eval, norm_N, scalar_product

g = 1.5
P = jack_build((2, 1, 0), 3, g)
print("P_(2,1,0) in monomials, g = 1.5:")
for mu, c in P.coeffs.items():
    print(f"  m_{mu}: {c:.6f}")

z = np.exp(1j * np.array([0.4, 2.1, 4.0]))
for r in [(2, 1, 0), (3, -1, -2), (1, 1, 1)]:
    spec = SolutionSpec(g, 1, 3, r)
    lhs = P_trig(spec, z)
    rhs = C_constant(spec) * jack_eval(jack_build(spec.lam, 3, g), z)
    print(f"r = {r}: integral {lhs:.10f}, C * Jack {rhs:.10f}")

print("\nunordered r = (1, 2, 0):", abs(P_trig(SolutionSpec(g, 1, 3, (1, 2, 0)), z)))

# orthogonality under the torus weight
A, B = jack_build((2, 0), 2, g), jack_build((1, 1), 2, g)
print("\n<P_(2,0), P_(1,1)>' =", abs(scalar_product(A, B, 2, g, 1.0, 256)))
print("<P_(2,0), P_(2,0)>' =", scalar_product(A, A, 2, g, 1.0, 256).real,
      " norm formula:", norm_N((2, 0), 2, g))
