"""How fast the Jack generating function converges.

The truncated sum over partitions with |lambda| <= cutoff approaches
prod (1 - z_j/xi_k)^(-g).  With two variables the number of terms of weight
w grows like binomial(w + 5, 5), so at |z/xi| = 0.2 a cutoff of 6 leaves a
tail near 1e-2.  The tail shrinks geometrically once the cutoff grows.
"""
from ecsjack.verify import genfun_check

z, xi = [0.2, 0.2], [1.0, 1.0]
for cutoff in (4, 6, 8, 10, 12, 14):
    r = genfun_check(2, 2, 1.5, z, xi, cutoff)
    print(f"cutoff {cutoff:2d}: |LHS - sum| = {r.residual:.2e}")

r = genfun_check(1, 1, 1.5, [0.2], [1.0], 12)
print(f"\none variable, cutoff 12: {r.residual:.2e}")
