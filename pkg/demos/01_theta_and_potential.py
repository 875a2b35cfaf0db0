"""Theta functions and the elliptic potential.

The multiplicative theta function is the elliptic deformation of (1 - z).
This walk-through checks its defining symmetry and shows how the potential
V(x) relates to the Weierstrass function.
"""
import math

import numpy as np

from ecsjack import EllipticParams, eta1_over_pi, potential_V, theta, vartheta
from ecsjack.elliptic import weierstrass_p

P = EllipticParams.from_p(0.1)
print(f"nome p = {P.p.real}, product truncated after {P.trunc} factors\n")

# theta(p z) = -theta(z)/z
z = 0.6 * np.exp(1j * np.linspace(0.2, 5.0, 5))
dev = np.abs(theta(P.p * z, P) + theta(z, P) / z)
print("quasi-periodicity deviations:", np.array2string(dev, precision=1))

# As p -> 0 the product collapses to its first factor.
for t in (0.5, 1.0, 2.0, 4.0):
    Q = EllipticParams.from_tau_im(t)
    print(f"Im tau = {t:3.1f}  p = {Q.p.real:.2e}  theta(0.5) - 0.5 = {theta(0.5, Q).real - 0.5:+.3e}")

# vartheta is odd and 2 pi (anti)periodic along the real axis.
x = np.linspace(0.3, 6.0, 4)
print("\nvartheta(x) + vartheta(-x):", np.abs(vartheta(x, P) + vartheta(-x, P)).max())

# V = wp + eta_1/pi for periods (pi, pi tau)
T = EllipticParams.from_tau(1j)
e = eta1_over_pi(T).real
print(f"\ntau = i: eta_1/pi = {e:.15f} (trigonometric value 1/12 = {1 / 12:.15f})")
for xv in (0.5, 1.5, math.pi):
    V = potential_V(xv, T).real
    wp = weierstrass_p(xv, math.pi, math.pi * 1j).real
    print(f"  x = {xv:.4f}: V = {V:.12f}, wp + eta_1/pi = {wp + e:.12f}")
