"""Elliptic generalizations of Jack polynomials from nested contour integrals."""

__version__ = "0.1.0"

from .elliptic import (Branch, EllipticParams, eta1_over_pi, pair_weight, potential_V, theta,
                       theta_pow, vartheta, weierstrass_p)
from .symfunc import (IntegerVector, JackPolynomial, SolutionSpec, C_constant, b_coeff,
                      dominance_leq, jack_build, jack_eval, monomial_eval, norm_N, scalar_product,
                      spec_lambda)
from .quadrature import (GridSpec, QuadResult, RadiusSchedule, circle_nodes, level_rule,
                         make_schedule, nested_integrate)
from .ecsolve import (EvalPoint, TransformParams, P_elliptic, P_trig, Psi_prefactor, c_constant_NM,
                      closed_affine, eigen_E, eigen_d, eigen_update, kernel_K, psi_full,
                      recursion_affine, transform_step)
from .verify import (FDScheme, VerificationReport, apply_D, apply_H, euler_residual, genfun_check,
                     kernel_check, limit_p0_check, orthogonality_check, pde_residual,
                     radius_invariance_check, recursion_check)
