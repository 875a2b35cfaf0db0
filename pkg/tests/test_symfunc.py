import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ecsjack.errors import DegeneracyError, DomainError, UndefinedConstantError
from ecsjack.symfunc import (C_constant, Dominance, IntegerVector, SolutionSpec, b_coeff,
                             dominance_leq, jack_build, jack_eval, lambda_level, monomial_eval,
                             norm_N, partitions, scalar_product, spec_lambda)


def brute_monomial(lam, z):
    lam = tuple(lam) + (0,) * (len(z) - len(lam))
    return sum(np.prod([zi ** a for zi, a in zip(z, perm)]) for perm in set(itertools.permutations(lam)))


# --- integer vectors and specs -------------------------------------------------

def test_integer_vector_predicates():
    assert IntegerVector((3, 1, -2)).ordered()
    assert not IntegerVector((3, 1, -2)).partition()
    assert IntegerVector((2, 2, 0)).partition()
    assert not IntegerVector((1, 2)).ordered()
    assert IntegerVector((3, 1)).conjugate() == (2, 1, 1)
    assert IntegerVector((2, 2, 1)).conjugate() == (3, 2)


def test_spec_lambda_examples():
    assert spec_lambda(SolutionSpec(1.5, 1, 2, (3, 1))).parts == (3, 1)
    s = SolutionSpec(1.5, 2, 2, (2, 0), 1)
    assert spec_lambda(s).parts == (2, 0, 0) and s.n == 3
    s = SolutionSpec(1.5, 2, 2, (1, 0), 2)
    assert spec_lambda(s).parts == (1, 1, 0, 0) and s.n == 4
    assert s.N == (2, 4) and s.kappa == 3.0


def test_spec_validation():
    with pytest.raises(DomainError):
        SolutionSpec(1.5, 1, 2, (1, 0), 2)
    with pytest.raises(DomainError):
        SolutionSpec(1.5, 3, 2, (1, 0), 2)
    with pytest.raises(DomainError):
        SolutionSpec(1.5, 1, 3, (1, 0))


# --- dominance and monomials --------------------------------------------------

def test_dominance_examples():
    assert dominance_leq((1, 1), (2, 0)) == Dominance.LEQ
    assert dominance_leq((2, 1, 0), (2, 1, 0)) == Dominance.LEQ
    assert dominance_leq((3, 1, 1, 1), (2, 2, 2, 0)) == Dominance.INCOMPARABLE
    assert dominance_leq((2, 0), (1, 1)) == Dominance.GREATER


def test_partitions_enumeration():
    assert list(partitions(3, 2)) == [(3, 0), (2, 1)]
    assert len(list(partitions(6, 3))) == 7


def test_monomial_examples():
    z = np.array([0.3 + 0.1j, -1.2])
    assert monomial_eval((1,), z) == pytest.approx(z.sum())
    assert monomial_eval((1, 1), z) == pytest.approx(z.prod())
    # distinct permutations of (2,1,0) at (1,2,3): 2 + 3 + 4 + 12 + 9 + 18
    assert monomial_eval((2, 1), (1, 2, 3)) == pytest.approx(48)
    assert monomial_eval((2, 1), (1, 2, 3)) == pytest.approx(brute_monomial((2, 1), (1, 2, 3)))


# --- Jack polynomials -----------------------------------------------------------

def test_jack_trivial_cases():
    assert jack_build((1, 0), 2, 1.3).coeffs == {(1, 0): 1.0}
    assert jack_build((1, 1), 2, 1.3).coeffs == {(0, 0): 1.0}
    z = np.array([0.4, 1.1j])
    assert jack_eval(jack_build((1, 0), 2, 0.8), z) == pytest.approx(z.sum())


def test_jack_two_parts_closed_form():
    # P_(2) in two variables: m_2 + 2g/(1+g) m_11
    for g in (0.6, 1.5, 2.7):
        P = jack_build((2, 0), 2, g)
        assert P.coeffs[(1, 1)] == pytest.approx(2 * g / (1 + g), rel=1e-14)
    P = jack_build((2, 0), 2, 1.5)
    assert jack_eval(P, (1, 1)) == pytest.approx(2 + P.coeffs[(1, 1)])


def test_jack_g1_is_schur():
    # at g = 1 Jack polynomials are Schur polynomials: s_(2,1) = m_21 + 2 m_111
    assert jack_build((2, 1, 0), 3, 1.0).coeffs[(1, 1, 1)] == pytest.approx(2.0)


def test_jack_gram_schmidt_oracle():
    # P_(2,0) = m_2 + c m_11 with c fixed by <P, m_11>' = 0
    g = 1.5
    m2 = lambda z: monomial_eval((2,), z)
    m11 = lambda z: monomial_eval((1, 1), z)
    c = -scalar_product(m2, m11, 2, g, 1.0, 128) / scalar_product(m11, m11, 2, g, 1.0, 128)
    assert abs(c - jack_build((2, 0), 2, g).coeffs[(1, 1)]) < 1e-8


def test_jack_orthogonal_to_lower_monomials():
    g = 1.5
    for lam in [(2, 0), (3, 0), (2, 1, 0), (3, 1, 0), (2, 2, 0), (4, 0, 0)]:
        n = len(lam)
        P = jack_build(lam, n, g)
        for mu in partitions(sum(lam), n):
            if mu != lam and dominance_leq(mu, lam) == Dominance.LEQ:
                m = lambda z, mu=mu: monomial_eval(mu, z)
                assert abs(scalar_product(P, m, n, g, 1.0, 64)) < 1e-10


def test_jack_pieri_shift():
    g = 1.5
    P = jack_build((2, 1, 0), 3, g)
    Q = jack_build((4, 3, 2), 3, g)
    R = jack_build((1, 0, -1), 3, g)
    assert P.coeffs == Q.coeffs == R.coeffs
    z = np.array([0.7 + 0.2j, -0.5, 1.3j])
    assert abs(jack_eval(Q, z) - z.prod() ** 2 * jack_eval(P, z)) < 1e-13 * abs(jack_eval(Q, z))
    assert abs(jack_eval(R, z) - jack_eval(P, z) / z.prod()) < 1e-13 * abs(jack_eval(R, z))
    with pytest.raises(DomainError):
        jack_eval(R, [0.0, 1.0, 2.0])


def test_jack_rejects_unordered():
    with pytest.raises(DomainError):
        jack_build((0, 1), 2, 1.0)


def test_jack_degeneracy_detected():
    # E_(2,0) - E_(1,1) = 2 + 2g vanishes at g = -1
    with pytest.raises((DegeneracyError, DomainError)):
        jack_build((2, 0), 2, -1.0)


# --- constants ------------------------------------------------------------------

def test_norm_examples():
    assert norm_N((4,), 1, 2.2) == 1.0
    g = 1.5
    assert norm_N((0, 0), 2, g) == pytest.approx(math.gamma(2 * g + 1) / (2 * math.gamma(g + 1) ** 2))
    assert norm_N((1, 0), 2, g) == pytest.approx(math.gamma(4) / (math.gamma(2.5) * math.gamma(3.5)))
    assert norm_N((6, 5), 2, g) == pytest.approx(norm_N((1, 0), 2, g), rel=1e-14)


def test_norm_matches_quadrature():
    g = 1.5
    P = jack_build((1, 0), 2, g)
    assert abs(scalar_product(P, P, 2, g, 1.0, 512) - norm_N((1, 0), 2, g)) < 1e-8 * norm_N((1, 0), 2, g)


def test_b_coeff_examples():
    assert b_coeff((), 0.7) == 1.0
    assert b_coeff((1,), 0.7) == pytest.approx(0.7)
    g = 1.5
    for l in range(1, 7):
        assert b_coeff((l,), g) == pytest.approx(math.gamma(g + l) / (math.gamma(g) * math.factorial(l)))
    # brute-force cell product for (2,1)
    cells = [(1, 1, 2, 2), (1, 2, 2, 1), (2, 1, 1, 2)]
    val = 1.0
    for j, k, lj, ck in cells:
        val *= (lj - k + g * (ck - j + 1)) / (lj - k + 1 + g * (ck - j))
    assert b_coeff((2, 1), g) == pytest.approx(val)


def test_C_constant_examples():
    assert C_constant(SolutionSpec(1.5, 1, 1, (3,))) == 1.0
    for g in (0.6, 1.5, 2.7):
        assert C_constant(SolutionSpec(g, 1, 2, (1, 0))) == pytest.approx(g)
    assert C_constant(SolutionSpec(1.5, 1, 3, (2, 1, 0))) > 0
    with pytest.raises(UndefinedConstantError):
        C_constant(SolutionSpec(1.5, 1, 2, (0, 1)))


def test_lambda_levels():
    s = SolutionSpec(1.5, 2, 3, (3, 1, 0), 2)
    assert lambda_level(s, 1).parts == (3, 3)
    assert lambda_level(s, 2).parts == (3, 3, 1, 1)


# --- scalar product -----------------------------------------------------------------

def test_scalar_product_trivial():
    one = lambda z: np.ones(z.shape[0])
    assert scalar_product(one, one, 1, 1.5, 1.0, 16) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        scalar_product(one, one, 2, 0.5, 1.0, 16)


def test_orthogonality_small_instances():
    g = 1.5
    P1, P2 = jack_build((1, 0), 2, g), jack_build((2, 0), 2, g)
    assert abs(scalar_product(P1, P2, 2, g, 1.0, 512)) < 1e-8


def test_scalar_product_radius_independence():
    g = 1.5
    for lam in [(2, 0), (2, 1, 0)]:
        n = len(lam)
        P = jack_build(lam, n, g)
        vals = [scalar_product(P, P, n, g, rho, 64) for rho in (0.5, 1.0, 2.0)]
        assert max(abs(v - vals[1]) for v in vals) < 1e-10 * abs(vals[1])


def test_generating_function_two_variables():
    g = 1.5
    z = np.array([0.1 + 0.05j, -0.08])
    xi = np.array([1.0, 0.6 + 0.8j])
    lhs = np.prod([(1 - a / b) ** (-g) for a in z for b in xi])
    rhs = 0
    for w in range(7):
        for lam in partitions(w, 2):
            P = jack_build(lam, 2, g)
            rhs += b_coeff(lam, g) * jack_eval(P, z) * jack_eval(P, 1 / xi)
    assert abs(lhs - rhs) < 1e-4


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=2, max_size=3), st.floats(0.6, 3.0))
def test_jack_monic_and_real(parts, g):
    lam = tuple(sorted(parts, reverse=True))
    P = jack_build(lam, len(lam), g)
    assert P.coeffs[tuple(x - lam[-1] for x in lam)] == 1.0
    assert all(isinstance(v, float) and math.isfinite(v) for v in P.coeffs.values())
    assert all(dominance_leq(mu, P.reduced) == Dominance.LEQ for mu in P.coeffs)
