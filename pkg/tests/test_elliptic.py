import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ecsjack.elliptic import (Branch, EllipticParams, default_trunc, eta1_over_pi, pair_weight,
                              potential_V, theta, theta_pow, vartheta, weierstrass_p)
from ecsjack.errors import DomainError, SingularityError


def direct_theta(z, p, trunc=200):
    out = 1 - z
    for l in range(1, trunc + 1):
        out *= (1 - p ** l * z) * (1 - p ** l / z)
    return out


def direct_eta1(tau, trunc=40):
    return 1 / 12 + sum(1 / (2 * np.sin(m * math.pi * tau) ** 2) for m in range(1, trunc + 1))


# --- params -----------------------------------------------------------------

def test_trunc_rule():
    assert default_trunc(0.0) == 0
    assert default_trunc(0.1) == max(20, math.ceil(math.log(1e-18) / math.log(0.1)) + 2)
    assert default_trunc(0.9) == math.ceil(math.log(1e-18) / math.log(0.9)) + 2
    for p in (0.05, 0.3, 0.7):
        assert p ** default_trunc(p) < 1e-18


def test_params_validation():
    with pytest.raises(DomainError):
        EllipticParams.from_p(1.0)
    with pytest.raises(DomainError):
        EllipticParams.from_p(-1.2)
    with pytest.raises(DomainError):
        EllipticParams(p=0.1, tau=0.5j)
    with pytest.raises(DomainError):
        EllipticParams.from_tau(-1j)


def test_from_tau_consistency():
    P = EllipticParams.from_tau(0.25 + 1j)
    assert abs(P.p - np.exp(2j * math.pi * (0.25 + 1j))) < 1e-16
    Q = EllipticParams.from_tau_im(0.5)
    assert Q.p.imag == 0 and Q.is_real
    assert Q.p.real == pytest.approx(math.exp(-math.pi))


def test_complex_nome_uses_per_factor_branch():
    assert EllipticParams.from_p(0.1j).branch is Branch.PER_FACTOR_PRINCIPAL
    assert EllipticParams.from_p(0.1).branch is Branch.PAIRED_REAL_POWER


# --- theta ------------------------------------------------------------------

def test_theta_p0_and_zero():
    for z in (0.3, -2.0, 1 + 1j):
        assert theta(z, 0.0) == pytest.approx(1 - z, abs=0)
    assert theta(1.0, 0.3) == 0
    with pytest.raises(DomainError):
        theta(0.0, 0.1)


def test_theta_against_long_product():
    assert abs(theta(0.5, EllipticParams.from_p(0.1, trunc=60)) - direct_theta(0.5, 0.1)) < 1e-15
    for z in (0.7 + 0.2j, 1.3j, -0.4):
        for p in (0.05, 0.3, 0.2 + 0.1j):
            assert abs(theta(z, p) - direct_theta(z, p)) < 1e-14 * abs(direct_theta(z, p))


def test_theta_quasi_periodicity():
    rng = np.random.default_rng(1)
    for p in (0.05, 0.3):
        r = rng.uniform(p, 1, 10)
        z = r * np.exp(1j * rng.uniform(0, 2 * math.pi, 10))
        lhs = theta(p * z, p)
        rhs = -theta(z, p) / z
        assert np.max(np.abs(lhs - rhs) / np.abs(rhs)) < 1e-13


def test_theta_conjugation_real_p():
    z = np.array([0.4 + 0.3j, 1.2 - 0.5j, -0.8j])
    assert np.max(np.abs(np.conj(theta(z, 0.2)) - theta(np.conj(z), 0.2))) < 1e-14


def test_truncation_plateau():
    z = np.array([0.5 + 0.5j, 0.9, 1.5j])
    for p in (0.05, 0.3, 0.6):
        P = EllipticParams.from_p(p)
        a = theta(z, P)
        b = theta(z, P.with_trunc(P.trunc + 10))
        assert np.max(np.abs(a - b) / np.abs(b)) <= 1e-14


# --- powers ----------------------------------------------------------------

def test_theta_pow_integer_powers():
    z = np.array([0.6 + 0.3j, 1.4 - 0.2j, -0.9])
    for g in (1, 2, 3):
        assert np.max(np.abs(theta_pow(z, g, 0.2) - theta(z, 0.2) ** g)
                      / np.abs(theta(z, 0.2) ** g)) < 1e-13


def test_theta_pow_real_positive_and_oracle():
    v = theta_pow(0.9, 1.5, 0.05)
    oracle = np.exp(1.5 * (np.log(1 - 0.9) + sum(np.log(1 - 0.05 ** l * 0.9) + np.log(1 - 0.05 ** l / 0.9)
                                                  for l in range(1, 201))))
    assert abs(v.imag) < 1e-16 and v.real > 0
    assert abs(v - oracle) < 1e-14 * abs(oracle)


def test_theta_pow_zero_guard():
    with pytest.raises(SingularityError):
        theta_pow(1.0, 0.5, 0.1)


def test_pair_weight_examples():
    assert pair_weight(1.0, 1.5, 0.1) == 0
    assert pair_weight(-1.0, 1, 0.0) == pytest.approx(4.0)
    u = np.exp(1j * math.pi / 3)
    assert pair_weight(u, 1.5, 0.1) == pytest.approx(abs(theta(u, 0.1)) ** 3, rel=1e-14)
    with pytest.raises(DomainError):
        pair_weight(1.1, 1.0, 0.1)
    with pytest.raises(DomainError):
        pair_weight(1j, 1.0, 0.1j)
    with pytest.raises(SingularityError):
        pair_weight(1.0, -0.5, 0.1)


# --- vartheta ----------------------------------------------------------------

def test_vartheta_values():
    assert vartheta(0.0, 0.3) == 0
    assert vartheta(math.pi, 0.0) == pytest.approx(2.0)
    x = np.linspace(0.1, 6.0, 7)
    assert np.max(np.abs(vartheta(x, 0.2) ** 2 - pair_weight(np.exp(1j * x), 1, 0.2))) < 1e-13


def test_vartheta_theta_relation():
    x = np.array([0.4, 1.1 - 0.3j, 2.5 - 0.1j])
    P = EllipticParams.from_p(0.1)
    lhs = vartheta(x, P)
    rhs = 1j * np.exp(-0.5j * x) * theta(np.exp(1j * x), P)
    assert np.max(np.abs(lhs - rhs)) < 1e-13


def test_vartheta_square_is_theta_pair():
    rng = np.random.default_rng(3)
    x = rng.uniform(-3, 3, 10)
    lhs = vartheta(x, 0.3) ** 2
    rhs = theta(np.exp(1j * x), 0.3) * theta(np.exp(-1j * x), 0.3)
    assert np.max(np.abs(lhs - rhs)) < 1e-13


# --- eta1, V, wp ------------------------------------------------------------

def test_eta1_limits_and_oracle():
    assert eta1_over_pi(0.0) == pytest.approx(1 / 12)
    assert abs(eta1_over_pi(EllipticParams.from_tau_im(8.0)) - 1 / 12) < 1e-20
    v = eta1_over_pi(EllipticParams.from_tau(1j))
    assert abs(v.imag) < 1e-16
    assert abs(v - direct_eta1(1j)) < 1e-15


def test_V_symmetries():
    P = EllipticParams.from_tau(1j)
    for x in (0.3, 1.7, 2.9 + 0.4j):
        assert abs(potential_V(x + 2 * math.pi, P) - potential_V(x, P)) < 1e-13
        assert abs(potential_V(-x, P) - potential_V(x, P)) < 1e-13


def test_V_double_pole_and_guard():
    P = EllipticParams.from_p(0.1)
    x = 1e-4
    assert potential_V(x, P) * x ** 2 == pytest.approx(1.0, rel=1e-6)
    with pytest.raises(SingularityError):
        potential_V(0.0, P)
    with pytest.raises(SingularityError):
        potential_V(2 * math.pi, P)


def test_V_matches_lattice_wp():
    P = EllipticParams.from_tau(1j)
    rng = np.random.default_rng(5)
    e = eta1_over_pi(P)
    for x in [1.0] + list(rng.uniform(0.2, 6.0, 3)):
        wp = weierstrass_p(x, math.pi, math.pi * 1j)
        assert abs(potential_V(x, P) - wp - e) < 1e-12


def test_wp_properties():
    w1, w2 = math.pi, math.pi * 1j
    x = 0.7 + 0.3j
    assert abs(weierstrass_p(-x, w1, w2) - weierstrass_p(x, w1, w2)) < 1e-11
    assert abs(weierstrass_p(x + 2 * w1, w1, w2) - weierstrass_p(x, w1, w2)) < 1e-9
    assert abs(weierstrass_p(1.0, w1, w2).imag) < 1e-12
    with pytest.raises(SingularityError):
        weierstrass_p(2 * w2, w1, w2)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 0.6), st.floats(0.05, 0.95), st.floats(0, 2 * math.pi))
def test_quasi_periodicity_property(p, r, phi):
    z = max(r, 1.05 * p) * np.exp(1j * phi)
    lhs = theta(p * z, p)
    rhs = -theta(z, p) / z
    assert abs(lhs - rhs) <= 1e-12 * max(abs(rhs), 1e-12)
