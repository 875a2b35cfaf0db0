"""Theta functions, the elliptic potential and related constants.

Conventions: ``z = exp(i x)`` for multiplicative variables and
``p = exp(2 pi i tau)`` for the nome.  All functions accept numpy arrays and
broadcast over them.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import DomainError, SingularityError

TWO_PI = 2.0 * math.pi

_TRUNC_TARGET = 1e-18
_POLE_GUARD = 1e-10
_ZERO_GUARD = 1e-14


class Branch(enum.Enum):
    """How non-integer powers of theta products are taken."""

    PER_FACTOR_PRINCIPAL = "per-factor-principal"
    PAIRED_REAL_POWER = "paired-real-power"


def default_trunc(p_abs: float) -> int:
    """Product/series truncation order with ``|p|**trunc < 1e-18``."""
    if p_abs == 0.0:
        return 0
    if not 0.0 < p_abs < 1.0:
        raise DomainError(f"|p| must lie in [0, 1), got {p_abs}")
    return max(20, math.ceil(math.log(_TRUNC_TARGET) / math.log(p_abs)) + 2)


@dataclass(frozen=True)
class EllipticParams:
    """Nome ``p`` together with its modular parameter ``tau``.

    Build instances with :meth:`from_p` or :meth:`from_tau`; the direct
    constructor checks consistency when both are given.
    """

    p: complex
    tau: Optional[complex] = None
    trunc: int = -1
    branch: Branch = Branch.PAIRED_REAL_POWER

    def __post_init__(self):
        p = complex(self.p)
        if abs(p) >= 1.0:
            raise DomainError(f"nome must satisfy |p| < 1, got |p| = {abs(p):.6g}")
        object.__setattr__(self, "p", p)
        if self.tau is not None:
            tau = complex(self.tau)
            if tau.imag <= 0:
                raise DomainError("tau must have positive imaginary part")
            if abs(p - np.exp(2j * math.pi * tau)) > 1e-14 * max(abs(p), 1e-300):
                raise DomainError("p and tau are inconsistent: p != exp(2 pi i tau)")
            object.__setattr__(self, "tau", tau)
        if self.trunc < 0:
            object.__setattr__(self, "trunc", default_trunc(abs(p)))
        if self.branch is Branch.PAIRED_REAL_POWER and p.imag != 0.0:
            object.__setattr__(self, "branch", Branch.PER_FACTOR_PRINCIPAL)

    @classmethod
    def from_p(cls, p, trunc: Optional[int] = None, branch: Optional[Branch] = None):
        kw = {}
        if trunc is not None:
            kw["trunc"] = int(trunc)
        if branch is not None:
            kw["branch"] = branch
        return cls(p=complex(p), **kw)

    @classmethod
    def from_tau(cls, tau, trunc: Optional[int] = None):
        tau = complex(tau)
        if tau.imag <= 0:
            raise DomainError("tau must have positive imaginary part")
        p = complex(np.exp(2j * math.pi * tau))
        if tau.real == 0.0:
            p = complex(p.real, 0.0)
        return cls(p=p, tau=tau, trunc=-1 if trunc is None else int(trunc))

    @classmethod
    def from_tau_im(cls, t: float, trunc: Optional[int] = None):
        """Purely imaginary ``tau = i t``; then ``p = exp(-2 pi t)`` is real."""
        if t <= 0:
            raise DomainError("Im tau must be positive")
        return cls(p=complex(math.exp(-TWO_PI * t), 0.0), tau=complex(0.0, t),
                   trunc=-1 if trunc is None else int(trunc))

    @property
    def is_real(self) -> bool:
        return self.p.imag == 0.0 and self.p.real >= 0.0

    @property
    def tau_value(self) -> complex:
        if self.tau is not None:
            return self.tau
        if self.p == 0:
            return complex(0.0, math.inf)
        return complex(np.log(self.p) / (2j * math.pi))

    def with_trunc(self, trunc: int) -> "EllipticParams":
        return replace(self, trunc=int(trunc))

    def powers(self) -> np.ndarray:
        """``p**l`` for ``l = 1..trunc``."""
        if self.trunc == 0:
            return np.zeros(0, dtype=complex)
        return self.p ** np.arange(1, self.trunc + 1)


def _as_params(params) -> EllipticParams:
    if isinstance(params, EllipticParams):
        return params
    return EllipticParams.from_p(params)


def _check_nonzero(z):
    if np.any(z == 0):
        raise DomainError("theta(z; p) is undefined at z = 0")


def theta(z, params) -> np.ndarray | complex:
    """Multiplicative theta function ``(1-z) prod_l (1-p^l z)(1-p^l/z)``."""
    params = _as_params(params)
    z = np.asarray(z, dtype=complex)
    _check_nonzero(z)
    out = 1.0 - z
    pw = params.powers()
    if pw.size:
        zz = z[..., None]
        out = out * np.prod((1.0 - pw * zz) * (1.0 - pw / zz), axis=-1)
    return out if out.ndim else complex(out)


def log_theta_tail(z, params) -> np.ndarray:
    """Sum of principal logs of the ``l >= 1`` factors of theta."""
    params = _as_params(params)
    z = np.asarray(z, dtype=complex)
    pw = params.powers()
    if not pw.size:
        return np.zeros(z.shape, dtype=complex)
    zz = z[..., None]
    return np.sum(np.log1p(-pw * zz) + np.log1p(-pw / zz), axis=-1)


def log_theta(z, params) -> np.ndarray:
    """Per-factor principal logarithm of theta (no zero guard)."""
    z = np.asarray(z, dtype=complex)
    return np.log(1.0 - z) + log_theta_tail(z, params)


def theta_pow(z, g: float, params) -> np.ndarray | complex:
    """``theta(z; p)**g`` taken as a product of principal powers of each factor.

    Valid on ``|p| < |z| < 1/|p|`` where every factor stays in the right
    half-plane, so the result is continuous away from zeros of theta.
    """
    params = _as_params(params)
    z = np.asarray(z, dtype=complex)
    _check_nonzero(z)
    th = theta(z, params)
    if np.any(np.abs(th) < _ZERO_GUARD):
        raise SingularityError("theta(z; p) vanishes at a requested point; move the contour")
    g = float(g)
    if g == int(g) and abs(g) <= 64:
        out = np.asarray(th ** int(g), dtype=complex)
    else:
        out = np.exp(g * log_theta(z, params))
    return out if out.ndim else complex(out)


def pair_weight(u, g: float, params) -> np.ndarray | float:
    """``[theta(u) theta(1/u)]**g`` for ``|u| = 1`` and real ``0 <= p < 1``.

    On the unit circle with real nome the base equals ``|theta(u)|**2`` so the
    power is real and nonnegative.
    """
    params = _as_params(params)
    if not params.is_real:
        raise DomainError("pair_weight requires a real nome 0 <= p < 1")
    u = np.asarray(u, dtype=complex)
    if np.any(np.abs(np.abs(u) - 1.0) > 1e-12):
        raise DomainError("pair_weight requires |u| = 1")
    base = np.abs(theta(u, params)) ** 2
    g = float(g)
    if g < 0 and np.any(base < _ZERO_GUARD):
        raise SingularityError("pair_weight with negative power at u = 1")
    if g == 0:
        out = np.ones_like(base)
    else:
        with np.errstate(divide="ignore"):
            out = base ** g
    return out if out.ndim else float(out)


def vartheta(x, params) -> np.ndarray:
    """``2 sin(x/2) prod_m (1 - 2 p^m cos x + p^{2m})``.

    Real input with a real nome gives a real result, which keeps the sign of
    the value (and hence any principal-branch phase) unambiguous.
    """
    params = _as_params(params)
    x = np.asarray(x)
    real_path = params.is_real and not np.iscomplexobj(x)
    if real_path:
        x = x.astype(float)
        pw = params.powers().real
    else:
        x = x.astype(complex)
        pw = params.powers()
    out = 2.0 * np.sin(0.5 * x)
    if pw.size:
        c = np.cos(x)[..., None]
        out = out * np.prod(1.0 - 2.0 * pw * c + pw * pw, axis=-1)
    return out if out.ndim else out[()]


def _inv_four_sin_sq(s):
    # 1/(4 sin^2 w) written in terms of s = exp(2 i w)
    return -s / (1.0 - s) ** 2


def eta1_over_pi(params) -> complex:
    """Quasi-period constant ``eta_1(tau)/pi = 1/12 + sum 1/(2 sin^2(m pi tau))``."""
    params = _as_params(params)
    pw = params.powers()
    if not pw.size:
        return complex(1.0 / 12.0)
    terms = 2.0 * _inv_four_sin_sq(pw)
    # summing small terms first keeps the tail from being swamped
    return complex(1.0 / 12.0 + np.sum(terms[::-1]))


def potential_V(x, params) -> np.ndarray | complex:
    """Elliptic pair potential ``sum_m 1/(4 sin^2(x/2 + pi m tau))``.

    Equals the Weierstrass function with periods ``(2 pi, 2 pi tau)`` shifted
    by ``eta_1/pi``.
    """
    params = _as_params(params)
    x = np.asarray(x, dtype=complex)
    pw = np.concatenate([[1.0 + 0j], params.powers()])
    e = np.exp(1j * x)[..., None]
    s_pos = e * pw                    # m = 0, 1, ..., trunc
    s_neg = pw[1:] / e                # m = -1, ..., -trunc
    dist = np.concatenate([np.abs(1.0 - s_pos), np.abs(1.0 - s_neg)], axis=-1)
    if np.any(dist < _POLE_GUARD):
        raise SingularityError("potential_V evaluated within 1e-10 of a lattice pole")
    out = np.sum(_inv_four_sin_sq(s_pos)[..., ::-1], axis=-1) + np.sum(
        _inv_four_sin_sq(s_neg)[..., ::-1], axis=-1)
    return out if out.ndim else complex(out)


def _divisor_sigma(n: int, k: int) -> int:
    return sum(d ** k for d in range(1, n + 1) if n % d == 0)


def _eisenstein_g4_g6(tau: complex, nterms: int = 60):
    q = np.exp(2j * math.pi * tau)
    e4 = 1.0 + 240.0 * sum(_divisor_sigma(n, 3) * q ** n for n in range(1, nterms + 1))
    e6 = 1.0 - 504.0 * sum(_divisor_sigma(n, 5) * q ** n for n in range(1, nterms + 1))
    return (math.pi ** 4 / 45.0) * e4, (2.0 * math.pi ** 6 / 945.0) * e6


def weierstrass_p(x, omega1, omega2, trunc: int = 40) -> complex:
    """Weierstrass ``wp(x | omega1, omega2)`` by direct lattice summation.

    The lattice ``2 m omega1 + 2 n omega2`` is summed over the box
    ``|m|, |n| <= trunc``.  The omitted tail is restored through its Laurent
    expansion in ``x`` using Eisenstein series for the full-lattice moments,
    which keeps the result independent of the trigonometric-sum formula.
    """
    omega1 = complex(omega1)
    omega2 = complex(omega2)
    tau = omega2 / omega1
    if tau.imag <= 0:
        if (-tau).imag > 0:
            omega2 = -omega2
            tau = -tau
        else:
            raise DomainError("periods must be linearly independent over R")
    x = complex(x)
    m = np.arange(-trunc, trunc + 1)
    om = 2.0 * m[:, None] * omega1 + 2.0 * m[None, :] * omega2
    om = om.ravel()
    om = om[om != 0]
    if np.min(np.abs(x - om)) < _POLE_GUARD or abs(x) < _POLE_GUARD:
        raise SingularityError("weierstrass_p evaluated on the period lattice")
    box = np.sum(1.0 / (x - om) ** 2 - 1.0 / om ** 2)
    g4, g6 = _eisenstein_g4_g6(tau)
    scale = 2.0 * omega1
    g4 = g4 / scale ** 4
    g6 = g6 / scale ** 6
    g8 = 3.0 * g4 * g4 / 7.0
    g10 = 5.0 * g4 * g6 / 11.0
    tail = 0.0
    for k, gfull in ((4, g4), (6, g6), (8, g8), (10, g10)):
        t = gfull - np.sum(om ** (-k))
        tail += (k - 1) * x ** (k - 2) * t
    return complex(1.0 / x ** 2 + box + tail)
