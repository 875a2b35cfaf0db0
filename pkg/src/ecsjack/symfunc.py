"""Partitions, monomial symmetric polynomials, numeric Jack polynomials and the
explicit constants attached to them.

Jack polynomials ``P^{(1/g)}_lambda`` are built as eigenfunctions of the
trigonometric Calogero-Sutherland operator

    H = sum_i (z_i d_i)^2 + g sum_{i<j} (z_i + z_j)/(z_i - z_j) (z_i d_i - z_j d_j)

which is triangular on the monomial basis in dominance order.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln

from .errors import DegeneracyError, DomainError, UndefinedConstantError
from .quadrature import level_nodes, level_rule

Partition = Tuple[int, ...]


@dataclass(frozen=True)
class IntegerVector:
    """A finite integer vector ``(lambda_1, ..., lambda_n)``."""

    parts: Tuple[int, ...]

    def __init__(self, parts):
        object.__setattr__(self, "parts", tuple(int(x) for x in parts))

    @property
    def n(self) -> int:
        return len(self.parts)

    def __len__(self):
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def __getitem__(self, i):
        return self.parts[i]

    def ordered(self) -> bool:
        return all(a >= b for a, b in zip(self.parts, self.parts[1:]))

    def partition(self) -> bool:
        return self.ordered() and (not self.parts or self.parts[-1] >= 0)

    def weight(self) -> int:
        return sum(self.parts)

    def strip(self) -> Partition:
        """Partition part with trailing zeros removed."""
        return tuple(x for x in self.parts if x != 0)

    def conjugate(self) -> Partition:
        if not self.partition():
            raise DomainError("conjugate requires a partition")
        lam = self.strip()
        if not lam:
            return ()
        return tuple(sum(1 for x in lam if x >= k) for k in range(1, lam[0] + 1))

    def shifted(self, r: int) -> "IntegerVector":
        return IntegerVector(x + r for x in self.parts)

    def padded(self, n: int) -> "IntegerVector":
        if n < self.n:
            raise DomainError(f"cannot pad length {self.n} down to {n}")
        return IntegerVector(self.parts + (0,) * (n - self.n))

    def __str__(self):
        return "(" + ",".join(str(x) for x in self.parts) + ")"


def _vec(x) -> IntegerVector:
    return x if isinstance(x, IntegerVector) else IntegerVector(x)


@dataclass(frozen=True)
class SolutionSpec:
    """Label ``(g, k, L, r, s1)`` of a solution.

    ``n = s1 + k (L - 1)`` variables, level sizes ``N_a = s1 + (a - 1) k`` and
    ``lambda = (r_1^{s1}, r_2^k, ..., r_L^k)``.
    """

    g: float
    k: int
    L: int
    r: Tuple[int, ...]
    s1: int = 1

    def __post_init__(self):
        r = tuple(int(x) for x in (self.r.parts if isinstance(self.r, IntegerVector) else self.r))
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "g", float(self.g))
        if self.k < 1:
            raise DomainError("k must be a positive integer")
        if self.L < 1:
            raise DomainError("L must be a positive integer")
        if len(r) != self.L:
            raise DomainError(f"r must have L = {self.L} entries, got {len(r)}")
        if self.k == 1 and self.s1 != 1:
            raise DomainError("s1 must be 1 when k = 1")
        if self.s1 not in (1, self.k):
            raise DomainError("s1 must be 1 or k")
        if not self.g > 0:
            raise DomainError("g must be positive")

    @property
    def s(self) -> Tuple[int, ...]:
        return (self.s1,) + (self.k,) * (self.L - 1)

    @property
    def N(self) -> Tuple[int, ...]:
        """Level sizes ``(N_1, ..., N_L)``."""
        return tuple(self.s1 + a * self.k for a in range(self.L))

    @property
    def n(self) -> int:
        return self.s1 + self.k * (self.L - 1)

    @property
    def kappa(self) -> float:
        return self.k * self.g

    @property
    def lam(self) -> IntegerVector:
        return spec_lambda(self)

    def ordered(self) -> bool:
        return all(a >= b for a, b in zip(self.r, self.r[1:]))

    def to_dict(self) -> dict:
        return {"g": self.g, "k": self.k, "L": self.L, "r": list(self.r), "s1": self.s1}


def spec_lambda(spec: SolutionSpec) -> IntegerVector:
    """``lambda = (r_1^{s_1}, r_2^k, ..., r_L^k)``."""
    parts = []
    for a, (ra, sa) in enumerate(zip(spec.r, spec.s)):
        parts.extend([ra] * sa)
    return IntegerVector(parts)


def lambda_level(spec: SolutionSpec, a: int) -> IntegerVector:
    """``lambda^{(a)} = (r_1^{s_1}, ..., r_a^{s_a})`` for ``a = 1..L``."""
    parts = []
    for ra, sa in zip(spec.r[:a], spec.s[:a]):
        parts.extend([ra] * sa)
    return IntegerVector(parts)


# ---------------------------------------------------------------------------
# partitions and monomials


class Dominance:
    LEQ = "less-equal"
    GREATER = "greater"
    INCOMPARABLE = "incomparable"


def dominance_leq(mu, lam) -> str:
    """Compare ``mu`` with ``lam`` in the dominance order."""
    mu, lam = _vec(mu).parts, _vec(lam).parts
    n = max(len(mu), len(lam))
    mu = mu + (0,) * (n - len(mu))
    lam = lam + (0,) * (n - len(lam))
    if sum(mu) != sum(lam):
        return Dominance.INCOMPARABLE
    pm, pl = np.cumsum(mu), np.cumsum(lam)
    if np.all(pm <= pl):
        return Dominance.LEQ
    if np.all(pm >= pl):
        return Dominance.GREATER
    return Dominance.INCOMPARABLE


def partitions(total: int, n: int, largest: Optional[int] = None):
    """Partitions of ``total`` into at most ``n`` parts, reverse-lex order, padded to ``n``."""
    if largest is None:
        largest = total
    if n == 0:
        if total == 0:
            yield ()
        return
    if total == 0:
        yield (0,) * n
        return
    for first in range(min(total, largest), 0, -1):
        if first * n < total:
            break
        for rest in partitions(total - first, n - 1, first):
            yield (first,) + rest


@lru_cache(maxsize=4096)
def _distinct_perms(parts: Partition):
    return np.array(sorted(set(itertools.permutations(parts))), dtype=np.int64)


def monomial_eval(lam, z) -> np.ndarray | complex:
    """Monomial symmetric polynomial ``m_lambda(z)``; ``z`` may carry leading batch axes."""
    z = np.asarray(z, dtype=complex)
    n = z.shape[-1]
    lam = _vec(lam)
    if lam.n > n:
        if any(lam.parts[n:]):
            raise DomainError("partition has more nonzero parts than variables")
        lam = IntegerVector(lam.parts[:n])
    lam = lam.padded(n)
    perms = _distinct_perms(lam.parts)
    out = np.sum(np.prod(z[..., None, :] ** perms, axis=-1), axis=-1)
    return out if out.ndim else complex(out)


# ---------------------------------------------------------------------------
# Jack polynomials


def _cs_on_monomial(mu: Partition, g: float) -> Dict[Partition, float]:
    """Coefficients of ``H m_mu`` on sorted monomials (i.e. on ``m_nu``)."""
    n = len(mu)
    out: Dict[Partition, float] = {}

    def add(key, val):
        key = tuple(key)
        if list(key) == sorted(key, reverse=True):
            out[key] = out.get(key, 0.0) + val

    for a in _distinct_perms(mu):
        a = tuple(int(x) for x in a)
        add(a, float(sum(x * x for x in a)))
        for i in range(n):
            for j in range(n):
                d = a[i] - a[j]
                if i == j or d <= 0:
                    continue
                # pair (i, j) and its swap combine into
                # d (z_i z_j)^{a_j} [z_i^d + z_j^d + 2 sum_{l=1}^{d-1} z_i^{d-l} z_j^l];
                # the swapped term contributes the same, so each adds half
                base = list(a)
                base[i] = base[j] = a[j]
                for l in range(0, d + 1):
                    e = list(base)
                    e[i] += d - l
                    e[j] += l
                    c = 0.5 if l in (0, d) else 1.0
                    add(e, g * d * c)
    return out


def cs_eigenvalue(lam: Sequence[int], g: float) -> float:
    """Eigenvalue ``sum lam_i^2 + g sum (n + 1 - 2i) lam_i`` of the operator above."""
    n = len(lam)
    return float(sum(x * x + g * (n + 1 - 2 * (i + 1)) * x for i, x in enumerate(lam)))


@dataclass(frozen=True)
class JackPolynomial:
    """``(z_1...z_n)^shift * sum_mu coeffs[mu] m_mu(z)``, monic in ``m_{lambda - shift}``."""

    lam: IntegerVector
    n: int
    g: float
    coeffs: Dict[Partition, float] = field(hash=False, compare=False)
    shift: int = 0

    def __call__(self, z):
        return jack_eval(self, z)

    @property
    def reduced(self) -> Partition:
        return tuple(x - self.shift for x in self.lam.parts)


def jack_build(lam, n: Optional[int] = None, g: float = 1.0) -> JackPolynomial:
    """Jack polynomial ``P^{(1/g)}_{lambda,n}`` for an ordered integer vector.

    Coefficients solve ``(E_lambda - E_mu) v_mu = sum_{nu > mu} h_{mu nu} v_nu``
    over partitions ``mu`` dominated by ``lambda``.  A negative last part is
    handled by factoring out ``(z_1...z_n)^{lambda_n}``.
    """
    lam = _vec(lam)
    n = lam.n if n is None else int(n)
    if lam.n < n:
        lam = lam.padded(n)
    if lam.n != n:
        raise DomainError(f"lambda has {lam.n} parts but n = {n}")
    if not lam.ordered():
        raise DomainError(f"{lam} is not ordered")
    if not g > 0:
        raise DomainError("g must be positive")
    shift = lam.parts[-1] if n else 0
    red = tuple(x - shift for x in lam.parts)
    coeffs = _jack_coeffs(red, float(g))
    return JackPolynomial(lam, n, float(g), coeffs, shift)


@lru_cache(maxsize=512)
def _jack_coeffs_cached(red: Partition, g: float):
    n = len(red)
    below = [mu for mu in partitions(sum(red), n)
             if dominance_leq(mu, red) == Dominance.LEQ]
    E = cs_eigenvalue(red, g)
    v = {red: 1.0}
    H = {}
    for mu in below:
        if mu != red:
            gap = E - cs_eigenvalue(mu, g)
            if abs(gap) < 1e-10:
                raise DegeneracyError(f"eigenvalue collision between {red} and {mu} at g = {g}")
    # reverse-lex is a total refinement of dominance: bigger partitions first
    for mu in below:
        if mu == red:
            continue
        acc = 0.0
        for nu, vnu in v.items():
            if nu not in H:
                H[nu] = _cs_on_monomial(nu, g)
            acc += H[nu].get(mu, 0.0) * vnu
        v[mu] = acc / (E - cs_eigenvalue(mu, g))
    return tuple(v.items())


def _jack_coeffs(red: Partition, g: float) -> Dict[Partition, float]:
    return dict(_jack_coeffs_cached(red, g))


def jack_eval(jp: JackPolynomial, z) -> np.ndarray | complex:
    """Evaluate a Jack polynomial; ``z`` has shape ``(..., n)``."""
    z = np.asarray(z, dtype=complex)
    if z.shape[-1] != jp.n:
        raise DomainError(f"expected {jp.n} variables, got {z.shape[-1]}")
    if jp.shift < 0 and np.any(z == 0):
        raise DomainError("zero coordinate with a negative shift")
    out = np.zeros(z.shape[:-1], dtype=complex)
    for mu, c in jp.coeffs.items():
        out = out + c * monomial_eval(mu, z)
    if jp.shift:
        out = out * np.prod(z, axis=-1) ** jp.shift
    return out if out.ndim else complex(out)


# ---------------------------------------------------------------------------
# constants


def norm_N(lam, n: Optional[int] = None, g: float = 1.0) -> float:
    """Quadratic norm ``<P_lambda, P_lambda>'`` for the scalar product below.

    ``prod_{j<k} Gamma(d + g(a+1)) Gamma(d + g(a-1) + 1) / (Gamma(d + g a) Gamma(d + g a + 1))``
    with ``d = lambda_j - lambda_k`` and ``a = k - j``.
    """
    lam = _vec(lam)
    n = lam.n if n is None else int(n)
    if lam.n < n:
        lam = lam.padded(n)
    if not g > 0:
        raise DomainError("g must be positive")
    parts = lam.parts
    tot = 0.0
    for j in range(n):
        for k in range(j + 1, n):
            d = parts[j] - parts[k]
            a = k - j
            args_num = (d + g * (a + 1), d + g * (a - 1) + 1)
            args_den = (d + g * a, d + g * a + 1)
            for x in args_num + args_den:
                if x <= 0 and float(x).is_integer():
                    raise DomainError(f"gamma pole at argument {x}")
            tot += sum(gammaln(x) for x in args_num) - sum(gammaln(x) for x in args_den)
    return float(math.exp(tot))


def b_coeff(lam, g: float) -> float:
    """``prod_{cells (j,k)} [lam_j - k + g(lam'_k - j + 1)] / [lam_j - k + 1 + g(lam'_k - j)]``."""
    lam = _vec(lam)
    if not lam.partition():
        raise DomainError(f"{lam} is not a partition")
    parts = lam.strip()
    conj = lam.conjugate()
    out = 1.0
    for j, lj in enumerate(parts, start=1):
        for k in range(1, lj + 1):
            num = lj - k + g * (conj[k - 1] - j + 1)
            den = lj - k + 1 + g * (conj[k - 1] - j)
            if den == 0:
                raise DegeneracyError(f"zero denominator at cell ({j},{k})")
            out *= num / den
    return float(out)


def C_constant(spec: SolutionSpec) -> float:
    """Constant ``C_L(r;s)`` relating the trigonometric integral to ``P_lambda``.

    ``prod_{a<L} N_a! N_{lambda^(a), N_a}(g) b_{lambda^(a) - (r_{a+1}^{N_a})}(g)``.
    """
    if not spec.ordered():
        raise UndefinedConstantError(f"r = {spec.r} is not ordered; the limit vanishes")
    out = 1.0
    for a in range(1, spec.L):
        Na = spec.N[a - 1]
        lam_a = lambda_level(spec, a)
        out *= math.factorial(Na) * norm_N(lam_a, Na, spec.g) * b_coeff(
            lam_a.shifted(-spec.r[a]), spec.g)
    return out


# ---------------------------------------------------------------------------
# scalar product


def scalar_product(f: Callable, h: Callable, n: int, g: float, rho: float = 1.0,
                   M: int = 256) -> complex:
    """``<f, h>' = (1/n!) oint prod_{j != k} (1 - z_j/z_k)^g f(z) h(1/z)``.

    The circle ``|z_j| = rho`` is discretized with ``M`` nodes; the singular
    pair weight is integrated exactly by product-integration weights, so the
    rule is exact for Laurent polynomials ``f(z) h(1/z)`` of degree below
    ``M/n`` in each variable.  ``f`` and ``h`` take arrays of shape ``(K, n)``.
    """
    if not g > 0.5:
        raise DomainError("the weight is not integrable for g <= 1/2")
    if n == 0:
        return complex(np.asarray(f(np.zeros((1, 0)))).ravel()[0]
                       * np.asarray(h(np.zeros((1, 0)))).ravel()[0])
    rule = level_rule(n, M, g)
    z = level_nodes(rule, rho)
    vals = np.asarray(f(z), dtype=complex) * np.asarray(h(1.0 / z), dtype=complex)
    return complex(np.sum(vals * rule.weight)) / math.factorial(n)
