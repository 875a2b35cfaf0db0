"""Integral representations of the elliptic solutions and their eigenvalues.

The central object is the nested contour integral

    P(z; p) = prod_j z_j^{r_L} oint ... oint prod_{a,j} dxi_aj/(2 pi i xi_aj) xi_aj^{r_a - r_{a+1}}
              * [theta ratios]^g

with levels ``a = 1..L-1`` of ``N_a`` variables on circles ``rho_1 > ... >
rho_{L-1}``.  The integrand couples only neighbouring levels, so the sum over
the tensor grid is contracted level by level (a chain of matrix-vector
products) instead of being evaluated on every node tuple.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .elliptic import (EllipticParams, _as_params, eta1_over_pi, log_theta, log_theta_tail,
                       pair_weight, theta, vartheta)
from .errors import DimensionError, DomainError, ScheduleError, SingularityError
from .quadrature import (DEFAULT_BUDGET, GridSpec, QuadResult, RadiusSchedule, default_schedule,
                         level_nodes, level_rule)
from .symfunc import SolutionSpec, spec_lambda

_ROW_CHUNK = 4096


@dataclass(frozen=True)
class EvalPoint:
    """Evaluation point in multiplicative (``z``) or additive (``x``) form."""

    z: tuple
    x: Optional[tuple] = None
    primary: str = "z"

    @classmethod
    def from_x(cls, x):
        x = tuple(complex(v) if np.iscomplexobj(v) else float(v) for v in np.ravel(x))
        z = tuple(complex(np.exp(1j * v)) for v in x)
        return cls(z, x, "x")

    @classmethod
    def from_z(cls, z):
        return cls(tuple(complex(v) for v in np.ravel(z)), None, "z")

    @property
    def n(self) -> int:
        return len(self.z)

    def array(self) -> np.ndarray:
        return np.asarray(self.z, dtype=complex)


def _z_batch(z) -> tuple[np.ndarray, bool]:
    if isinstance(z, EvalPoint):
        return z.array()[None, :], True
    arr = np.asarray(z, dtype=complex)
    if arr.ndim == 1:
        return arr[None, :], True
    if arr.ndim != 2:
        raise DomainError("z must be a vector or a (K, n) batch")
    return arr, False


# ---------------------------------------------------------------------------
# the nested integral


def _circle_log_tables(params: EllipticParams, M: int, ratio: float, tail_only: bool):
    u = ratio * np.exp(2j * math.pi * np.arange(M) / M)
    return log_theta_tail(u, params) if tail_only else log_theta(u, params)


class PIntegral:
    """Precomputed nested integral for one ``(spec, p, schedule, M)``.

    Calling the object evaluates ``P(z; p)`` at a batch of points.  The
    expensive part, contracting levels ``1..L-1``, happens once in the
    constructor.
    """

    def __init__(self, spec: SolutionSpec, params: EllipticParams, schedule: RadiusSchedule,
                 M: int, budget: int = DEFAULT_BUDGET):
        self.spec, self.params, self.schedule, self.M = spec, params, schedule, int(M)
        g = spec.g
        levels = spec.N[:-1]
        if sum(levels) > budget:
            raise DimensionError(f"total dimension {sum(levels)} exceeds the budget {budget}")
        if len(schedule.radii) != spec.L - 1:
            raise ScheduleError(f"schedule has {len(schedule.radii)} radii, need {spec.L - 1}")
        self.rules = [level_rule(N, self.M, g) for N in levels]
        F = None
        omega = np.exp(2j * math.pi * np.arange(self.M) / self.M)
        for a, rule in enumerate(self.rules):
            rho = schedule.radii[a]
            own = self._own(rule, rho, spec.r[a] - spec.r[a + 1], omega)
            if F is None:
                F = own
            else:
                ell = _circle_log_tables(params, self.M, rho / schedule.radii[a - 1], False)
                F = own * self._couple(rule.index, self.rules[a - 1].index, ell, F)
        self.F = F

    def _own(self, rule, rho, expo, omega):
        g, M = self.spec.g, self.M
        idx = rule.index
        N = idx.shape[1]
        w = rule.weight.astype(complex)
        w = w * rho ** (N * expo) * omega[(expo * idx.sum(axis=1)) % M]
        if N > 1 and self.params.trunc > 0:
            tail = _circle_log_tables(self.params, M, 1.0, True)
            s = np.zeros(idx.shape[0], dtype=complex)
            for j in range(N):
                for k in range(j + 1, N):
                    d = (idx[:, j] - idx[:, k]) % M
                    s += tail[d] + tail[(-d) % M]
            w = w * np.exp(g * s)
        if N > 1 and rule.offsets != (0.0,) * N:
            raise DimensionError("staggered levels are not supported in the contracted path")
        return w

    def _couple(self, I, J, ell, F):
        # out[i] = sum_j exp(-g sum_{j',k'} ell[I[i,j'] - J[j,k']]) F[j]
        g, M = self.spec.g, self.M
        out = np.empty(I.shape[0], dtype=complex)
        for start in range(0, I.shape[0], _ROW_CHUNK):
            Ic = I[start:start + _ROW_CHUNK]
            S = np.zeros((Ic.shape[0], J.shape[0]), dtype=complex)
            for jp in range(Ic.shape[1]):
                for kp in range(J.shape[1]):
                    S += ell[(Ic[:, jp][:, None] - J[:, kp][None, :]) % M]
            out[start:start + Ic.shape[0]] = np.exp(-g * S) @ F
        return out

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if z.ndim == 1:
            z = z[None, :]
        spec = self.spec
        if z.shape[1] != spec.n:
            raise DomainError(f"expected {spec.n} variables, got {z.shape[1]}")
        if np.any(z == 0):
            raise DomainError("z_j = 0 is outside the domain")
        pref = np.prod(z, axis=1) ** spec.r[-1]
        if spec.L == 1:
            return pref
        self.schedule.validate(np.abs(z).ravel())
        g, M = spec.g, self.M
        rho = self.schedule.radii[-1]
        xi = rho * np.exp(2j * math.pi * np.arange(M) / M)
        out = np.empty(z.shape[0], dtype=complex)
        J = self.rules[-1].index
        for i0 in range(0, z.shape[0], 64):
            zc = z[i0:i0 + 64]
            G = np.sum(log_theta(zc[:, :, None] / xi[None, None, :], self.params), axis=1)
            S = np.zeros((zc.shape[0], J.shape[0]), dtype=complex)
            for kp in range(J.shape[1]):
                S += G[:, J[:, kp]]
            out[i0:i0 + zc.shape[0]] = np.exp(-g * S) @ self.F
        return pref * out


def _resolve(spec, params, schedule, grid, zb):
    params = EllipticParams.from_p(0.0) if params is None else _as_params(params)
    if schedule is None:
        schedule = default_schedule(spec.L, abs(params.p), zb)
    elif schedule.mode == "elliptic" and schedule.p_abs != abs(params.p) and schedule.radii:
        schedule = RadiusSchedule(schedule.radii, abs(params.p), schedule.z_band, schedule.mode)
    grid = GridSpec() if grid is None else grid
    return params, schedule, grid


def P_integral(spec: SolutionSpec, z, params=None, schedule: Optional[RadiusSchedule] = None,
               grid: Optional[GridSpec] = None, budget: int = DEFAULT_BUDGET) -> QuadResult:
    """Nested integral with convergence data; ``value`` is an array over the batch."""
    zb, _ = _z_batch(z)
    params, schedule, grid = _resolve(spec, params, schedule, grid, zb)
    if spec.L == 1:
        return QuadResult(np.prod(zb, axis=1) ** spec.r[0], 0)
    schedule.validate(np.abs(zb).ravel())
    prev, hist = None, []
    for M in grid.sequence():
        val = PIntegral(spec, params, schedule, M, budget)(zb)
        hist.append((M, val))
        if prev is not None:
            err = float(np.max(np.abs(val - prev)))
            if err <= max(grid.tol * float(np.max(np.abs(val))), grid.atol):
                return QuadResult(val, M, err, True, hist)
        prev = val
    if grid.mode == "fixed":
        return QuadResult(prev, grid.M, 0.0, True, hist)
    err = float(np.max(np.abs(hist[-1][1] - hist[-2][1]))) if len(hist) > 1 else math.inf
    return QuadResult(prev, hist[-1][0], err, False, hist)


def P_elliptic(spec: SolutionSpec, z, params=None, schedule: Optional[RadiusSchedule] = None,
               grid: Optional[GridSpec] = None, budget: int = DEFAULT_BUDGET):
    """Elliptic generalization ``P_{r,s,L}(z; p)`` of the Jack polynomial.

    ``z`` may be an :class:`EvalPoint`, a vector of length ``n`` (returns a
    complex number) or a ``(K, n)`` batch (returns an array).  Default
    schedules are chosen by :func:`ecsjack.quadrature.default_schedule`.
    """
    zb, single = _z_batch(z)
    val = P_integral(spec, zb, params, schedule, grid, budget).value
    return complex(val[0]) if single else val


def P_trig(spec: SolutionSpec, z, schedule: Optional[RadiusSchedule] = None,
           grid: Optional[GridSpec] = None, budget: int = DEFAULT_BUDGET):
    """The ``p = 0`` integral: ``C_L(r;s) P_lambda(z)`` for ordered ``r``, zero otherwise."""
    zb, single = _z_batch(z)
    if np.any(zb == 0):
        raise DomainError("z_j = 0 is outside the domain")
    if schedule is not None and schedule.mode != "trig":
        schedule = RadiusSchedule(schedule.radii, 0.0, schedule.z_band, "trig")
    val = P_integral(spec, zb, EllipticParams.from_p(0.0), schedule, grid, budget).value
    return complex(val[0]) if single else val


# ---------------------------------------------------------------------------
# prefactor, solution, kernel


def _pair_sum(x, fn):
    n = x.shape[-1]
    out = None
    for j in range(n):
        for k in range(j + 1, n):
            v = fn(x[..., j] - x[..., k])
            out = v if out is None else out * v
    return out


def Psi_prefactor(x, params, g: float):
    """``Psi_n(x) = [prod_{j != k} theta(z_j/z_k; p)]^{g/2}`` for real ``x``.

    With a real nome each pair contributes ``|theta(e^{i(x_j - x_k)})|^g``,
    so the result is real and nonnegative.
    """
    params = _as_params(params)
    x = np.asarray(x, dtype=float)
    if x.shape[-1] <= 1:
        out = np.ones(x.shape[:-1])
        return out if out.ndim else 1.0
    if g < 1:
        d = np.abs(np.angle(np.exp(1j * (x[..., :, None] - x[..., None, :]))))
        iu = np.triu_indices(x.shape[-1], 1)
        if np.any(d[..., iu[0], iu[1]] < 1e-12):
            warnings.warn("coinciding coordinates: Psi vanishes with a singular derivative",
                          RuntimeWarning, stacklevel=2)
    if params.is_real:
        out = _pair_sum(x, lambda d: pair_weight(np.exp(1j * d), 0.5 * g, params))
    else:
        out = _pair_sum(x, lambda d: np.exp(0.5 * g * (log_theta(np.exp(1j * d), params)
                                                        + log_theta(np.exp(-1j * d), params))))
    out = np.asarray(out)
    return out if out.ndim else out[()]


def psi_full(spec: SolutionSpec, x, params, schedule: Optional[RadiusSchedule] = None,
             grid: Optional[GridSpec] = None, budget: int = DEFAULT_BUDGET):
    """``psi(x; tau) = Psi_n(x) P(e^{i x}; p)``; ``x`` is a vector or a ``(K, n)`` batch."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xb = x[None, :] if single else x
    params = _as_params(params)
    P = P_integral(spec, np.exp(1j * xb), params, schedule, grid, budget).value
    val = Psi_prefactor(xb, params, spec.g) * P
    return complex(val[0]) if single else val


def kernel_K(x, y, params, g: float):
    """Kernel function ``Psi_N(x) Psi_M(y) / [prod_{j,k} vartheta(x_j - y_k)]^g``.

    Each ``vartheta(x_j - y_k)^g`` is a principal-branch power.  Inputs may
    carry a leading batch axis.
    """
    params = _as_params(params)
    x = np.asarray(x)
    y = np.asarray(y)
    N, M = x.shape[-1], y.shape[-1]
    batch = np.broadcast_shapes(x.shape[:-1], y.shape[:-1])
    logden = np.zeros(batch, dtype=complex)
    for j in range(N):
        for k in range(M):
            v = np.asarray(vartheta(x[..., j] - y[..., k], params)).astype(complex)
            if np.any(np.abs(v) < 1e-12):
                raise SingularityError("vartheta vanishes at x_j - y_k; separate the points")
            logden = logden + np.log(v)
    out = np.exp(-g * logden)
    if N > 1:
        out = out * Psi_prefactor(x.real if np.iscomplexobj(x) else x, params, g)
    if M > 1:
        out = out * Psi_prefactor(y.real if np.iscomplexobj(y) else y, params, g)
    out = np.asarray(out, dtype=complex)
    return out if out.ndim else complex(out)


# ---------------------------------------------------------------------------
# one integral transform


class TransformStep:
    """``z -> prod z_j^r oint prod dxi/(2 pi i xi) xi^{-r'} [theta ratios]^g P_inner(xi)``.

    ``P_inner`` takes a ``(K, M)`` array of nodes and the nome and returns
    ``K`` values.  Inner values are cached per grid size.
    """

    def __init__(self, P_inner, N, M, r, r_prime, rho, params, grid, g):
        self.P_inner, self.N, self.Mv = P_inner, int(N), int(M)
        self.r, self.r_prime, self.rho = int(r), int(r_prime), float(rho)
        self.params = _as_params(params)
        self.grid, self.g = grid, float(g)
        if self.N <= self.Mv:
            raise DomainError("a transform step needs N > M")
        rho0 = getattr(P_inner, "rho0", None)
        p = abs(self.params.p)
        if rho0 is not None and not (p * rho0 < self.rho < rho0):
            raise ScheduleError(f"|p| rho0 < rho < rho0 violated (rho0 = {rho0}, rho = {rho})")
        self.rho0 = self.rho
        self._cache = {}

    def _level(self, M):
        if M not in self._cache:
            rule = level_rule(self.Mv, M, self.g)
            xi = level_nodes(rule, self.rho)
            w = rule.weight * xi.prod(axis=1) ** (-self.r_prime)
            if self.Mv > 1 and self.params.trunc > 0:
                s =np.zeros(xi.shape[0], dtype=complex)
                for j in range(self.Mv):
                    for k in range(j + 1, self.Mv):
                        s += log_theta_tail(xi[:, j] / xi[:, k], self.params)
                        s += log_theta_tail(xi[:, k] / xi[:, j], self.params)
                w = w * np.exp(self.g * s)
            inner = np.asarray(self.P_inner(xi, self.params), dtype=complex)
            self._cache[M] = (xi, w * inner)
        return self._cache[M]

    def _eval(self, z, M):
        xi, w = self._level(M)
        out = np.empty(z.shape[0], dtype=complex)
        for i0 in range(0, z.shape[0], 16):
            zc = z[i0:i0 + 16]
            S = np.zeros((zc.shape[0], xi.shape[0]), dtype=complex)
            for j in range(self.N):
                for k in range(self.Mv):
                    S += log_theta(zc[:, j][:, None] / xi[None, :, k], self.params)
            out[i0:i0 + zc.shape[0]] = np.exp(-self.g * S) @ w
        return np.prod(z, axis=1) ** self.r * out

    def __call__(self, z, params=None):
        if params is not None and _as_params(params) != self.params:
            raise DomainError("the step was built for a different nome")
        zb, single = _z_batch(z)
        if zb.shape[1] != self.N:
            raise DomainError(f"expected {self.N} variables")
        za = np.abs(zb)
        p = abs(self.params.p)
        if np.any(za >= self.rho) or np.any(za <= p * self.rho):
            raise ScheduleError("|p| rho < |z_j| < rho violated")
        prev = None
        for M in self.grid.sequence():
            val = self._eval(zb, M)
            if prev is not None and np.max(np.abs(val - prev)) <= max(
                    self.grid.tol * np.max(np.abs(val)), self.grid.atol):
                break
            prev = val
        return complex(val[0]) if single else val


def transform_step(P_inner: Callable, N: int, M: int, r: int, r_prime: int, rho: float,
                   params, grid: GridSpec, g: float) -> TransformStep:
    """One integral transform from ``M`` to ``N`` variables; see :class:`TransformStep`."""
    return TransformStep(P_inner, N, M, r, r_prime, rho, params, grid, g)


def monomial_base(r1: int):
    """Base-case function ``xi -> prod xi_j^{r_1}`` in the form used by :func:`transform_step`."""
    def base(xi, params=None):
        return np.prod(np.asarray(xi, dtype=complex), axis=-1) ** r1
    return base


# ---------------------------------------------------------------------------
# eigenvalues


def eigen_d(spec: SolutionSpec) -> int:
    """Euler eigenvalue ``sum_j lambda_j``."""
    return int(spec_lambda(spec).weight())


def eigen_E(spec: SolutionSpec, params) -> complex:
    """``sum_j (lambda_j + g (n + 1 - 2j)/2)^2 + g^2 n (n - 1) (eta_1/pi - 1/12)``."""
    params = _as_params(params)
    lam = spec_lambda(spec).parts
    n, g = spec.n, spec.g
    base = sum((lam[j] + 0.5 * g * (n - 1 - 2 * j)) ** 2 for j in range(n))
    return complex(base + g * g * n * (n - 1) * (eta1_over_pi(params) - 1.0 / 12.0))


def c_constant_NM(N: int, M: int, g: float, params) -> complex:
    """Constant ``c_NM`` in the kernel-function identity."""
    params = _as_params(params)
    e = eta1_over_pi(params)
    return complex(g * g * (N * (N - 1) - M * (M - 1)) * e
                   + g * g * (N - M) * (N * (N - 1) + M * (M - 1) - 2 * N * M) / 12.0)


@dataclass(frozen=True)
class TransformParams:
    """Parameters of one transform step from ``M`` to ``N`` variables."""

    N: int
    M: int
    r: int
    r_prime: int
    g: float
    params: EllipticParams = field(default_factory=lambda: EllipticParams.from_p(0.0))

    def __post_init__(self):
        if not self.N > self.M >= 0:
            raise DomainError("need N > M >= 0")

    @property
    def Q(self) -> float:
        return self.r - self.M * self.g / 2

    @property
    def Q_prime(self) -> float:
        return self.r_prime - self.N * self.g / 2

    @property
    def C_NM(self) -> complex:
        return cmath.exp(1j * math.pi * self.g * self.N * self.M / 2)

    @property
    def c_NM(self) -> complex:
        return c_constant_NM(self.N, self.M, self.g, self.params)


def eigen_update(d_M: float, E_M: complex, tp: TransformParams):
    """Eigenvalues after one transform step."""
    Q, Qp, N, M = tp.Q, tp.Q_prime, tp.N, tp.M
    d_N = d_M + N * Q - M * Qp
    E_N = E_M + 2 * (Q - Qp) * d_M + M * Qp ** 2 - 2 * M * Q * Qp + N * Q ** 2 + tp.c_NM
    return d_N, E_N


def base_eigenvalues(spec: SolutionSpec, params):
    """``(d, E)`` of the base case with ``N_1 = s_1`` variables."""
    r1, s1, g = spec.r[0], spec.s1, spec.g
    if s1 == 1:
        return float(r1), complex(r1 * r1)
    return float(s1 * r1), complex(s1 * r1 * r1) + c_constant_NM(s1, 0, g, params)


def recursion_eigenvalues(spec: SolutionSpec, params):
    """Run :func:`eigen_update` along the levels with ``r'_a = r_a``."""
    params = _as_params(params)
    d, E = base_eigenvalues(spec, params)
    Ns = spec.N
    for a in range(1, spec.L):
        tp = TransformParams(Ns[a], Ns[a - 1], spec.r[a], spec.r[a], spec.g, params)
        d, E = eigen_update(d, E, tp)
    return d, E


def _c_affine(N: int, M: int, g):
    """``c_NM = A + B eta_1/pi`` as the pair ``(A, B)``."""
    A = g * g * (N - M) * (N * (N - 1) + M * (M - 1) - 2 * N * M) / 12
    B = g * g * (N * (N - 1) - M * (M - 1))
    return A, B


def recursion_affine(spec: SolutionSpec):
    """Exact recursion: ``(d, A, B)`` with ``E = A + B eta_1/pi``.

    Runs in rational arithmetic on the (exact) binary value of ``g``, so the
    comparison with :func:`closed_affine` is free of rounding.
    """
    g = Fraction(spec.g)
    r1, s1 = spec.r[0], spec.s1
    if s1 == 1:
        d, A, B = Fraction(r1), Fraction(r1 * r1), Fraction(0)
    else:
        A0, B0 = _c_affine(s1, 0, g)
        d, A, B = Fraction(s1 * r1), s1 * r1 * r1 + A0, B0
    Ns = spec.N
    for a in range(1, spec.L):
        N, M, r = Ns[a], Ns[a - 1], spec.r[a]
        Q, Qp = r - M * g / 2, r - N * g / 2
        Ac, Bc = _c_affine(N, M, g)
        A = A + 2 * (Q - Qp) * d + M * Qp ** 2 - 2 * M * Q * Qp + N * Q ** 2 + Ac
        B = B + Bc
        d = d + N * Q - M * Qp
    return d, A, B


def closed_affine(spec: SolutionSpec):
    """Closed-form ``(d, A, B)`` in rational arithmetic."""
    g = Fraction(spec.g)
    lam = spec_lambda(spec).parts
    n = spec.n
    base = sum((lam[j] + g * (n - 1 - 2 * j) / 2) ** 2 for j in range(n))
    return Fraction(sum(lam)), base - g * g * n * (n - 1) / 12, g * g * n * (n - 1)
