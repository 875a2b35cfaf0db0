"""Numerical checks of the identities satisfied by the integral solutions.

Every check returns :class:`VerificationReport` records.  Derivatives are
taken by finite differences of fully assembled functions; the time-like
derivative is taken along ``tau = i t`` with ``p = exp(-2 pi t)`` real, where
``(i/pi) d/dtau = (1/pi) d/dt``.

Tolerances are implementation targets chosen for double precision, not
claims about the underlying mathematics.
"""
from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence

import numpy as np

from .elliptic import EllipticParams, _as_params, eta1_over_pi, potential_V
from .ecsolve import (P_integral, Psi_prefactor, c_constant_NM, eigen_d, eigen_E,
                      closed_affine, kernel_K, recursion_affine, recursion_eigenvalues)
from .errors import DomainError, EvaluationError
from .quadrature import GridSpec, RadiusSchedule, default_schedule, make_schedule
from .symfunc import (C_constant, SolutionSpec, b_coeff, jack_build, jack_eval, norm_N,
                      partitions, scalar_product)

TARGET_NOTE = "tolerance is an implementation target, not a property of the identity"


@dataclass
class VerificationReport:
    """Outcome of one check; ``passed`` is ``residual <= tolerance``."""

    check_name: str
    inputs: dict
    residual: float
    tolerance: float
    passed: bool = False
    grid_M: int = 0
    runtime_ms: int = 0
    details: dict = field(default_factory=dict)
    note: str = TARGET_NOTE

    def __post_init__(self):
        self.residual = float(abs(self.residual))
        self.passed = bool(self.residual <= self.tolerance)

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


class _Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.ms = int(round(1000 * (time.perf_counter() - self.t0)))


# ---------------------------------------------------------------------------
# finite differences


@dataclass(frozen=True)
class FDScheme:
    """Central finite differences of order 2 or 4 with optional Richardson step."""

    order: int = 4
    h: float = 0.02
    richardson: bool = True

    def __post_init__(self):
        if self.order not in (2, 4):
            raise ValueError("order must be 2 or 4")
        if not 1e-4 <= self.h <= 1e-1:
            raise ValueError("h must lie in [1e-4, 1e-1]")

    def _steps(self):
        return (self.h, self.h / 2) if self.richardson else (self.h,)

    def offsets(self) -> np.ndarray:
        k = (1, 2) if self.order == 4 else (1,)
        s = {0.0}
        for h in self._steps():
            for m in k:
                s.update((m * h, -m * h))
        return np.array(sorted(s))

    def _combine(self, vals: dict, deriv: int):
        est = []
        for h in self._steps():
            f = lambda m: vals[round(m * h, 15)]
            if deriv == 1:
                if self.order == 4:
                    d = (-f(2) + 8 * f(1) - 8 * f(-1) + f(-2)) / (12 * h)
                else:
                    d = (f(1) - f(-1)) / (2 * h)
            else:
                if self.order == 4:
                    d = (-f(2) + 16 * f(1) - 30 * f(0) + 16 * f(-1) - f(-2)) / (12 * h * h)
                else:
                    d = (f(1) - 2 * f(0) + f(-1)) / (h * h)
            est.append(d)
        if len(est) == 1:
            return est[0]
        return est[1] + (est[1] - est[0]) / (2 ** self.order - 1)

    def derivatives(self, line: Callable[[np.ndarray], np.ndarray]):
        """``(f(0), f'(0), f''(0))`` for ``line`` mapping offsets to values."""
        s = self.offsets()
        v = np.asarray(line(s))
        if not np.all(np.isfinite(v)):
            raise EvaluationError("non-finite sample in finite-difference stencil")
        vals = {round(float(si), 15): vi for si, vi in zip(s, v)}
        return vals[0.0], self._combine(vals, 1), self._combine(vals, 2)


def _line(fn, x, e):
    x = np.asarray(x, dtype=float)
    return lambda s: fn(x[None, :] + np.asarray(s)[:, None] * e[None, :])


def apply_D(fn: Callable, x, scheme: FDScheme = FDScheme()) -> complex:
    """``-i sum_j d fn/dx_j``; ``fn`` maps a ``(K, n)`` batch to ``K`` values.

    The sum of partial derivatives is the derivative along ``(1, ..., 1)``.
    """
    x = np.asarray(x, dtype=float)
    _, d1, _ = scheme.derivatives(_line(fn, x, np.ones_like(x)))
    return complex(-1j * d1)


def _min_separation(x) -> float:
    x = np.asarray(x, dtype=float)
    best = math.inf
    for j in range(x.size):
        for k in range(j + 1, x.size):
            d = abs((x[j] - x[k] + math.pi) % (2 * math.pi) - math.pi)
            best = min(best, d)
    return best


def _potential_sum(x, params, g) -> complex:
    x = np.asarray(x, dtype=float)
    tot = 0j
    for j in range(x.size):
        for k in range(j + 1, x.size):
            tot += 2 * g * (g - 1) * potential_V(x[j] - x[k], params)
    return tot


def _laplacian(fn, x, scheme):
    x = np.asarray(x, dtype=float)
    f0, lap = None, 0j
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = 1.0
        f0, _, d2 = scheme.derivatives(_line(fn, x, e))
        lap += d2
    return f0, lap


def apply_H(fn: Callable, x, params, g: float, scheme: FDScheme = FDScheme()) -> complex:
    """``-sum_j d^2 fn/dx_j^2 + sum_{j<k} 2 g (g - 1) V(x_j - x_k) fn``."""
    params = _as_params(params)
    x = np.asarray(x, dtype=float)
    if x.size > 1 and _min_separation(x) < 0.1:
        raise DomainError("coordinates closer than 0.1; the potential is too large for the stencil")
    f0, lap = _laplacian(fn, x, scheme)
    return complex(-lap + _potential_sum(x, params, g) * f0)


def _t_of(params: EllipticParams) -> float:
    p = params.p
    if p.imag != 0 or not 0 < p.real < 1:
        raise DomainError("checks along tau = i t need a real nome 0 < p < 1")
    return -math.log(p.real) / (2 * math.pi)


def _spec_inputs(spec: SolutionSpec) -> dict:
    return spec.to_dict()


# ---------------------------------------------------------------------------
# PDE and Euler operator


class _PsiFamily:
    """``psi(x; t)`` for one spec with the grid size fixed once by doubling."""

    def __init__(self, spec, x, params, schedule, grid, scheme):
        self.spec = spec
        self.params = params
        self.schedule = schedule if schedule is not None else default_schedule(spec.L, abs(params.p))
        grid = grid if grid is not None else GridSpec(M=32, mode="doubling", tol=1e-10)
        # choose M on the full x stencil at the central t, then keep it fixed
        stencil = self._x_stencil(x, scheme)
        res = P_integral(spec, np.exp(1j * stencil), params, self.schedule, grid)
        self.M = res.M if spec.L > 1 else 0
        self.converged = res.converged
        self.grid = GridSpec(M=max(self.M, 8))

    @staticmethod
    def _x_stencil(x, scheme):
        s = scheme.offsets()
        pts = [x[None, :] + s[:, None] * np.ones_like(x)[None, :]]
        for j in range(x.size):
            e = np.zeros_like(x)
            e[j] = 1
            pts.append(x[None, :] + s[:, None] * e[None, :])
        return np.concatenate(pts)

    def at(self, t: float):
        params = EllipticParams.from_tau_im(t)

        def fn(X):
            X = np.asarray(X, dtype=float)
            P = P_integral(self.spec, np.exp(1j * X), params, self.schedule, self.grid).value
            return Psi_prefactor(X, params, self.spec.g) * P
        return fn


def _pde_terms(spec, x, params, schedule, grid, scheme):
    fam = _PsiFamily(spec, x, params, schedule, grid, scheme)
    t = _t_of(params)
    fn = fam.at(t)
    if x.size > 1 and _min_separation(x) < 0.1:
        raise DomainError("coordinates closer than 0.1")
    psi, lap = _laplacian(fn, x, scheme)
    Hpsi = -lap + _potential_sum(x, params, spec.g) * psi
    _, dt, _ = scheme.derivatives(lambda s: np.array([fam.at(t + si)(x[None, :])[0] for si in s]))
    _, d1, _ = scheme.derivatives(_line(fn, x, np.ones_like(x)))
    return fam, complex(psi), complex(Hpsi), complex(dt), complex(-1j * d1)


def pde_residual(spec: SolutionSpec, x, params, schedule: Optional[RadiusSchedule] = None,
                 grid: Optional[GridSpec] = None, scheme: FDScheme = FDScheme(),
                 tol: Optional[float] = None, E_shift: float = 0.0) -> VerificationReport:
    """Relative residual of ``(kappa (i/pi) d_tau + H_n - E) psi``.

    ``E_shift`` perturbs the eigenvalue (negative control).
    """
    x = np.asarray(x, dtype=float)
    params = _as_params(params)
    if tol is None:
        tol = 1e-5 if spec.n <= 2 else 1e-4
    with _Timer() as tm:
        fam, psi, Hpsi, dt, _ = _pde_terms(spec, x, params, schedule, grid, scheme)
        E = eigen_E(spec, params) + E_shift
        if abs(psi) < 1e-12 * max(1.0, abs(Hpsi)):
            raise EvaluationError("psi vanishes at this point; move x")
        res = abs(spec.kappa / math.pi * dt + Hpsi - E * psi) / max(abs(psi), abs(E * psi))
    return VerificationReport(
        "pde", {"spec": _spec_inputs(spec), "x": x.tolist(), "p": params.p.real,
                "E_shift": E_shift, "scheme": asdict(scheme)},
        res, tol, grid_M=fam.M, runtime_ms=tm.ms,
        details={"E": E, "psi": psi, "M_converged": fam.converged})


def euler_residual(spec: SolutionSpec, x, params, schedule: Optional[RadiusSchedule] = None,
                   grid: Optional[GridSpec] = None, scheme: FDScheme = FDScheme(),
                   tol: float = 1e-6, d_shift: float = 0.0) -> VerificationReport:
    """Relative residual of ``D_n psi = (sum lambda_j) psi``."""
    x = np.asarray(x, dtype=float)
    params = _as_params(params)
    with _Timer() as tm:
        fam = _PsiFamily(spec, x, params, schedule, grid, scheme)
        fn = fam.at(_t_of(params))
        psi, d1, _ = scheme.derivatives(_line(fn, x, np.ones_like(x)))
        if abs(psi) < 1e-12:
            raise EvaluationError("psi vanishes at this point; move x")
        d = eigen_d(spec) + d_shift
        res = abs(-1j * d1 - d * psi) / abs(psi)
    return VerificationReport(
        "euler", {"spec": _spec_inputs(spec), "x": x.tolist(), "p": params.p.real,
                  "d_shift": d_shift, "scheme": asdict(scheme)},
        res, tol, grid_M=fam.M, runtime_ms=tm.ms, details={"d": d})


# ---------------------------------------------------------------------------
# kernel function


def kernel_check(N: int, M: int, x, y, params, g: float, scheme: FDScheme = FDScheme(h=0.01),
                 tol1: float = 1e-7, tol2: float = 1e-6, c_shift: float = 0.0
                 ) -> List[VerificationReport]:
    """Both kernel-function identities; returns the Euler and the heat-type report."""
    params = _as_params(params)
    x = np.asarray(x, dtype=float).reshape(N)
    y = np.asarray(y, dtype=float).reshape(M)
    allpts = np.concatenate([x, y])
    if allpts.size > 1 and _min_separation(allpts) < 0.3:
        raise DomainError("points must be separated by at least 0.3 modulo 2 pi")
    t = _t_of(params)
    inputs = {"N": N, "M": M, "x": x.tolist(), "y": y.tolist(), "p": params.p.real, "g": g,
              "c_shift": c_shift, "scheme": asdict(scheme)}

    def K_at(tt):
        pr = EllipticParams.from_tau_im(tt)
        return lambda XY: kernel_K(XY[:, :N], XY[:, N:], pr, g)

    with _Timer() as tm:
        fn = K_at(t)
        K0, dsum, _ = scheme.derivatives(_line(fn, allpts, np.ones_like(allpts)))
        r1 = abs(dsum) / abs(K0)
    rep1 = VerificationReport("kernel_euler", inputs, r1, tol1, runtime_ms=tm.ms)

    with _Timer() as tm:
        lapx = 0j
        lapy = 0j
        for j in range(N + M):
            e = np.zeros(N + M)
            e[j] = 1.0
            _, _, d2 = scheme.derivatives(_line(fn, allpts, e))
            if j < N:
                lapx += d2
            else:
                lapy += d2
        Vx = _potential_sum(x, params, g)
        Vy = _potential_sum(y, params, g)
        HK = -lapx + Vx * K0 - (-lapy + Vy * K0)
        _, dt, _ = scheme.derivatives(lambda s: np.array([K_at(t + si)(allpts[None, :])[0] for si in s]))
        c = c_constant_NM(N, M, g, params) + c_shift
        r2 = abs((N - M) * g / math.pi * dt + HK - c * K0) / max(abs(K0), abs(c * K0))
    rep2 = VerificationReport("kernel_heat", inputs, r2, tol2, runtime_ms=tm.ms,
                              details={"c_NM": c})
    return [rep1, rep2]


# ---------------------------------------------------------------------------
# trigonometric limit, radius invariance, orthogonality, generating function


def limit_p0_check(spec: SolutionSpec, z_samples, grid: Optional[GridSpec] = None,
                   tol: float = 1e-9, schedule: Optional[RadiusSchedule] = None,
                   claim_ordered: bool = False) -> VerificationReport:
    """Compare the ``p = 0`` integral with ``C_L(r;s) P_lambda`` (or with zero).

    ``claim_ordered`` (negative control) compares an unordered ``r`` against
    the Jack limit of its sorted rearrangement, which must fail.
    """
    z = np.atleast_2d(np.asarray([np.asarray(getattr(s, "z", s), dtype=complex) for s in z_samples]))
    grid = grid if grid is not None else GridSpec(M=32, mode="doubling", tol=1e-12, M_max=256)
    with _Timer() as tm:
        res = P_integral(spec, z, 0.0, schedule, grid)
        if spec.ordered() or claim_ordered:
            ref_spec = spec if spec.ordered() else SolutionSpec(
                spec.g, spec.k, spec.L, tuple(sorted(spec.r, reverse=True)), spec.s1)
            ref = C_constant(ref_spec) * jack_eval(
                jack_build(ref_spec.lam, spec.n, spec.g), z)
            scale = np.maximum(1.0, np.abs(ref))
            r = float(np.max(np.abs(res.value - ref) / scale))
            kind = "relative"
        else:
            r = float(np.max(np.abs(res.value)))
            kind = "absolute"
    return VerificationReport("limit", {"spec": _spec_inputs(spec), "z": z},
                              r, tol, grid_M=res.M, runtime_ms=tm.ms,
                              details={"kind": kind, "converged": res.converged})


def radius_invariance_check(spec: SolutionSpec, z, params, rho_variants: Sequence[float],
                            grid: Optional[GridSpec] = None, epsilon_geo: Optional[float] = None,
                            tol: float = 1e-10) -> VerificationReport:
    """Largest pairwise relative change of ``P`` when ``rho_{L-1}`` varies."""
    params = _as_params(params)
    z = np.asarray(getattr(z, "z", z), dtype=complex)
    zb = np.atleast_2d(z)
    pa = abs(params.p)
    eps = epsilon_geo if epsilon_geo is not None else max(math.sqrt(pa), 1.0 / 3.0)
    grid = grid if grid is not None else GridSpec(M=32, mode="doubling", tol=1e-13, M_max=512)
    vals, Ms = [], []
    with _Timer() as tm:
        for rho in rho_variants:
            sched = make_schedule(spec.L, pa, rho, eps).with_z(zb)
            res = P_integral(spec, zb, params, sched, grid)
            vals.append(res.value)
            Ms.append(res.M)
        r = 0.0
        for a, b in itertools.combinations(vals, 2):
            r = max(r, float(np.max(np.abs(a - b) / np.maximum(np.abs(a), np.abs(b)))))
    return VerificationReport("radius", {"spec": _spec_inputs(spec), "z": zb, "p": params.p,
                                         "rho_variants": list(rho_variants)},
                              r, tol, grid_M=max(Ms) if Ms else 0, runtime_ms=tm.ms,
                              details={"values": [v.tolist() for v in vals]})


def orthogonality_check(lam, mu, n: int, g: float, M: int = 512, tol: float = 1e-8,
                        rho: float = 1.0) -> VerificationReport:
    """``|<P_lambda, P_mu>' - delta N_lambda| / max(1, N_lambda)``."""
    with _Timer() as tm:
        P = jack_build(lam, n, g)
        Q = jack_build(mu, n, g)
        sp = scalar_product(P, Q, n, g, rho, M)
        same = P.lam.parts == Q.lam.parts
        nrm = norm_N(lam, n, g)
        target = nrm if same else 0.0
        r = abs(sp - target) / max(1.0, nrm)
    return VerificationReport("orth", {"lam": list(P.lam.parts), "mu": list(Q.lam.parts),
                                       "n": n, "g": g, "rho": rho},
                              r, tol, grid_M=M, runtime_ms=tm.ms,
                              details={"product": sp, "norm": nrm})


def genfun_check(n: int, m: int, g: float, z, xi, weight_cutoff: int,
                 tol: float = 1e-4) -> VerificationReport:
    """Truncated generating function ``sum b_lambda P_lambda(z) P_lambda(1/xi)``."""
    z = np.asarray(z, dtype=complex).reshape(n)
    xi = np.asarray(xi, dtype=complex).reshape(m)
    if m > n:
        raise DomainError("need m <= n")
    with _Timer() as tm:
        lhs = 1.0 + 0j
        for zj in z:
            for xk in xi:
                lhs *= (1 - zj / xk) ** (-g)
        rhs = 0j
        for w in range(weight_cutoff + 1):
            for lam in partitions(w, m):
                bl = b_coeff(lam, g)
                Pz = jack_eval(jack_build(tuple(lam) + (0,) * (n - m), n, g), z)
                Px = jack_eval(jack_build(lam, m, g), 1.0 / xi)
                rhs += bl * Pz * Px
        r = abs(lhs - rhs)
    q = float(np.max(np.abs(z[:, None] / xi[None, :]))) if z.size and xi.size else 0.0
    return VerificationReport("genfun", {"n": n, "m": m, "g": g, "z": z, "xi": xi,
                                         "cutoff": weight_cutoff},
                              r, tol, runtime_ms=tm.ms,
                              details={"lhs": lhs, "rhs": rhs, "ratio_max": q,
                                       "tail_scale": q ** (weight_cutoff + 1)})


def recursion_check(spec: SolutionSpec, params, tol: float = 1e-12) -> VerificationReport:
    """Eigenvalues from the transform recursion against the closed forms.

    Both sides are affine in ``eta_1/pi``; the constant and the slope are
    compared in exact rational arithmetic so that rounding in eigenvalues of
    size ~1e3 does not masquerade as a discrepancy.  The floating-point
    difference is kept in ``details``.
    """
    params = _as_params(params)
    with _Timer() as tm:
        d, E = recursion_eigenvalues(spec, params)
        float_res = abs(d - eigen_d(spec)) + abs(E - eigen_E(spec, params))
        dr, Ar, Br = recursion_affine(spec)
        dc, Ac, Bc = closed_affine(spec)
        e = abs(complex(eta1_over_pi(params)))
        r = abs(float(dr - dc)) + abs(float(Ar - Ac)) + abs(float(Br - Bc)) * e
    return VerificationReport("recursion", {"spec": _spec_inputs(spec), "p": params.p},
                              r, tol, runtime_ms=tm.ms,
                              details={"d": d, "E": E, "float_residual": float_res})


# ---------------------------------------------------------------------------
# helpers for suites


def random_torus_points(n: int, count: int, seed: int, min_sep: float = 0.3,
                        max_tries: int = 100000) -> np.ndarray:
    """Seeded angles in ``[0, 2 pi)^n`` with pairwise separation at least ``min_sep``."""
    rng = np.random.default_rng(seed)
    out = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > max_tries:
            raise DomainError("could not place separated points")
        x = rng.uniform(0, 2 * math.pi, n)
        if n < 2 or _min_separation(x) >= min_sep:
            out.append(x)
    return np.array(out).reshape(count, n)


def random_specs(count: int, seed: int, g_range=(0.6, 3.0)) -> List[SolutionSpec]:
    """Seeded specs with ``k`` in 1..3, ``L <= 5`` and ``r`` entries in [-3, 3]."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        k = int(rng.integers(1, 4))
        L = int(rng.integers(1, 6))
        r = tuple(int(v) for v in rng.integers(-3, 4, L))
        s1 = 1 if k == 1 else (1 if i % 2 == 0 else k)
        g = float(rng.uniform(*g_range))
        out.append(SolutionSpec(g, k, L, r, s1))
    return out


def ordered_vectors(L: int, lo: int, hi: int) -> Iterable[tuple]:
    """All ordered integer vectors of length ``L`` with entries in ``[lo, hi]``."""
    for r in itertools.combinations_with_replacement(range(hi, lo - 1, -1), L):
        yield tuple(r)
