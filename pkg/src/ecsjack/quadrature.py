"""Nested quadrature over concentric circles.

Each integration level is a set of variables that share one circle.  Levels
are combined as a tensor product.  Variables on a common circle usually carry
the factor ``prod_{j<k} |1 - xi_j/xi_k|**(2 g)``, which is continuous but not
smooth where two nodes meet.  For those levels the rule folds this factor into
exact product-integration weights, so the integrand passed by the caller only
has to supply the smooth remainder and the trapezoid rule keeps its spectral
accuracy.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import gammaln, rgamma

from .errors import DimensionError, EvaluationError, ScheduleError

DEFAULT_BUDGET = 4
_CHUNK = 1 << 16


@dataclass(frozen=True)
class RadiusSchedule:
    """Contour radii ``rho_1 > ... > rho_{L-1}`` for the nested integrals.

    ``mode`` is ``"elliptic"`` (annulus constraints depend on ``|p|``) or
    ``"trig"`` (only descending radii are required).
    """

    radii: tuple
    p_abs: float = 0.0
    z_band: Optional[tuple] = None
    mode: str = "elliptic"

    def __post_init__(self):
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        if self.mode not in ("elliptic", "trig"):
            raise ScheduleError(f"unknown schedule mode {self.mode!r}")
        self.validate()

    @property
    def rho_last(self) -> float:
        return self.radii[-1] if self.radii else math.inf

    def validate(self, z_abs: Optional[Sequence[float]] = None) -> None:
        """Raise :class:`ScheduleError` naming the first violated inequality."""
        p = self.p_abs
        for a, rho in enumerate(self.radii, start=1):
            if not rho > 0:
                raise ScheduleError(f"rho_{a} = {rho} must be positive")
        for a in range(len(self.radii) - 1):
            hi, lo = self.radii[a], self.radii[a + 1]
            if not lo < hi:
                raise ScheduleError(f"rho_{a + 2} < rho_{a + 1} violated ({lo} >= {hi})")
            if self.mode == "elliptic" and not p * hi < lo:
                raise ScheduleError(f"|p| rho_{a + 1} < rho_{a + 2} violated")
        if self.mode == "elliptic" and self.radii and p > 0:
            last = self.radii[-1]
            if not 1.0 < last < 1.0 / p:
                raise ScheduleError(f"1 < rho_last < 1/|p| violated (rho_last = {last}, |p| = {p})")
        band = z_abs if z_abs is not None else self.z_band
        if band is not None and self.radii:
            band = np.asarray(band, dtype=float)
            last = self.radii[-1]
            if np.any(band <= 0):
                raise ScheduleError("0 < |z_j| violated")
            if np.any(band >= last):
                raise ScheduleError(f"|z_j| < rho_last violated (rho_last = {last})")
            if self.mode == "elliptic" and np.any(band <= p * last):
                raise ScheduleError("|p| rho_last < |z_j| violated")

    def with_z(self, z) -> "RadiusSchedule":
        za = np.abs(np.asarray(z, dtype=complex)).ravel()
        band = (float(za.min()), float(za.max())) if za.size else None
        return RadiusSchedule(self.radii, self.p_abs, band, self.mode)


def make_schedule(L: int, p_abs: float, rho_last: float, epsilon_geo: float,
                  mode: Optional[str] = None, z_band=None) -> RadiusSchedule:
    """Geometric schedule ``rho_a = rho_last * epsilon_geo**(a - (L - 1))``."""
    if L < 1:
        raise ScheduleError("L must be at least 1")
    mode = mode or ("trig" if p_abs == 0 else "elliptic")
    if L >= 3:
        if not 0 < epsilon_geo < 1:
            raise ScheduleError("0 < epsilon_geo < 1 violated")
        if mode == "elliptic" and not p_abs < epsilon_geo:
            raise ScheduleError(f"|p| < epsilon_geo violated ({p_abs} >= {epsilon_geo})")
    if L >= 2 and not rho_last > 0:
        raise ScheduleError("rho_last must be positive")
    radii = tuple(rho_last * epsilon_geo ** (a - (L - 1)) for a in range(1, L))
    return RadiusSchedule(radii, float(p_abs), z_band, mode)


def default_schedule(L: int, p_abs: float, z=None) -> RadiusSchedule:
    """Schedule used when none is given.

    Elliptic: ``rho_last = |p|**-0.5``, the geometric middle of ``(1, 1/|p|)``,
    capped at 8 so tiny nomes do not put the circles where the trapezoid
    sums cancel large terms; ``epsilon = max(sqrt|p|, 1/3)``.  Trigonometric:
    ``rho_last = 3 max|z|`` and ``epsilon = 1/3``.
    """
    if p_abs > 0:
        rho = min(p_abs ** -0.5, 8.0)
        eps = max(math.sqrt(p_abs), 1.0 / 3.0)
        sched = make_schedule(L, p_abs, rho, eps, mode="elliptic")
    else:
        zmax = 1.0 if z is None else float(np.max(np.abs(np.asarray(z, dtype=complex))))
        sched = make_schedule(L, 0.0, 3.0 * zmax, 1.0 / 3.0, mode="trig")
    return sched if z is None else sched.with_z(z)


@dataclass(frozen=True)
class GridSpec:
    """Points per circle and the refinement policy."""

    M: int = 64
    offset: float = 0.0
    mode: str = "fixed"
    tol: float = 1e-10
    atol: float = 0.0
    M_max: int = 512

    def __post_init__(self):
        if self.M < 8 or self.M & (self.M - 1):
            raise ValueError("M must be a power of two and at least 8")
        if not 0 <= self.offset < 2 * math.pi / self.M:
            raise ValueError("offset must lie in [0, 2 pi / M)")
        if self.mode not in ("fixed", "doubling"):
            raise ValueError(f"unknown grid mode {self.mode!r}")

    def with_M(self, M: int) -> "GridSpec":
        off = self.offset * self.M / M
        return GridSpec(M, off, self.mode, self.tol, self.atol, max(self.M_max, M))

    def sequence(self):
        """Grid sizes visited: one in fixed mode, doublings up to ``M_max`` otherwise."""
        if self.mode == "fixed":
            return [self.M]
        out, M = [], self.M
        while M <= max(self.M_max, self.M):
            out.append(M)
            M *= 2
        return out


@dataclass
class QuadResult:
    value: complex
    M: int
    error: float = 0.0
    converged: bool = True
    history: list = field(default_factory=list)


def circle_nodes(rho: float, M: int, offset: float = 0.0):
    """Nodes ``rho exp(i(2 pi m/M + offset))`` and the uniform weight ``1/M``."""
    m = np.arange(M)
    return rho * np.exp(1j * (2 * math.pi * m / M + offset)), 1.0 / M


# ---------------------------------------------------------------------------
# product-integration weights for |1 - e^{i psi}|^{2g}


def pair_fourier(g: float, mmax: int) -> np.ndarray:
    """Fourier coefficients ``c_m``, ``m = 0..mmax``, of ``|1 - e^{i psi}|**(2g)``.

    ``c_m = (-1)^m Gamma(2g+1) / (Gamma(g+1+m) Gamma(g+1-m))``; for large
    ``m`` the reflection formula gives a sign-stable form.
    """
    m = np.arange(mmax + 1, dtype=float)
    g = float(g)
    out = np.empty(mmax + 1)
    big = m > g + 1
    small = ~big
    out[small] = ((-1.0) ** m[small]) * math.gamma(2 * g + 1) * rgamma(g + 1 + m[small]) * rgamma(g + 1 - m[small])
    mb = m[big]
    out[big] = -math.gamma(2 * g + 1) * math.sin(math.pi * g) / math.pi * np.exp(
        gammaln(mb - g) - gammaln(mb + g + 1))
    return out


def _c_signed(c: np.ndarray, idx: np.ndarray) -> np.ndarray:
    return c[np.abs(idx)]


def _nyquist_weights(M: int) -> np.ndarray:
    w = np.ones(M + 1)
    w[0] = w[-1] = 0.5
    return w


@lru_cache(maxsize=32)
def _omega2(M: int, g: float) -> np.ndarray:
    m = np.arange(-M // 2, M // 2 + 1)
    c = pair_fourier(g, M // 2)
    coef = _c_signed(c, m) * _nyquist_weights(M)
    d = np.arange(M)
    om = np.real(np.exp(2j * math.pi * np.outer(d, m) / M) @ coef)
    om.setflags(write=False)
    return om


@lru_cache(maxsize=16)
def _omega3(M: int, g: float) -> np.ndarray:
    G = max(4 * M, 2048)
    c = pair_fourier(g, G + M)
    m = np.arange(-M // 2, M // 2 + 1)
    gam = np.arange(-G, G + 1)
    A = _c_signed(c, m[:, None] + gam[None, :]) * _c_signed(c, gam)[None, :]
    B = _c_signed(c, m[:, None] - gam[None, :])
    vhat = A @ B.T                                   # vhat[m2, m3]
    w = _nyquist_weights(M)
    vhat = vhat * w[:, None] * w[None, :]
    # Omega(d2, d3) = sum vhat(m2, m3) e^{2 pi i (m2 d2 + m3 d3)/M}
    E = np.exp(2j * math.pi * np.outer(np.arange(M), m) / M)
    om = np.real(E @ vhat @ E.T)
    om.setflags(write=False)
    return om


@dataclass(frozen=True)
class LevelRule:
    """Compressed rule for ``N`` symmetric variables on one circle.

    ``index`` holds sorted node-index tuples, ``weight`` the total weight of
    all permutations of each tuple (normalized so that the rule integrates
    ``dxi/(2 pi i xi)`` per variable).
    """

    index: np.ndarray
    weight: np.ndarray
    M: int
    N: int
    offsets: tuple


def _sorted_tuples(M: int, N: int) -> np.ndarray:
    if N == 0:
        return np.zeros((1, 0), dtype=np.int64)
    if N == 1:
        return np.arange(M, dtype=np.int64)[:, None]
    if N == 2:
        i, j = np.triu_indices(M)
        return np.stack([i, j], axis=1).astype(np.int64)
    if N == 3:
        rows = []
        for a in range(M):
            i, j = np.triu_indices(M - a)
            rows.append(np.stack([np.full(i.size, a), i + a, j + a], axis=1))
        return np.concatenate(rows).astype(np.int64)
    raise DimensionError("sorted tuples only for N <= 3")


def _multiplicity(T: np.ndarray) -> np.ndarray:
    N = T.shape[1]
    if N <= 1:
        return np.ones(T.shape[0])
    eq = T[:, 1:] == T[:, :-1]
    mult = np.full(T.shape[0], float(math.factorial(N)))
    if N == 2:
        mult[eq[:, 0]] = 1.0
    else:
        both = eq[:, 0] & eq[:, 1]
        one = eq[:, 0] ^ eq[:, 1]
        mult[both] = 1.0
        mult[one] = 3.0
    return mult


@lru_cache(maxsize=64)
def _level_rule_cached(N: int, M: int, g: float) -> LevelRule:
    if N <= 1 or g == 0.0:
        if N > 3:
            raise DimensionError("use the staggered fallback for N > 3")
        T = _sorted_tuples(M, N)
        w = _multiplicity(T) / float(M) ** N
        return LevelRule(T, w, M, N, (0.0,) * N)
    T = _sorted_tuples(M, N)
    if N == 2:
        om = _omega2(M, g)
        w = om[(T[:, 1] - T[:, 0]) % M] * np.where(T[:, 0] == T[:, 1], 1.0, 2.0) / M ** 2
    elif N == 3:
        om = _omega3(M, g)
        perms = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
        tot = np.zeros(T.shape[0])
        for s in perms:
            tot += om[(T[:, s[1]] - T[:, s[0]]) % M, (T[:, s[2]] - T[:, s[0]]) % M]
        w = tot * _multiplicity(T) / 6.0 / M ** 3
    else:
        raise DimensionError("product-integration weights implemented for N <= 3")
    return LevelRule(T, w, M, N, (0.0,) * N)


def _staggered_rule(N: int, M: int, g: float) -> LevelRule:
    # fallback for N >= 4: full tensor grid, variable j shifted by j/N of a
    # step so no two nodes coincide, weight evaluated pointwise
    grids = np.meshgrid(*([np.arange(M)] * N), indexing="ij")
    T = np.stack([x.ravel() for x in grids], axis=1).astype(np.int64)
    offs = tuple(2 * math.pi * j / (N * M) for j in range(N))
    ang = 2 * math.pi * T / M + np.asarray(offs)
    w = np.ones(T.shape[0])
    for j in range(N):
        for k in range(j + 1, N):
            w *= np.abs(1.0 - np.exp(1j * (ang[:, j] - ang[:, k]))) ** (2 * g)
    return LevelRule(T, w / float(M) ** N, M, N, offs)


def level_rule(N: int, M: int, g: float = 0.0) -> LevelRule:
    """Quadrature rule for one level of ``N`` variables with pair power ``g``.

    With ``g = 0`` this is the plain trapezoid rule, compressed over
    permutations.  With ``g > 0`` the weights integrate
    ``prod_{j<k} |1 - xi_j/xi_k|**(2g)`` exactly against trigonometric
    polynomials of degree below ``M/N``.
    """
    if M < 8:
        raise ValueError("M must be at least 8")
    if N > 3:
        return _staggered_rule(N, M, float(g))
    return _level_rule_cached(int(N), int(M), float(g))


def level_nodes(rule: LevelRule, rho: float, offset: float = 0.0) -> np.ndarray:
    """Complex nodes, shape ``(K, N)``, of a level rule on the circle ``rho``."""
    ang = 2 * math.pi * rule.index / rule.M + np.asarray(rule.offsets) + offset
    return rho * np.exp(1j * ang)


# ---------------------------------------------------------------------------


def pairwise_sum(values: Sequence[complex]) -> complex:
    """Fixed-shape pairwise reduction of a list of partial sums."""
    vals = list(values)
    if not vals:
        return 0j
    while len(vals) > 1:
        nxt = [vals[i] + vals[i + 1] for i in range(0, len(vals) - 1, 2)]
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return complex(vals[0])


def _tensor_chunks(sizes, chunk):
    total = int(np.prod(sizes)) if sizes else 1
    for start in range(0, total, chunk):
        flat = np.arange(start, min(start + chunk, total))
        yield np.unravel_index(flat, sizes) if sizes else ()


def _integrate_once(integrand, schedule, dims, M, offset, pair_power, threads, chunk):
    rules, nodes = [], []
    for a, N in enumerate(dims):
        rule = level_rule(N, M, pair_power or 0.0)
        rules.append(rule)
        nodes.append(level_nodes(rule, schedule.radii[a], offset))
    sizes = tuple(r.weight.size for r in rules)

    def work(idx):
        parts = [nodes[a][idx[a]] for a in range(len(dims))]
        X = np.concatenate(parts, axis=1) if parts else np.zeros((1, 0), complex)
        w = np.ones(X.shape[0])
        for a in range(len(dims)):
            w = w * rules[a].weight[idx[a]]
        vals = np.asarray(integrand(X), dtype=complex)
        if not np.all(np.isfinite(vals)):
            bad = int(np.flatnonzero(~np.isfinite(vals))[0])
            raise EvaluationError(f"non-finite integrand value at nodes {X[bad].tolist()}")
        return complex(np.sum(vals * w))

    chunks = list(_tensor_chunks(sizes, chunk))
    if threads and threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            partial = list(ex.map(work, chunks))
    else:
        partial = [work(c) for c in chunks]
    return pairwise_sum(partial)


def nested_integrate(integrand: Callable[[np.ndarray], np.ndarray], schedule: RadiusSchedule,
                     dims: Sequence[int], grid: GridSpec, pair_power: Optional[float] = None,
                     budget: int = DEFAULT_BUDGET, threads: int = 1,
                     chunk: int = _CHUNK) -> QuadResult:
    """Tensor-product circle quadrature of ``integrand`` over all levels.

    ``integrand`` maps an array of node tuples of shape ``(K, D)`` to ``K``
    values, where ``D = sum(dims)`` and the columns are ordered level by
    level.  Level ``a`` lives on the circle ``schedule.radii[a]``.  When
    ``pair_power`` is given, the factor ``prod |1 - xi_j/xi_k|**(2 g)`` within
    each level is supplied by the weights and must be left out of the
    integrand.

    Chunk partial sums are reduced pairwise in a fixed order, so the threaded
    path returns the same bits as the sequential one.
    """
    dims = [int(d) for d in dims]
    D = sum(dims)
    if D > budget:
        raise DimensionError(f"total dimension {D} exceeds the budget {budget}")
    if len(dims) > len(schedule.radii):
        raise ScheduleError("schedule has fewer radii than integration levels")
    prev, hist = None, []
    for M in grid.sequence():
        off = grid.offset * grid.M / M
        val = _integrate_once(integrand, schedule, dims, M, off, pair_power, threads, chunk)
        hist.append((M, val))
        if prev is not None:
            err = abs(val - prev)
            if err <= max(grid.tol * abs(val), grid.atol):
                return QuadResult(val, M, err, True, hist)
        prev = val
    if grid.mode == "fixed":
        return QuadResult(prev, grid.M, 0.0, True, hist)
    err = abs(hist[-1][1] - hist[-2][1]) if len(hist) > 1 else math.inf
    return QuadResult(prev, hist[-1][0], err, False, hist)
