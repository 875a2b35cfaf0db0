import json
import math

import numpy as np
import pytest

from ecsjack.elliptic import EllipticParams
from ecsjack.errors import DomainError, ScheduleError
from ecsjack.quadrature import GridSpec
from ecsjack.symfunc import SolutionSpec
from ecsjack.verify import (FDScheme, VerificationReport, apply_D, apply_H, euler_residual,
                            genfun_check, kernel_check, limit_p0_check, orthogonality_check,
                            pde_residual, radius_invariance_check, random_specs,
                            random_torus_points, recursion_check)


def test_report_serialization():
    r = VerificationReport("x", {"z": np.array([1 + 2j])}, 1e-9, 1e-8)
    assert r.passed
    d = json.loads(r.to_json())
    assert d["inputs"]["z"] == [[1.0, 2.0]]
    assert not VerificationReport("x", {}, math.nan, 1.0).passed


def test_fd_scheme_exact_on_polynomials():
    s = FDScheme()
    f0, d1, d2 = s.derivatives(lambda t: (1 + t) ** 3)
    assert f0 == pytest.approx(1.0) and d1 == pytest.approx(3.0) and d2 == pytest.approx(6.0)


def test_apply_D_and_H_on_plane_wave():
    # exp(i (2 x1 + x2)) has D-eigenvalue 3; at g = 1 the potential drops out of H
    fn = lambda X: np.exp(1j * (2 * X[:, 0] + X[:, 1]))
    x = np.array([0.3, 1.9])
    assert abs(apply_D(fn, x) - 3 * fn(x[None, :])[0]) < 1e-9
    assert abs(apply_H(fn, x, 0.1, 1.0) - 5 * fn(x[None, :])[0]) < 1e-8
    with pytest.raises(DomainError):
        apply_H(fn, np.array([0.3, 0.35]), 0.1, 1.5)


def test_pde_and_euler_two_variables():
    spec = SolutionSpec(1.5, 1, 2, (1, 0))
    x = random_torus_points(2, 1, 0)[0]
    P = EllipticParams.from_p(0.05)
    rep = pde_residual(spec, x, P)
    assert rep.passed, rep.residual
    assert euler_residual(spec, x, P).passed
    assert pde_residual(spec, x, P, E_shift=1.0).residual > 1e-1
    assert not euler_residual(spec, x, P, d_shift=1.0).passed


def test_pde_convergence_order():
    spec = SolutionSpec(1.5, 1, 2, (2, 0))
    x = random_torus_points(2, 1, 4)[0]
    P = EllipticParams.from_p(0.1)
    coarse = pde_residual(spec, x, P, grid=GridSpec(M=16), scheme=FDScheme(h=0.08)).residual
    fine = pde_residual(spec, x, P, grid=GridSpec(M=32), scheme=FDScheme(h=0.04)).residual
    assert fine * 10 <= coarse


def test_kernel_check_two_one():
    P = EllipticParams.from_p(0.1)
    reps = kernel_check(2, 1, [0.3, 2.0], [4.2], P, 1.5)
    assert [r.check_name for r in reps] == ["kernel_euler", "kernel_heat"]
    assert all(r.passed for r in reps)
    bad = kernel_check(2, 1, [0.3, 2.0], [4.2], P, 1.5, c_shift=1.0)
    assert not bad[1].passed
    with pytest.raises(DomainError):
        kernel_check(2, 0, [0.3, 0.4], [], P, 1.5)


def test_limit_check_ordered_and_unordered():
    z = np.exp(1j * random_torus_points(2, 3, 1))
    assert limit_p0_check(SolutionSpec(1.5, 1, 2, (2, -1)), z).passed
    rep = limit_p0_check(SolutionSpec(1.5, 1, 2, (0, 1)), z)
    assert rep.passed and rep.details["kind"] == "absolute"
    assert not limit_p0_check(SolutionSpec(1.5, 1, 2, (0, 1)), z, claim_ordered=True).passed


def test_radius_invariance():
    spec = SolutionSpec(1.5, 1, 2, (1, 0))
    z = np.exp(1j * np.array([0.3, 2.0]))
    base = 1.05 * math.sqrt(10)
    assert radius_invariance_check(spec, z, 0.1, [base]).residual == 0
    assert radius_invariance_check(spec, z, 0.1, [0.8 * base, base, 1.2 * base]).passed
    with pytest.raises(ScheduleError):
        radius_invariance_check(spec, z, 0.1, [12.0])


def test_orthogonality_examples():
    assert orthogonality_check((1, 0), (1, 0), 2, 1.5).passed
    assert orthogonality_check((2, 0), (1, 1), 2, 1.5).passed
    a = orthogonality_check((4, 3), (4, 3), 2, 1.5)
    assert a.passed and a.details["norm"] == pytest.approx(
        orthogonality_check((1, 0), (1, 0), 2, 1.5).details["norm"])


def test_genfun_trivial_and_binomial():
    assert genfun_check(2, 2, 1.5, [0, 0], [1, 1j], 0).residual < 1e-15
    assert genfun_check(1, 1, 1.5, [0.2], [1.0], 12, tol=1e-6).passed


def test_genfun_tail_shrinks_with_cutoff():
    z, xi = [0.2, 0.2], [1.0, 1.0]
    res = [genfun_check(2, 2, 1.5, z, xi, c).residual for c in (6, 8, 10, 12)]
    assert all(b < a / 5 for a, b in zip(res, res[1:]))
    assert res[-1] < 1e-4


def test_recursion_examples():
    assert recursion_check(SolutionSpec(1.5, 1, 1, (2,)), 0.1).residual == 0
    assert recursion_check(SolutionSpec(1.7, 1, 4, (1, -3, 2, 0)), 0.05).passed
    assert recursion_check(SolutionSpec(1.2, 2, 3, (0, 2, -1), 2), 0.05).passed


def test_seeded_helpers_reproducible():
    a = random_torus_points(3, 4, 11)
    b = random_torus_points(3, 4, 11)
    assert np.array_equal(a, b)
    d = np.abs(np.angle(np.exp(1j * (a[:, :, None] - a[:, None, :]))))
    iu = np.triu_indices(3, 1)
    assert np.all(d[:, iu[0], iu[1]] >= 0.3)
    assert random_specs(5, 2) == random_specs(5, 2)


def test_reports_reproducible_bit_for_bit():
    spec = SolutionSpec(1.5, 1, 2, (1, 0))
    z = np.exp(1j * np.array([0.3, 2.0]))
    a = radius_invariance_check(spec, z, 0.1, [3.0, 3.3])
    b = radius_invariance_check(spec, z, 0.1, [3.0, 3.3])
    assert a.residual == b.residual
