import numpy as np
import pytest
from scipy import integrate

from quasistable.model import MassQuadrature, ModelParams, mu_of_kappa
from quasistable.vacuum import (
    interpolation_matrix,
    pv_matrix,
    scan_A,
    solve_f2,
    solve_vacuum,
    tail_ratio,
    vacuum_quadrature,
    vacuum_residuals,
)

P = ModelParams()


def test_pv_matrix_against_cauchy_quadrature():
    quad = MassQuadrature(8.0, panels=8, order=16)
    kap = quad.nodes
    mu = mu_of_kappa(P, kap)
    a = np.exp(-kap**2 / 8.0)
    f = 1.0 / (1.0 + kap**2)
    got = pv_matrix(P, quad, a) @ f
    m2 = P.threshold
    for i in (3, 40, 77, 120):
        ki, mi = kap[i], mu[i]
        # 1/(mu_i - mu) = -(mu_i + mu) / (4m^2 (kappa + kappa_i)(kappa - kappa_i))
        g = lambda k: -np.exp(-k * k / 8.0) / (1.0 + k * k) * (mi + mu_of_kappa(P, k)) / (m2 * (k + ki))
        ref, _ = integrate.quad(g, 0.0, 8.0, weight="cauchy", wvar=ki, epsabs=1e-14, limit=200)
        assert abs(got[i] - ref) <= 1e-9 * max(1.0, abs(ref))


def test_interpolation_matrix_is_exact_on_polynomials():
    quad = MassQuadrature(4.0, panels=4, order=8)
    pts = np.linspace(0.0, 4.0, 37)
    f = lambda k: 1 - 2 * k + 0.5 * k**3 - 0.01 * k**7
    assert np.allclose(interpolation_matrix(quad, pts) @ f(quad.nodes), f(pts), rtol=1e-12, atol=1e-12)
    assert np.allclose(interpolation_matrix(quad, quad.nodes), np.eye(quad.nodes.size))


def test_graded_rule_clusters_at_the_peak():
    q = vacuum_quadrature(P)
    k_m = np.sqrt(P.M**2 / P.threshold - 1.0)
    near = np.min(np.abs(q.edges - k_m))
    assert near < 1e-12 and np.min(np.diff(q.edges)) < 0.05
    assert vacuum_quadrature(P.with_beta(0.0)).breaks is None


def test_beta_zero_kernels_vanish():
    k = solve_vacuum(P.with_beta(0.0))
    assert not np.any(k.f2) and not np.any(k.f3)
    assert k.residual_f2 == 0 and k.residual_f3 == 0
    assert vacuum_residuals(P.with_beta(0.0), None, k) == {"minus": (0.0, 0.0), "plus": (0.0, 0.0)}


def test_f2_residual_falls_with_order():
    res = [solve_f2(P, vacuum_quadrature(P, order=n), tol=None).residual for n in (6, 8, 10)]
    assert res[0] > res[1] > res[2]
    assert res[2] < 1e-6


def test_small_solve_and_diagnostics():
    quad = vacuum_quadrature(P, order=10)
    k = solve_vacuum(P, quad, tol=1e-5)
    assert k.f3.shape == (k.mu.size, k.mu.size)
    assert np.allclose(k.f3_symmetric, k.f3_symmetric.T)
    assert 0 <= tail_ratio(P, k) < 1e-2
    r = vacuum_residuals(P, quad, k, stride=24)
    assert set(r) == {"minus", "plus"} and all(np.isfinite(v).all() for v in r.values())


def test_scan_A_residual_grows_linearly_in_A():
    quad = vacuum_quadrature(P, order=8)
    out = scan_A(P, quad, [0.0, 1.0, -2.5])
    assert [a for a, _ in out] == [0.0, 1.0, -2.5]
    r0, r1, r2 = (r for _, r in out)
    assert r0 < 1e-6 and r0 < r1 < r2
    assert r2 / r1 == pytest.approx(2.5, rel=0.05)
