import math

import numpy as np
import pytest

from quasistable.errors import DomainError, SingularityError
from quasistable.model import (
    FormFactor,
    Location,
    MassQuadrature,
    ModelParams,
    SheetPoint,
    alpha,
    coefficients,
    default_quadrature,
    disc_pi,
    green,
    green_rim,
    measure_density,
    mu_of_kappa,
    norm_C,
    pi_eval,
    rho,
    rho_h22_form,
)
from quasistable.specfun import cylinder_table

P = ModelParams()
Q = default_quadrature(P)
CUT = np.linspace(0.4, 20.0, 10)


def test_alpha_examples():
    ff = FormFactor()
    assert alpha(ff, 0.5, 0.25) == 0.0
    assert alpha(ff, 3.0, 0.25) == pytest.approx((9 - 0.25) / 9 * math.exp(-1.0), rel=1e-15)
    mu = np.linspace(5.0, 20.0, 7)
    assert np.all(np.abs(alpha(ff, mu, 0.25)) < np.exp(-mu**2 / 9.0))


def test_form_factor_validation():
    with pytest.raises(DomainError):
        FormFactor(power=0)
    with pytest.raises(DomainError):
        FormFactor(cutoff=-1.0)
    with pytest.raises(DomainError):
        ModelParams(tau=0.0)


def test_measure_density():
    m = 0.25
    mu = 2 * math.sqrt(2) * m
    assert measure_density(P, mu) == pytest.approx(mu / (2 * m * 2 * m), rel=1e-15)
    assert measure_density(P, 0.5 + 1e-10) > 1e3
    with pytest.raises(DomainError):
        measure_density(P, 0.5)


def test_quadrature_gaussian():
    # int_0^K exp(-kappa^2) dkappa = sqrt(pi)/2 erf(K)
    got = Q.integrate(lambda k: np.exp(-k * k))
    assert got == pytest.approx(math.sqrt(math.pi) / 2 * math.erf(Q.kappa_max), rel=1e-10)


def test_kappa_change_of_variables():
    # int dmu mu/(2m sqrt(mu^2-4m^2)) f(mu) over (2m, mu(K)) equals int dkappa f(mu(kappa))
    from scipy import integrate
    f = lambda mu: np.exp(-mu * mu / 4.0)
    ref, _ = integrate.quad(lambda mu: measure_density(P, mu) * f(mu), 0.5, float(mu_of_kappa(P, Q.kappa_max)),
                            epsabs=1e-13, limit=200)
    assert Q.integrate(lambda k: f(mu_of_kappa(P, k))).real == pytest.approx(ref, rel=1e-10)


def test_graded_quadrature_layout():
    g = MassQuadrature.graded(Q.kappa_max, 1.7, 0.01, panels=12, order=8)
    e = g.edges
    assert e[0] == 0 and e[-1] == Q.kappa_max and np.all(np.diff(e) > 0)
    assert np.min(np.diff(e)) <= 0.01
    assert g.integrate(lambda k: np.exp(-k * k)) == pytest.approx(math.sqrt(math.pi) / 2 * math.erf(Q.kappa_max),
                                                                  rel=1e-12)
    fine = g.refined(2)
    assert fine.panels == 2 * g.panels and set(g.edges) <= set(fine.edges)
    with pytest.raises(DomainError):
        MassQuadrature(1.0, breaks=(0.5, 0.2))


def test_beta_zero_gives_free_quantities():
    p0 = P.with_beta(0.0)
    assert pi_eval(p0, SheetPoint.off_axis(1 + 0.3j), Q) == 0
    assert green(p0, SheetPoint.upper(2.0), Q) == pytest.approx(1 / (2.0 - 1.0))
    cs = coefficients(p0, 2.0, 1, Q)
    assert cs.t == 0 and cs.r == 0 and cs.T_singular == cs.C
    assert np.all(cs.R(np.array([0.7, 1.5])) == 0)


def test_beta_squared_homogeneity():
    for pt in (SheetPoint.off_axis(1.1 + 0.2j), SheetPoint.upper(2.0), SheetPoint.second(1.0 - 0.1j)):
        a = pi_eval(P, pt, Q)
        b = pi_eval(P.with_beta(0.3), pt, Q)
        assert b == pytest.approx(9.0 * a, rel=1e-13)


def test_quadrature_doubling_offaxis():
    fine = Q.refined(2)
    pts = [complex(x, y) for x, y in zip(np.linspace(0.3, 8.0, 10), np.linspace(-1.0, 1.0, 10)) if y != 0]
    for s in pts:
        pt = SheetPoint.off_axis(s if s.imag else s + 0.05j)
        a, b = pi_eval(P, pt, Q), pi_eval(P, pt, fine)
        assert abs(a - b) <= 1e-9 * abs(b)


def _richardson(s: float, sign: int, e0: float, levels: int = 3) -> complex:
    # Pi(s + i eps) = Pi_+ + a eps + b eps^2 + ...; eliminate levels-1 powers
    v = [pi_eval(P, SheetPoint.off_axis(complex(s, sign * e0 / 2**j)), Q) for j in range(levels)]
    for k in range(1, levels):
        v = [(2**k * v[j + 1] - v[j]) / (2**k - 1) for j in range(len(v) - 1)]
    return v[0]


@pytest.mark.parametrize("s", [1.25, 2.7, 7.0, 20.0])
def test_boundary_values_by_richardson(s):
    for sign, loc in ((1, SheetPoint.upper), (-1, SheetPoint.lower)):
        extrap = _richardson(s, sign, 1e-2)
        assert abs(extrap - pi_eval(P, loc(s), Q)) <= 1e-7 * abs(extrap)


def test_richardson_near_threshold_is_truncation_limited():
    # the remainder is eps^3 over the distance to the branch point cubed
    s = 0.5
    exact = pi_eval(P, SheetPoint.upper(s), Q)
    e1 = abs(_richardson(s, 1, 1e-2) - exact)
    e2 = abs(_richardson(s, 1, 5e-3) - exact)
    assert e1 / e2 == pytest.approx(8.0, rel=0.1)
    assert abs(_richardson(s, 1, 1e-2, levels=4) - exact) <= 1e-7 * abs(exact)


def test_sheet_matching_linear_in_eps():
    errs = []
    for eps in (1e-3, 5e-4, 2.5e-4):
        worst = 0.0
        for s in CUT:
            a = pi_eval(P, SheetPoint.second(complex(s, -eps)), Q)
            b = pi_eval(P, SheetPoint.off_axis(complex(s, eps)), Q)
            worst = max(worst, abs(a - b))
        errs.append(worst)
    assert errs[0] / errs[1] == pytest.approx(2.0, rel=0.05)
    assert errs[1] / errs[2] == pytest.approx(2.0, rel=0.05)
    for s in CUT:
        g2 = green(P, SheetPoint.second(complex(s, -1e-9)), Q)
        gp = green(P, SheetPoint.upper(s), Q)
        assert abs(g2 - gp) <= 1e-7 * abs(gp)


def test_disc_matches_boundary_difference():
    for s in CUT:
        diff = pi_eval(P, SheetPoint.upper(s), Q) - pi_eval(P, SheetPoint.lower(s), Q)
        assert abs(disc_pi(P, s) - diff) <= 1e-6 * abs(diff)


def test_disc_beta_scaling_and_threshold():
    assert disc_pi(P.with_beta(0.2), 2.0) == pytest.approx(4 * disc_pi(P, 2.0), rel=1e-14)
    vals = [abs(disc_pi(P, P.threshold * (1 + d))) for d in (1e-2, 1e-4, 1e-6)]
    assert vals[0] > vals[1] > vals[2] and vals[2] < 1e-8
    assert disc_pi(P, P.threshold) == 0


def test_second_sheet_is_pi_plus_disc():
    for s in (1.0 - 0.05j, 2.0 - 0.4j, 0.6 - 0.01j):
        direct = pi_eval(P, SheetPoint.second(s), Q)
        first = pi_eval(P, SheetPoint.off_axis(s), Q)
        assert abs(direct - (first + disc_pi(P, s))) <= 1e-10 * abs(direct)


def test_green_discontinuity_identity():
    for s in CUT:
        gp = green(P, SheetPoint.upper(s), Q)
        gm = green(P, SheetPoint.lower(s), Q)
        assert abs((gp - gm) - disc_pi(P, s) * gp * gm) <= 1e-6 * abs(gp - gm)


def test_green_rim_matches_scalar_path():
    s = np.array([0.3, 0.9, 1.0, 4.0])
    for sigma, loc in ((1, SheetPoint.upper), (-1, SheetPoint.lower)):
        v = green_rim(P, s, sigma, Q)
        w = np.array([green(P, loc(x), Q) for x in s])
        assert np.allclose(v, w, rtol=1e-13, atol=0)
    with pytest.raises(DomainError):
        green_rim(P, np.array([0.1]), 1, Q)


def test_location_guards():
    with pytest.raises(DomainError):
        SheetPoint(1.0, Location.OFF_AXIS)
    with pytest.raises(DomainError):
        SheetPoint(1.0 + 0.1j, Location.UPPER_BOUNDARY)
    with pytest.raises(DomainError):
        SheetPoint(1.0 + 0.1j, Location.SECOND_SHEET)
    with pytest.raises(DomainError):
        pi_eval(P, SheetPoint.upper(0.1), Q)


def test_green_singularity_error():
    p0 = P.with_beta(0.0)
    with pytest.raises(SingularityError):
        green(p0, SheetPoint.upper(1.0), Q)


def test_rho_two_forms():
    for s in (0.5, 1.0, 3.0):
        assert rho_h22_form(P, s) == pytest.approx(rho(P, s), rel=1e-10)
    # the H2_2 form carries no tau
    p3 = ModelParams(tau=3.0)
    assert rho_h22_form(p3, 2.0) * 3.0 == pytest.approx(rho(p3, 2.0), rel=1e-10)
    assert rho(P.with_beta(0.0), 2.0) == 0
    assert math.isfinite(abs(rho(P, P.threshold * (1 + 1e-8))))
    with pytest.raises(DomainError):
        rho(P, P.threshold)


def test_norm_c_gives_unit_commutator():
    for s in (0.3, 1.0, 5.0):
        c = norm_C(P, s)
        coeff = math.sqrt(s) / (P.m * math.sqrt(s - P.threshold)) * c * c
        assert coeff == pytest.approx(1.0, abs=1e-12)
        assert c > 0
    assert norm_C(P, P.threshold * (1 + 1e-12)) < 1e-3
    with pytest.raises(DomainError):
        norm_C(P, P.threshold)


def test_coefficient_ratio_identities():
    hm = cylinder_table(np.array([P.M * P.tau]))
    h1m, h2m = complex(hm.h1[1, 0]), complex(hm.h2[1, 0])
    for s in (0.4, 1.3, 6.0):
        rs = math.sqrt(s)
        for branch in (1, -1):
            cs = coefficients(P, s, branch, Q)
            lhs = -(rs + P.M) / h2m * cs.r
            rhs = (rs - P.M) / h1m * cs.t
            assert abs(lhs - rhs) <= 1e-10 * abs(lhs)
            mu = np.array([0.6, 2.5, 4.0])
            tab = cylinder_table(mu * P.tau)
            a = cs.T_regular(mu) * (rs - mu) / tab.h1[1]
            b = -cs.R(mu) * (rs + mu) / tab.h2[1]
            assert np.allclose(a, b, rtol=1e-10, atol=0)


def test_coefficient_spectrum_gate_and_adjoint():
    with pytest.raises(DomainError):
        coefficients(P, 0.2, 1, Q)
    with pytest.raises(DomainError):
        coefficients(P, 1.0, 0, Q)
    cs = coefficients(P, 1.5, 1, Q)
    adj = cs.conjugate()
    assert adj.t == cs.t.conjugate() and adj.branch == -1
    mu = np.array([0.7, 1.9])
    assert np.allclose(adj.R(mu), np.conj(cs.R(mu)))
    # the branch picks the rim of G and the sign of the i pi term
    g_minus = green(P, SheetPoint.lower(1.5), Q)
    assert coefficients(P, 1.5, -1, Q).t / g_minus == pytest.approx(cs.t / green(P, SheetPoint.upper(1.5), Q))
