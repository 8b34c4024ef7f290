"""Identity suite: each check returns its worst residual and the tolerance it must meet."""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .hyperint import _integrated_D, cancellation_residual, oracle_cosh_integral, oracle_integrated_D
from .kinematics import FourVector, VelocityVector
from .model import (
    MassQuadrature,
    ModelParams,
    SheetPoint,
    coefficients,
    disc_pi,
    green,
    pi_eval,
)
from .semigroup import PoincareElement, compose, in_causal_semigroup
from .specfun import cylinder_table, hankel1, hankel2

SUITE_SEED = 20240611
WRONSKIAN = 4j / math.pi


@dataclass(frozen=True)
class Check:
    name: str
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tol)


def check_wronskian() -> Check:
    """x (H1_1 H2_2 - H2_1 H1_2)(x) equals the constant 4i/pi."""
    z = np.array([0.3, 1.0, 2.5, 7.0, 15.0, 40.0, 1.0 - 0.5j, 3.0 - 2.0j, 20.0 - 1.0j])
    tab = cylinder_table(z)
    val = z * (tab.h1[1] * tab.h2[2] - tab.h2[1] * tab.h1[2])
    return Check("wronskian", float(np.max(np.abs(val - WRONSKIAN)) / abs(WRONSKIAN)), 1e-10)


def check_cosh_oracle() -> Check:
    pts = [1.0 - 0.5j, -3j, 4.0 - 0.2j, 0.5 - 1.0j]
    worst = 0.0
    for z in pts:
        ref = -1j * math.pi * complex(hankel2(0, z))
        worst = max(worst, abs(oracle_cosh_integral(z) - ref) / abs(ref))
    return Check("cosh_integral_oracle", worst, 1e-8)


def check_integrated_D() -> Check:
    pts = [(1.0 - 0.05j, 1.2 - 0.05j, 1), (0.8 + 0.05j, 1.0 + 0.05j, -1)]
    worst = 0.0
    for m1, m2, sign in pts:
        # the closed form continued to damped masses is the claim under test
        ref = _integrated_D(m1, m2, sign, 1.0, sign == -1)
        val = oracle_integrated_D(m1, m2, sign, 1.0, sign == -1)
        worst = max(worst, abs(val - ref) / abs(ref))
    return Check("integrated_D_oracle", worst, 1e-6)


def check_cancellation(rng: np.random.Generator) -> Check:
    worst = 0.0
    for _ in range(20):
        q = VelocityVector(*rng.uniform(-1.0, 1.0, 3)).four()
        qp = VelocityVector(*rng.uniform(-1.0, 1.0, 3)).four()
        worst = max(worst, cancellation_residual(q, qp, 0.25, 1.0))
    return Check("hyperboloid_cancellation", worst, 1e-10)


def _cut_points(params: ModelParams, n: int) -> np.ndarray:
    lo = params.threshold * 1.2
    hi = min((3.0 * params.form_factor.cutoff) ** 2, 8.0 * max(params.M**2, params.threshold))
    return np.linspace(lo, hi, n)


def check_disc(params: ModelParams, quad: MassQuadrature) -> Check:
    worst = 0.0
    for s in _cut_points(params, 6):
        diff = pi_eval(params, SheetPoint.upper(s), quad) - pi_eval(params, SheetPoint.lower(s), quad)
        d = disc_pi(params, s)
        worst = max(worst, abs(diff - d) / max(abs(d), 1e-300))
    return Check("disc_pi", worst, 1e-6)


def check_sheet_matching(params: ModelParams, quad: MassQuadrature) -> Check:
    eps = 1e-8
    worst = 0.0
    for s in _cut_points(params, 6):
        g2 = green(params, SheetPoint.second(complex(s, -eps)), quad)
        gp = green(params, SheetPoint.upper(s), quad)
        worst = max(worst, abs(g2 - gp) / abs(gp))
    return Check("sheet_matching", worst, 1e-6)


def check_discontinuity(params: ModelParams, quad: MassQuadrature) -> Check:
    """G_+ - G_- = disc G_+ G_- on the cut."""
    worst = 0.0
    for s in _cut_points(params, 6):
        gp = green(params, SheetPoint.upper(s), quad)
        gm = green(params, SheetPoint.lower(s), quad)
        lhs = gp - gm
        rhs = disc_pi(params, s) * gp * gm
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300))
    return Check("green_discontinuity", worst, 1e-6)


def check_coefficient_ratios(params: ModelParams, quad: MassQuadrature) -> Check:
    p = params
    hm = cylinder_table(np.array([p.M * p.tau]))
    h1m, h2m = complex(hm.h1[1, 0]), complex(hm.h2[1, 0])
    worst = 0.0
    for s in _cut_points(p, 4):
        rs = math.sqrt(s)
        for branch in (1, -1):
            cs = coefficients(p, s, branch, quad)
            a = -(rs + p.M) / h2m * cs.r
            b = (rs - p.M) / h1m * cs.t
            worst = max(worst, abs(a - b) / max(abs(a), 1e-300))
            mu = np.array([rs * 0.7, rs * 1.3, rs * 2.0])
            mu = mu[mu > 2.0 * p.m]
            lhs = cs.T_regular(mu) * (rs - mu) * hankel2(1, mu * p.tau)
            rhs = -cs.R(mu) * (rs + mu) * hankel1(1, mu * p.tau)
            worst = max(worst, float(np.max(np.abs(lhs - rhs) / np.abs(lhs))))
    return Check("coefficient_ratios", worst, 1e-10)


def check_cone_closure(rng: np.random.Generator, pairs: int = 1000) -> Check:
    bad = 0
    for _ in range(pairs):
        g1 = _random_causal(rng)
        g2 = _random_causal(rng)
        if not in_causal_semigroup(compose(g2, g1)):
            bad += 1
    return Check("cone_closure", float(bad), 0.0)


def _random_causal(rng: np.random.Generator) -> PoincareElement:
    d = rng.normal(size=3)
    d /= np.linalg.norm(d)
    r = rng.uniform(0.0, 1.0)
    a0 = rng.uniform(0.0, 2.0)
    a = FourVector(a0, *(a0 * r * d))
    return PoincareElement(tuple(rng.uniform(-1.0, 1.0, 3)), tuple(rng.uniform(-1.0, 1.0, 3)), a)


def run_suite(params: ModelParams, quad: MassQuadrature) -> list[Check]:
    rng = np.random.default_rng(SUITE_SEED)
    return [
        check_wronskian(),
        check_cosh_oracle(),
        check_integrated_D(),
        check_cancellation(rng),
        check_disc(params, quad),
        check_sheet_matching(params, quad),
        check_discontinuity(params, quad),
        check_coefficient_ratios(params, quad),
        check_cone_closure(rng),
    ]
