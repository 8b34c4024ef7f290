"""Interacting model: form factor, self-energy on both sheets, Green's function,
spectral factor rho, normalisation C and the coefficient functions.

The continuum is parametrised by kappa >= 0 with mu(kappa) = 2m sqrt(1 + kappa^2).
On the half line the measure mu d mu / (2m sqrt(mu^2 - 4m^2)) is exactly d kappa,
and the factor two from the two roots +-kappa is already inside the 1/32
prefactor of the self-energy.

Every singular integral is written as

    int_0^K f(kappa) / (kappa^2 - c^2) dkappa
        = int_0^K [f(kappa) - f(c)] / (kappa^2 - c^2) dkappa + f(c) L(c),
    L(c) = (1 / 2c) [Log((K - c)/(K + c)) + sigma i pi],

where c^2 = s/4m^2 - 1.  The remainder is an entire function of c, so one
formula with sigma = +1 gives the upper rim of the cut, the first sheet above
it and (continued downward) the second sheet; sigma = -1 gives the lower rim
and the first sheet below.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property, lru_cache
import math
from typing import Callable

import numpy as np

from .errors import DomainError, SingularityError
from .specfun import cylinder_table, hankel1, hankel2, script_h_parts

TAIL_EPS = 1e-16


@dataclass(frozen=True)
class FormFactor:
    """alpha(mu) = A ((mu^2 - 4m^2)/mu^2)^p exp(-mu^2/Lambda^2)."""

    family: str = "threshold-gaussian"
    power: int = 1
    cutoff: float = 3.0
    amplitude: float = 1.0

    def __post_init__(self) -> None:
        if self.family != "threshold-gaussian":
            raise DomainError(f"unknown form-factor family {self.family!r}")
        if int(self.power) != self.power or self.power < 1:
            raise DomainError("form_factor.power must be an integer >= 1")
        if not self.cutoff > 0:
            raise DomainError("form_factor.cutoff must be positive")
        if not self.amplitude > 0:
            raise DomainError("form_factor.amplitude must be positive")


@dataclass(frozen=True)
class ModelParams:
    M: float = 1.0
    m: float = 0.25
    tau: float = 1.0
    beta: float = 0.1
    form_factor: FormFactor = field(default_factory=FormFactor)

    def __post_init__(self) -> None:
        for name in ("M", "m", "tau"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be a positive finite number, got {v!r}")
        if not math.isfinite(self.beta):
            raise DomainError("beta must be finite")

    @property
    def threshold(self) -> float:
        return 4.0 * self.m * self.m

    def with_beta(self, beta: float) -> "ModelParams":
        return replace(self, beta=beta)


class Location(Enum):
    OFF_AXIS = "off-axis"
    UPPER_BOUNDARY = "upper-boundary"
    LOWER_BOUNDARY = "lower-boundary"
    SECOND_SHEET = "second-sheet"
    SECOND_SHEET_MIRROR = "second-sheet-mirror"


@dataclass(frozen=True)
class SheetPoint:
    s: complex
    location: Location

    def __post_init__(self) -> None:
        s = complex(self.s)
        object.__setattr__(self, "s", s)
        loc = self.location
        if loc is Location.OFF_AXIS and s.imag == 0:
            raise DomainError("OFF_AXIS needs Im s != 0")
        if loc in (Location.UPPER_BOUNDARY, Location.LOWER_BOUNDARY) and s.imag != 0:
            raise DomainError("boundary values need real s")
        if loc is Location.SECOND_SHEET and s.imag > 0:
            raise DomainError("SECOND_SHEET needs Im s <= 0")
        if loc is Location.SECOND_SHEET_MIRROR and s.imag < 0:
            raise DomainError("SECOND_SHEET_MIRROR needs Im s >= 0")

    @classmethod
    def off_axis(cls, s: complex) -> "SheetPoint":
        return cls(s, Location.OFF_AXIS)

    @classmethod
    def upper(cls, s: float) -> "SheetPoint":
        return cls(s, Location.UPPER_BOUNDARY)

    @classmethod
    def lower(cls, s: float) -> "SheetPoint":
        return cls(s, Location.LOWER_BOUNDARY)

    @classmethod
    def second(cls, s: complex) -> "SheetPoint":
        return cls(s, Location.SECOND_SHEET)

    @classmethod
    def mirror(cls, s: complex) -> "SheetPoint":
        return cls(s, Location.SECOND_SHEET_MIRROR)


def kappa_max_for(params: ModelParams, tail: float = TAIL_EPS) -> float:
    lam = params.form_factor.cutoff
    mu2 = lam * lam * math.log(1.0 / tail)
    return math.sqrt(max(mu2 / params.threshold - 1.0, 1.0))


@dataclass(frozen=True)
class MassQuadrature:
    """Composite Gauss-Legendre rule on [0, kappa_max].

    Panels are equal unless ``breaks`` (interior edges) is given.
    """

    kappa_max: float
    panels: int = 24
    order: int = 20
    scheme: str = "gauss-legendre-panels"
    breaks: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.breaks is not None:
            b = tuple(float(x) for x in self.breaks)
            if any(not 0 < x < self.kappa_max for x in b) or any(y <= x for x, y in zip(b, b[1:])):
                raise DomainError("breaks must increase strictly inside (0, kappa_max)")
            object.__setattr__(self, "breaks", b)
            object.__setattr__(self, "panels", len(b) + 1)
        if not self.kappa_max > 0 or self.panels < 1 or self.order < 2:
            raise DomainError("invalid quadrature layout")

    @classmethod
    def for_params(cls, params: ModelParams, panels: int = 24, order: int = 20,
                   tail: float = TAIL_EPS) -> "MassQuadrature":
        return cls(kappa_max_for(params, tail), panels, order)

    @classmethod
    def graded(cls, kappa_max: float, focus: float, width: float, panels: int = 24,
               order: int = 20) -> "MassQuadrature":
        """Equal panels plus a geometric cluster (ratio 2) around ``focus``,
        smallest panel ``width``; for integrands peaked near a real kappa."""
        edges = set(np.linspace(0.0, kappa_max, panels + 1)[1:-1].tolist())
        coarse = kappa_max / panels
        for side in (-1.0, 1.0):
            h = width / 2.0
            x = focus
            while h < coarse:
                x += side * h
                if 0 < x < kappa_max:
                    edges.add(x)
                h *= 2.0
        edges.add(focus)
        # drop uniform edges that sit too close to a graded one
        out = []
        for x in sorted(e for e in edges if 0 < e < kappa_max):
            if out and x - out[-1] < 0.25 * width:
                continue
            out.append(x)
        return cls(kappa_max, order=order, breaks=tuple(out))

    def refined(self, factor: int = 2) -> "MassQuadrature":
        if self.breaks is None:
            return replace(self, panels=self.panels * factor)
        e = self.edges
        fine = [a + (b - a) * j / factor for a, b in zip(e[:-1], e[1:]) for j in range(factor)]
        return replace(self, breaks=tuple(fine[1:]))

    @cached_property
    def edges(self) -> np.ndarray:
        if self.breaks is not None:
            return np.array((0.0, *self.breaks, self.kappa_max))
        return np.linspace(0.0, self.kappa_max, self.panels + 1)

    @cached_property
    def _rule(self) -> tuple[np.ndarray, np.ndarray]:
        x, w = np.polynomial.legendre.leggauss(self.order)
        a, b = self.edges[:-1, None], self.edges[1:, None]
        nodes = 0.5 * (b - a) * x[None, :] + 0.5 * (a + b)
        weights = 0.5 * (b - a) * w[None, :]
        return nodes.ravel(), weights.ravel()

    @property
    def nodes(self) -> np.ndarray:
        return self._rule[0]

    @property
    def weights(self) -> np.ndarray:
        return self._rule[1]

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> complex:
        return complex(_fsum(self.weights * f(self.nodes)))


def _fsum(v: np.ndarray) -> complex:
    v = np.asarray(v, dtype=complex)
    return complex(math.fsum(v.real), math.fsum(v.imag))


def mu_of_kappa(params: ModelParams, kappa):
    return 2.0 * params.m * np.sqrt(1.0 + np.asarray(kappa) ** 2)


def kappa_of_s(params: ModelParams, s) -> complex:
    """Principal root c of c^2 = s/4m^2 - 1."""
    return np.sqrt(np.asarray(s, dtype=complex) / params.threshold - 1.0)


def alpha(ff: FormFactor, mu, m: float):
    """Form factor at (complex) invariant mass mu; meromorphic in mu^2 with a pole only at 0."""
    mu2 = np.asarray(mu) ** 2
    return ff.amplitude * ((mu2 - 4.0 * m * m) / mu2) ** ff.power * np.exp(-mu2 / ff.cutoff**2)


def _alpha_sq_of_s(params: ModelParams, s):
    # alpha(sqrt s)^2 written through s, so no branch of sqrt enters
    ff = params.form_factor
    s = np.asarray(s, dtype=complex)
    return ff.amplitude**2 * ((s - params.threshold) / s) ** (2 * ff.power) * np.exp(-2.0 * s / ff.cutoff**2)


def measure_density(params: ModelParams, mu: float) -> float:
    """mu / (2m sqrt(mu^2 - 4m^2)): d kappa / d mu on the half line."""
    mu = float(mu)
    if not mu > 2.0 * params.m:
        raise DomainError("measure density needs mu > 2m")
    return mu / (2.0 * params.m * math.sqrt(mu * mu - params.threshold))


def _sqrt_s(s) -> complex:
    # branch -pi < Arg s <= pi
    return np.sqrt(complex(s) + 0j)


class _Kernel:
    """Grid data for one (params, quadrature) pair; immutable after construction."""

    def __init__(self, params: ModelParams, quad: MassQuadrature) -> None:
        self.params = params
        self.quad = quad
        p = params
        self.kap = quad.nodes
        self.w = quad.weights
        self.kmax = quad.kappa_max
        self.mu = mu_of_kappa(p, self.kap)
        self.a2 = alpha(p.form_factor, self.mu, p.m) ** 2
        x = self.mu * p.tau
        pp, qq = script_h_parts(x)
        self.P = pp
        self.XQ = x * qq
        pm, qm = script_h_parts(np.array([p.M * p.tau]))
        self.PM = complex(pm[0])
        self.XQM = complex(p.M * p.tau * qm[0])
        self.pref = -(math.pi * p.beta) ** 2 / 32.0

    def script_h_M(self, s) -> complex:
        """script_h(1, 2, sqrt(s) tau, M tau)."""
        return _sqrt_s(s) * self.params.tau * self.PM + self.XQM

    def f_at_c(self, s) -> complex:
        y = _sqrt_s(s) * self.params.tau
        pp, qq = script_h_parts(np.array([y]))
        return complex(_alpha_sq_of_s(self.params, s) * y * (pp[0] + qq[0]))

    def f_of_kappa(self, kappa, s) -> np.ndarray:
        p = self.params
        kappa = np.asarray(kappa, dtype=complex)
        mu2 = p.threshold * (1.0 + kappa**2)
        x = np.sqrt(mu2) * p.tau
        pp, qq = script_h_parts(x)
        y = _sqrt_s(s) * p.tau
        return _alpha_sq_of_s(p, mu2) * (y * pp + x * qq)

    def bracket(self, s, c: complex, sigma: int) -> complex:
        """int_0^K f/(kappa^2 - c^2) with the sigma prescription at the pole."""
        p = self.params
        y = _sqrt_s(s) * p.tau
        f = self.a2 * (y * self.P + self.XQ)
        if c == 0:
            fc = 0.0
            rem = f / self.kap**2
            return _fsum(self.w * rem)
        fc = self.f_at_c(s)
        den = self.kap**2 - c * c
        near = np.abs(self.kap - c) < 1e-7 * max(1.0, abs(c))
        rem = (f - fc) / np.where(near, 1.0, den)
        if np.any(near):
            h = 1e-3 * max(1.0, abs(c))
            fp = (self.f_of_kappa(c + h, s) - self.f_of_kappa(c - h, s)) / (2 * h)
            f3 = (self.f_of_kappa(c + 2 * h, s) - self.f_of_kappa(c - 2 * h, s)) / (4 * h)
            deriv = complex((4 * fp - f3) / 3)
            rem = np.where(near, deriv / (self.kap + c), rem)
        log_term = np.log((self.kmax - c) / (self.kmax + c)) + sigma * 1j * math.pi
        return _fsum(self.w * rem) + fc * log_term / (2.0 * c)

    def pi_rim(self, s: np.ndarray, sigma: int) -> np.ndarray:
        """Vectorised boundary values Pi(s +- i0) for real s > 4m^2."""
        p = self.params
        s = np.asarray(s, dtype=float)
        if p.beta == 0:
            return np.zeros(s.shape, complex)
        c = np.sqrt(s / p.threshold - 1.0)
        y = np.sqrt(s) * p.tau
        pp, qq = script_h_parts(y)
        fc = _alpha_sq_of_s(p, s) * y * (pp + qq)
        rem = np.empty((s.size, self.kap.size), complex)
        for lo in range(0, s.size, 256):
            sl = slice(lo, lo + 256)
            f = self.a2[None, :] * (y[sl, None] * self.P[None, :] + self.XQ[None, :])
            den = self.kap[None, :] ** 2 - c[sl, None] ** 2
            near = np.abs(self.kap[None, :] - c[sl, None]) < 1e-7 * np.maximum(1.0, c[sl, None])
            den[near] = 1.0
            r = (f - fc[sl, None]) / den
            for i, j in zip(*np.nonzero(near)):
                k = lo + i
                h = 1e-3 * max(1.0, c[k])
                fk = lambda x: self.f_of_kappa(np.array([c[k] + x]), s[k])[0]
                fp = (fk(h) - fk(-h)) / (2 * h)
                f3 = (fk(2 * h) - fk(-2 * h)) / (4 * h)
                r[i, j] = (4 * fp - f3) / 3 / (self.kap[j] + c[k])
            rem[sl] = r
        log_term = np.log((self.kmax - c) / (self.kmax + c)) + sigma * 1j * math.pi
        br = rem @ self.w + fc * log_term / (2.0 * c)
        hm = y * self.PM + self.XQM
        return self.pref * hm * (-1.0 / p.threshold) * br

    def pi(self, s, c: complex, sigma: int) -> complex:
        if self.params.beta == 0:
            return 0j
        scale = self.pref * self.script_h_M(s) * (-1.0 / self.params.threshold)
        return complex(scale * self.bracket(s, c, sigma))


@lru_cache(maxsize=64)
def _kernel(params: ModelParams, quad: MassQuadrature) -> _Kernel:
    return _Kernel(params, quad)


def default_quadrature(params: ModelParams) -> MassQuadrature:
    return MassQuadrature.for_params(params)


def _check_cut(params: ModelParams, s: complex) -> float:
    if s.imag != 0:
        raise DomainError("boundary values need real s")
    if s.real < params.threshold:
        raise DomainError(f"s = {s.real!r} is below the threshold 4m^2 = {params.threshold!r}")
    return s.real


def pi_eval(params: ModelParams, pt: SheetPoint, quad: MassQuadrature | None = None) -> complex:
    """Self-energy at a tagged point."""
    quad = quad or default_quadrature(params)
    ker = _kernel(params, quad)
    s = pt.s
    loc = pt.location
    if loc is Location.OFF_AXIS:
        return ker.pi(s, complex(kappa_of_s(params, s)), 1 if s.imag > 0 else -1)
    if loc in (Location.UPPER_BOUNDARY, Location.LOWER_BOUNDARY):
        x = _check_cut(params, s)
        c = math.sqrt(x / params.threshold - 1.0)
        return ker.pi(s, complex(c), 1 if loc is Location.UPPER_BOUNDARY else -1)
    if loc is Location.SECOND_SHEET:
        if s.imag == 0:
            if s.real >= params.threshold:
                return ker.pi(s, complex(math.sqrt(s.real / params.threshold - 1.0)), 1)
            c = -1j * math.sqrt(1.0 - s.real / params.threshold)
            return ker.pi(s, c, 1)
        return ker.pi(s, complex(kappa_of_s(params, s)), 1)
    # mirror continuation: lower-rim function continued upward
    if s.imag == 0:
        if s.real >= params.threshold:
            return ker.pi(s, complex(math.sqrt(s.real / params.threshold - 1.0)), -1)
        return ker.pi(s, 1j * math.sqrt(1.0 - s.real / params.threshold), -1)
    return ker.pi(s, complex(kappa_of_s(params, s)), -1)


def disc_pi(params: ModelParams, s: complex) -> complex:
    """Analytic continuation of Pi_+(s) - Pi_-(s).

    disc = (i pi^3 beta^2 / 32) alpha(sqrt s)^2 script_h(sqrt s tau, M tau)
           script_h(sqrt s tau, sqrt s tau) / (2m sqrt(s - 4m^2)).
    """
    s = complex(s)
    p = params
    if s == p.threshold:
        # alpha^2 vanishes like (s - 4m^2)^(2p), beating the inverse square root
        return 0j
    rs = _sqrt_s(s)
    y = rs * p.tau
    tab = cylinder_table(np.array([y, p.M * p.tau]))
    h_ss = 2.0 * y * tab.h1[1, 0] * tab.h2[2, 0]
    x = p.M * p.tau
    h_sm = y * (tab.h1[1, 1] * tab.h2[2, 1] + tab.h2[1, 1] * tab.h1[2, 1]) + x * (
        tab.h1[1, 1] * tab.h2[2, 1] - tab.h2[1, 1] * tab.h1[2, 1])
    root = 2.0 * p.m * np.sqrt(s - p.threshold)
    return complex(1j * math.pi**3 * p.beta**2 / 32.0 * _alpha_sq_of_s(p, s) * h_sm * h_ss / root)


def green(params: ModelParams, pt: SheetPoint, quad: MassQuadrature | None = None) -> complex:
    den = pt.s - params.M**2 - pi_eval(params, pt, quad)
    if abs(den) < 1e-13:
        raise SingularityError(f"Green's function pole at s = {pt.s!r}")
    return 1.0 / den


def green_rim(params: ModelParams, s, sigma: int, quad: MassQuadrature | None = None) -> np.ndarray:
    """G(s +- i0) on an array of real s above threshold (sigma = +1 upper rim)."""
    s = np.asarray(s, dtype=float)
    if np.any(s <= params.threshold):
        raise DomainError("green_rim needs s above the threshold")
    den = s - params.M**2 - _kernel(params, quad or default_quadrature(params)).pi_rim(s, sigma)
    if np.any(np.abs(den) < 1e-13):
        raise SingularityError("Green's function pole on the real axis")
    return 1.0 / den


def inverse_green(params: ModelParams, pt: SheetPoint, quad: MassQuadrature | None = None) -> complex:
    return pt.s - params.M**2 - pi_eval(params, pt, quad)


def _norm_c_analytic(params: ModelParams, s) -> complex:
    s = complex(s)
    return complex(np.sqrt(params.m * np.sqrt(s - params.threshold) / _sqrt_s(s)))


def norm_C(params: ModelParams, s: float) -> float:
    """Positive root of |C|^2 = m sqrt(s - 4m^2) / sqrt(s).

    The delta-delta term of the commutator carries sqrt(s)/(m sqrt(s - 4m^2)) |C|^2
    once both roots +-kappa_0 of sqrt(s) = mu(kappa) are counted.
    """
    s = float(np.real(s))
    if not s > params.threshold:
        raise DomainError("norm_C needs s > 4m^2")
    return math.sqrt(params.m * math.sqrt(s - params.threshold) / math.sqrt(s))


def rho(params: ModelParams, s) -> complex:
    """rho(s) = (i C pi beta / 8) alpha script_h(y, y) / (2m sqrt(s - 4m^2) H1_1(y)), y = sqrt(s) tau."""
    s = complex(s)
    p = params
    if s == p.threshold:
        raise DomainError("rho is evaluated at the threshold")
    c = norm_C(p, s.real) if s.imag == 0 and s.real > p.threshold else _norm_c_analytic(p, s)
    rs = _sqrt_s(s)
    y = rs * p.tau
    tab = cylinder_table(np.array([y]))
    h_ss = 2.0 * y * tab.h1[1, 0] * tab.h2[2, 0]
    a = alpha(p.form_factor, rs, p.m)
    return complex(1j * c * math.pi * p.beta / 8.0 * a * h_ss / (2.0 * p.m * np.sqrt(s - p.threshold) * tab.h1[1, 0]))


def rho_h22_form(params: ModelParams, s) -> complex:
    """Second form of rho, (i C pi beta / 4) sqrt(s) alpha H2_2(sqrt(s) tau) / (2m sqrt(s - 4m^2)).

    It carries no factor tau, so it agrees with :func:`rho` only for tau = 1.
    """
    s = complex(s)
    p = params
    c = norm_C(p, s.real) if s.imag == 0 and s.real > p.threshold else _norm_c_analytic(p, s)
    rs = _sqrt_s(s)
    a = alpha(p.form_factor, rs, p.m)
    return complex(1j * c * math.pi * p.beta / 4.0 * rs * a * hankel2(2, rs * p.tau) / (2.0 * p.m * np.sqrt(s - p.threshold)))


@dataclass(frozen=True)
class CoefficientSet:
    """Creation-operator solution at one s and branch.

    T(s, kappa) = T_singular * delta(sqrt(s) - mu(kappa)) + PV T_regular(mu).
    T_singular = C - branch * i pi * (numerator of T_regular at mu = sqrt s),
    which is how the +-i epsilon prescription enters.
    """

    s: float
    branch: int
    t: complex
    r: complex
    T_singular: complex
    C: float
    T_regular: Callable[[np.ndarray], np.ndarray]
    R: Callable[[np.ndarray], np.ndarray]
    T_numerator: Callable[[np.ndarray], np.ndarray]

    def conjugate(self) -> "CoefficientSet":
        """Coefficients of the annihilation solution (complex conjugates)."""
        tr, rr, tn = self.T_regular, self.R, self.T_numerator
        return CoefficientSet(
            s=self.s, branch=-self.branch, t=self.t.conjugate(), r=self.r.conjugate(),
            T_singular=self.T_singular.conjugate(), C=self.C,
            T_regular=lambda mu: np.conj(tr(mu)), R=lambda mu: np.conj(rr(mu)),
            T_numerator=lambda mu: np.conj(tn(mu)),
        )


def coefficients(params: ModelParams, s: float, branch: int, quad: MassQuadrature | None = None) -> CoefficientSet:
    if branch not in (1, -1):
        raise DomainError("branch must be +1 or -1")
    s = float(np.real(s))
    p = params
    if not s > p.threshold:
        raise DomainError("coefficients exist only on the spectrum s > 4m^2")
    loc = Location.UPPER_BOUNDARY if branch == 1 else Location.LOWER_BOUNDARY
    g = green(p, SheetPoint(s, loc), quad)
    rh = rho(p, s)
    c = norm_C(p, s)
    rs = math.sqrt(s)
    hm = cylinder_table(np.array([p.M * p.tau]))
    t = (rs + p.M) * hm.h1[1, 0] * rh * g
    r = -(rs - p.M) * hm.h2[1, 0] * rh * g
    kM = _kernel(p, quad or default_quadrature(p)).script_h_M(s)
    common = 1j * math.pi * p.beta / 8.0 * kM * rh * g

    def numerator(mu):
        mu = np.asarray(mu, dtype=float)
        return common * alpha(p.form_factor, mu, p.m) * hankel1(1, mu * p.tau)

    def t_regular(mu):
        return numerator(mu) / (rs - np.asarray(mu, dtype=float))

    def r_fun(mu):
        mu = np.asarray(mu, dtype=float)
        return -common * alpha(p.form_factor, mu, p.m) * hankel2(1, mu * p.tau) / (rs + mu)

    t_sing = c - branch * 1j * math.pi * complex(numerator(np.array([rs]))[0])
    return CoefficientSet(s=s, branch=branch, t=complex(t), r=complex(r), T_singular=complex(t_sing), C=c,
                          T_regular=t_regular, R=r_fun, T_numerator=numerator)
