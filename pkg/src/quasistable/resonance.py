"""Resonance poles, residues, the S-matrix scalar and Gamow decay.

All continuations are done in the uniformising variable c with
s = 4m^2 (1 + c^2).  With the upper-rim prescription the self-energy is a
single analytic function Phi(c) of c near the cut:

    Im c > 0   first sheet (either half-plane of s),
    Im c < 0   second sheet,
    Re c > 0 / Re c < 0 selects the lower / upper half of s on the second sheet.

The lower-rim function at c equals the upper-rim one at -c, so
G_+ continued is 1/Phi(c), G_- continued is 1/Phi(-c) and S = Phi(-c)/Phi(c).
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
import math
from typing import Callable

import numpy as np

from .errors import DomainError, EscapedDomain, NoConvergence, SingularityError, WindingError
from .kinematics import VelocityVector
from .model import (
    Location,
    MassQuadrature,
    ModelParams,
    SheetPoint,
    _alpha_sq_of_s,
    _kernel,
    _sqrt_s,
    default_quadrature,
    disc_pi,
    pi_eval,
)
from .specfun import script_h

SEARCH_BOUND = 1e3
_CONTINUATIONS = (Location.SECOND_SHEET, Location.SECOND_SHEET_MIRROR)


@dataclass(frozen=True)
class PoleResult:
    s_R: complex
    residue: complex
    M_R: float
    Gamma_R: float
    Mbar_R: float
    Gammabar_R: float
    lifetime: float
    iterations: int
    converged: bool
    final_residual: float
    sheet: str
    c_R: complex


@dataclass(frozen=True)
class GamowState:
    s_R: complex
    q: VelocityVector

    def __post_init__(self) -> None:
        object.__setattr__(self, "s_R", complex(self.s_R))
        if not _sqrt_s(self.s_R).imag < 0:
            raise DomainError("a Gamow state needs Im sqrt(s_R) < 0 (decaying pole)")


def _c_of_s(params: ModelParams, s: complex, continuation: Location) -> complex:
    if continuation not in _CONTINUATIONS:
        raise DomainError("continuation must be SECOND_SHEET or SECOND_SHEET_MIRROR")
    s = complex(s)
    c = cmath.sqrt(s / params.threshold - 1.0)
    if s.imag == 0 and s.real < params.threshold:
        c = -1j * math.sqrt(1.0 - s.real / params.threshold)
    return c if continuation is Location.SECOND_SHEET else -c


def _s_of_c(params: ModelParams, c: complex) -> complex:
    return params.threshold * (1.0 + c * c)


def phi(params: ModelParams, quad: MassQuadrature, c: complex) -> complex:
    """Inverse Green's function s - M^2 - Pi as an analytic function of c."""
    s = _s_of_c(params, c)
    return complex(s - params.M**2 - _kernel(params, quad).pi(s, complex(c), 1))


def sheet_of(c: complex) -> str:
    if c.imag > 0:
        return "first"
    if c.imag < 0:
        return "second"
    return "cut"


def continued_inverse_green(params: ModelParams, s: complex, continuation: Location = Location.SECOND_SHEET,
                            quad: MassQuadrature | None = None) -> complex:
    """s - M^2 - Pi on the continuation of the upper (SECOND_SHEET) or lower rim function.

    Defined in both half-planes: below the cut the upper-rim function is the
    second sheet, above it the first sheet (and the reverse for the mirror).
    """
    quad = quad or default_quadrature(params)
    return phi(params, quad, _c_of_s(params, s, continuation))


def _muller(f: Callable[[complex], complex], x0: complex, x1: complex, x2: complex, tol: float,
            max_iter: int, guard: Callable[[complex], None]):
    f0, f1, f2 = f(x0), f(x1), f(x2)
    for it in range(1, max_iter + 1):
        h1, h2 = x1 - x0, x2 - x1
        d1, d2 = (f1 - f0) / h1, (f2 - f1) / h2
        a = (d2 - d1) / (h2 + h1)
        b = a * h2 + d2
        root = cmath.sqrt(b * b - 4.0 * f2 * a)
        den = b + root if abs(b + root) >= abs(b - root) else b - root
        if den == 0:
            raise NoConvergence("Muller step degenerated")
        x3 = x2 - 2.0 * f2 / den
        guard(x3)
        f3 = f(x3)
        x0, x1, x2 = x1, x2, x3
        f0, f1, f2 = f1, f2, f3
        if abs(f2) < tol:
            return x2, f2, it
    raise NoConvergence(f"no root after {max_iter} Muller iterations, |F| = {abs(f2):.3g}")


def _pole_result(s: complex, c: complex, residue: complex, iterations: int, res: float) -> PoleResult:
    rs = _sqrt_s(s)
    m_r, gam = rs.real, -2.0 * rs.imag
    mbar = math.sqrt(s.real) if s.real > 0 else float("nan")
    gbar = -s.imag / mbar
    life = 1.0 / gam if gam != 0 else math.inf
    return PoleResult(s_R=s, residue=residue, M_R=m_r, Gamma_R=gam, Mbar_R=mbar, Gammabar_R=gbar,
                      lifetime=life, iterations=iterations, converged=True, final_residual=res,
                      sheet=sheet_of(c), c_R=c)


def find_pole(params: ModelParams, quad: MassQuadrature | None = None, guess: complex | None = None,
              tol: float = 1e-12, max_iter: int = 60,
              continuation: Location = Location.SECOND_SHEET, bound: float = SEARCH_BOUND) -> PoleResult:
    """Zero of s - M^2 - Pi^II(s) by Muller iteration in c.

    The iterate may pass through the cut (it then lands on the first sheet,
    which ``sheet`` reports).  Crossing the real s axis below threshold
    (Re c changes sign) or leaving |s| < bound raises EscapedDomain.
    """
    quad = quad or default_quadrature(params)
    if not tol >= 1e-12:
        raise DomainError("tol must be >= 1e-12")
    guess = complex(params.M**2 if guess is None else guess)
    if continuation is Location.SECOND_SHEET and guess.imag > 0:
        raise DomainError("second-sheet search needs a guess with Im s <= 0")
    if continuation is Location.SECOND_SHEET_MIRROR and guess.imag < 0:
        raise DomainError("mirror search needs a guess with Im s >= 0")
    if params.beta == 0:
        s = complex(params.M**2)
        c = _c_of_s(params, s, continuation)
        return _pole_result(s, c, 1.0 + 0j, 0, 0.0)
    c0 = _c_of_s(params, guess, continuation)
    side = 1.0 if c0.real >= 0 else -1.0

    def guard(c: complex) -> None:
        if abs(_s_of_c(params, c)) > bound:
            raise EscapedDomain(f"iterate left |s| < {bound}")
        if c.real * side < 0:
            raise EscapedDomain("iterate crossed the real s axis below threshold")

    h = 0.01 * max(abs(c0), 0.1)
    f = lambda c: phi(params, quad, c)
    c, fc, its = _muller(f, c0 - h, c0 + h, c0, tol, max_iter, guard)
    s = _s_of_c(params, c)
    radius = _residue_radius(params, s, c)
    res = _residue_c(params, quad, c, radius, 64)
    return _pole_result(s, c, res, its, abs(fc))


def _residue_radius(params: ModelParams, s: complex, c: complex) -> float:
    # stay well inside the disc where the c(s) map is single valued
    return 0.25 * min(abs(s - params.threshold), 8.0 * params.threshold / 4.0 * abs(c) * abs(c.real), 0.04)


def _circle(params: ModelParams, c_center: complex, s_center: complex, radius: float, nodes: int):
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    pts = s_center + radius * np.exp(1j * theta)
    cs = []
    for sk in pts:
        r = cmath.sqrt(sk / params.threshold - 1.0)
        cs.append(r if abs(r - c_center) <= abs(-r - c_center) else -r)
    return pts, np.array(cs)


def _winding(values: np.ndarray) -> float:
    ph = np.unwrap(np.angle(np.append(values, values[0])))
    return float((ph[-1] - ph[0]) / (2.0 * np.pi))


def _residue_c(params: ModelParams, quad: MassQuadrature, c: complex, radius: float, nodes: int) -> complex:
    s_center = _s_of_c(params, c)
    pts, cs = _circle(params, c, s_center, radius, nodes)
    vals = np.array([phi(params, quad, ck) for ck in cs])
    w = _winding(vals)
    if abs(w - 1.0) > 1e-6:
        raise WindingError(f"argument principle counts {w:.6g} zeros inside the circle, need 1")
    return complex(np.mean((pts - s_center) / vals))


def residue_contour(params: ModelParams, quad: MassQuadrature | None, s_R: complex, radius: float,
                    nodes: int = 64, continuation: Location = Location.SECOND_SHEET) -> complex:
    """(1/2 pi i) times the contour integral of G^II around s_R, trapezoid rule on a circle."""
    quad = quad or default_quadrature(params)
    if not radius > 0:
        raise DomainError("radius must be positive")
    s_R = complex(s_R)
    if params.beta == 0:
        if abs(s_R - params.M**2) >= radius:
            raise WindingError("no zero of s - M^2 inside the circle")
        return 1.0 + 0j
    c = _c_of_s(params, s_R, continuation)
    return _residue_c(params, quad, c, radius, nodes)


def residue_derivative(params: ModelParams, quad: MassQuadrature | None, pole: PoleResult,
                       h: float = 1e-4) -> complex:
    """1/(dF/ds) at the pole by a fourth-order central difference in s."""
    quad = quad or default_quadrature(params)
    c = pole.c_R
    s = pole.s_R

    def f(ds: complex) -> complex:
        r = cmath.sqrt((s + ds) / params.threshold - 1.0)
        return phi(params, quad, r if abs(r - c) <= abs(r + c) else -r)

    d = (8 * (f(h) - f(-h)) - (f(2 * h) - f(-2 * h))) / (12 * h)
    return 1.0 / d


def weak_pole(params: ModelParams, quad: MassQuadrature | None = None, tol: float = 1e-12,
              max_iter: int = 500) -> complex:
    """Fixed point of s = M^2 - (i pi^3 beta^2/32) sqrt(s) alpha^2 h(s)/(2m sqrt(s - 4m^2)).

    h(s) = script_h(1, 2, sqrt(s) tau, sqrt(s) tau).  It keeps only the
    delta part of the self-energy; see the README for how it relates to the
    exact pole.
    """
    p = params
    s = complex(p.M**2)
    if p.beta == 0:
        return s
    pref = 1j * math.pi**3 * p.beta**2 / 32.0
    for _ in range(max_iter):
        rs = _sqrt_s(s)
        y = rs * p.tau
        h = complex(script_h(1, 2, y, y))
        new = p.M**2 - pref * rs * _alpha_sq_of_s(p, s) * h / (2.0 * p.m * cmath.sqrt(s - p.threshold))
        if not np.isfinite(new) or abs(new) > SEARCH_BOUND:
            raise NoConvergence("weak-coupling map diverged")
        if abs(new - s) <= tol * max(1.0, abs(new)):
            return complex(new)
        s = complex(new)
    raise NoConvergence("weak-coupling map did not become stationary")


def one_step_pole(params: ModelParams, quad: MassQuadrature | None = None) -> complex:
    """s = M^2 + Pi^II(M^2): the first Newton-free step of the exact pole equation."""
    quad = quad or default_quadrature(params)
    return complex(params.M**2 + pi_eval(params, SheetPoint.second(params.M**2), quad))


def smatrix(params: ModelParams, quad: MassQuadrature | None, pt: SheetPoint) -> complex:
    """S = G_+/G_- and its continuation S(c) = Phi(-c)/Phi(c)."""
    quad = quad or default_quadrature(params)
    if params.beta == 0:
        return 1.0 + 0j
    loc = pt.location
    if loc is Location.OFF_AXIS:
        raise DomainError("S is defined on the cut and by continuation; use SECOND_SHEET or its mirror")
    if loc in (Location.UPPER_BOUNDARY, Location.LOWER_BOUNDARY):
        f_plus = pt.s - params.M**2 - pi_eval(params, SheetPoint.upper(pt.s.real), quad)
        f_minus = pt.s - params.M**2 - pi_eval(params, SheetPoint.lower(pt.s.real), quad)
    else:
        c = _c_of_s(params, pt.s, Location.SECOND_SHEET)
        f_plus = phi(params, quad, c)
        f_minus = phi(params, quad, -c)
    if abs(f_plus) < 1e-13:
        raise SingularityError(f"S has a pole at s = {pt.s!r}")
    return complex(f_minus / f_plus)


def _smatrix_c(params: ModelParams, quad: MassQuadrature, c: complex) -> complex:
    return phi(params, quad, -c) / phi(params, quad, c)


def gamow_amplitude(state: GamowState, t: float, diagnostic: bool = False) -> complex:
    """exp(-i sqrt(s_R) q0 t); backward times only under the diagnostic flag."""
    if t < 0 and not diagnostic:
        raise DomainError("t < 0 lies outside the causal semigroup (pass diagnostic=True to probe it)")
    return complex(np.exp(-1j * _sqrt_s(state.s_R) * state.q.q0 * t))


def width_convention_gap(pole: PoleResult) -> float:
    """|Gammabar_R - Gamma_R| / |Gamma_R|; zero for a stable state."""
    if pole.Gamma_R == 0:
        return 0.0
    return abs(pole.Gammabar_R - pole.Gamma_R) / abs(pole.Gamma_R)


def widths_from_s(s_R: complex) -> PoleResult:
    """Both parametrisations of a given complex square mass (no solve)."""
    s_R = complex(s_R)
    return _pole_result(s_R, cmath.sqrt(s_R), 0j, 0, 0.0)


@dataclass(frozen=True)
class Rectangle:
    """Closed rectangle x0 <= Re s <= x1, y0 <= Im s <= y1 traversed counter-clockwise."""

    x0: float
    x1: float
    y0: float
    y1: float
    panels: int = 16
    order: int = 24

    def __post_init__(self) -> None:
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise DomainError("rectangle needs x0 < x1 and y0 < y1")

    def corners(self) -> list[complex]:
        return [complex(self.x0, self.y0), complex(self.x1, self.y0),
                complex(self.x1, self.y1), complex(self.x0, self.y1)]

    def contains(self, s: complex) -> bool:
        return self.x0 < s.real < self.x1 and self.y0 < s.imag < self.y1

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Gauss-Legendre nodes and complex weights ds along the boundary."""
        t, w = np.polynomial.legendre.leggauss(self.order)
        pts, wts = [], []
        cs = self.corners()
        for k in range(4):
            a, b = cs[k], cs[(k + 1) % 4]
            for j in range(self.panels):
                pa = a + (b - a) * j / self.panels
                pb = a + (b - a) * (j + 1) / self.panels
                pts.append(0.5 * (pa + pb) + 0.5 * (pb - pa) * t)
                wts.append(0.5 * (pb - pa) * w)
        return np.concatenate(pts), np.concatenate(wts)


def contour_closure_check(params: ModelParams, quad: MassQuadrature | None,
                          testfn: Callable[[complex], complex], contour: Rectangle,
                          pole_hint: complex | None = None) -> float:
    """Cauchy check of the contour integral of S^II(s) testfn(s) on a second-sheet rectangle.

    The rectangle must lie in the open lower half-plane and right of threshold.
    Enclosed poles of S^II are counted by the argument principle; at most one
    is supported.  Returns |direct - 2 pi i sum Res| relative to the residue
    sum, or the absolute integral when no pole is enclosed.
    """
    quad = quad or default_quadrature(params)
    if not (contour.y1 < 0 and contour.x0 > params.threshold):
        raise DomainError("rectangle must sit in the lower half-plane right of threshold")
    pts, wts = contour.nodes()
    if params.beta == 0:
        vals = np.array([testfn(s) for s in pts])
        return float(abs(np.sum(wts * vals)))
    cs = np.array([_c_of_s(params, s, Location.SECOND_SHEET) for s in pts])
    den = np.array([phi(params, quad, c) for c in cs])
    num = np.array([phi(params, quad, -c) for c in cs])
    tf = np.array([testfn(s) for s in pts])
    direct = complex(np.sum(wts * num / den * tf))
    count = _winding(den)
    n = round(count)
    if abs(count - n) > 1e-3:
        raise WindingError(f"ambiguous pole count {count:.6g} inside the contour")
    if n == 0:
        return float(abs(direct))
    if n > 1:
        raise WindingError(f"{n} poles enclosed; split the contour so each piece holds at most one")
    guess = pole_hint if pole_hint is not None else complex(0.5 * (contour.x0 + contour.x1),
                                                            0.5 * (contour.y0 + contour.y1))
    pole = find_pole(params, quad, guess)
    if not contour.contains(pole.s_R):
        raise WindingError("the located pole is not the one enclosed by the contour")
    res_s = phi(params, quad, -pole.c_R) * pole.residue
    expected = 2j * math.pi * res_s * testfn(pole.s_R)
    return float(abs(direct - expected) / abs(expected))
