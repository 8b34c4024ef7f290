"""Invariant integrals over the forward hyperboloid x.x = tau**2, x0 > 0.

Closed forms in terms of Hankel functions, plus quadrature oracles that do
not use any Hankel function and can therefore check them.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, DomainError
from .kinematics import FourVector
from .specfun import hankel1, hankel2


def _check_tau(tau: float) -> None:
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau!r}")


def _kind(p: FourVector) -> str:
    cls = p.classification()
    if cls in ("zero", "null"):
        raise DomainError(f"p is {cls}: only the distributional limit exists there")
    if cls == "timelike-backward":
        raise DomainError("timelike-backward p is not supported")
    return cls


def pauli_jordan_I(p: FourVector, tau: float) -> complex:
    """I(p, tau) = integral of 2 d^4x delta(x^2 - tau^2) theta(x0) exp(-i p.x)."""
    _check_tau(tau)
    kind = _kind(p)
    s = p.invariant_square()
    if kind == "timelike-forward":
        rs = math.sqrt(s)
        return complex(1j * 2 * math.pi**2 * tau / rs * hankel2(1, rs * tau))
    rs = math.sqrt(-s)
    return complex(2 * math.pi**2 * tau / rs * hankel1(1, 1j * rs * tau))


def vector_I(p: FourVector, tau: float) -> np.ndarray:
    """Vector integral with x^mu inserted; returns the four complex components."""
    _check_tau(tau)
    kind = _kind(p)
    s = p.invariant_square()
    if s == 0.0:
        raise DomainError("vector_I is singular at s = 0")
    if kind == "timelike-forward":
        scalar = hankel2(2, math.sqrt(s) * tau)
    else:
        scalar = hankel1(2, 1j * math.sqrt(-s) * tau)
    return 2 * math.pi**2 * tau**2 / s * complex(scalar) * p.as_array()


def integrated_D(m1: float, m2: float, sign: int, tau: float, negative_m1: bool = False) -> complex:
    """Velocity integral of D(+-m1 q' +- m2 q, tau) in closed form.

    ``sign`` is the sign in front of m2 and picks H2 (+1) or H1 (-1) for the
    order-2 factor.  ``negative_m1`` selects the -m1 q' variant, which swaps
    H2_1(m1 tau) for -H1_1(m1 tau).
    """
    if not (m1 > 0 and m2 > 0):
        raise DomainError("masses must be positive")
    _check_tau(tau)
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    return _integrated_D(m1, m2, sign, tau, negative_m1)


def _integrated_D(m1, m2, sign, tau, negative_m1):
    # complex masses are allowed here; the damped oracle needs them
    first = -hankel1(1, m1 * tau) if negative_m1 else hankel2(1, m1 * tau)
    second = hankel2(2, m2 * tau) if sign == 1 else hankel1(2, m2 * tau)
    return complex(1j * 2 * math.pi**4 * tau / (m1 * m2) * first * second)


def _tail_cut(decay: float, tol: float) -> float:
    # e^{-decay cosh P} / (decay sinh P) bounds the tail beyond P
    p = 0.5
    while math.exp(-decay * math.cosh(p)) / (decay * math.sinh(p)) > tol:
        p += 0.05
    return p


def _quad_complex(f, a: float, b: float, tol: float, limit: int) -> tuple[complex, float]:
    re, ere = integrate.quad(lambda t: f(t).real, a, b, epsabs=tol, epsrel=0.0, limit=limit)
    im, eim = integrate.quad(lambda t: f(t).imag, a, b, epsabs=tol, epsrel=0.0, limit=limit)
    return complex(re, im), ere + eim


def oracle_cosh_integral(z: complex, tol: float = 1e-11, limit: int = 2000) -> complex:
    """Quadrature value of the integral of exp(-i z cosh phi) over the real line.

    Requires Im z < 0 so the integrand decays double exponentially.
    """
    z = complex(z)
    if not z.imag < 0:
        raise DomainError("oracle_cosh_integral needs Im z < 0")
    cut = _tail_cut(-z.imag, tol / 4)
    val, err = _quad_complex(lambda t: np.exp(-1j * z * math.cosh(t)), 0.0, cut, tol / 4, limit)
    if err > tol:
        raise ConvergenceError(f"quadrature error estimate {err:.3g} exceeds {tol:.3g}")
    return 2 * val


def oracle_velocity_integral(m1: complex, tau: float, sign: int = 1, tol: float = 1e-11) -> complex:
    """Integral of d^3q'/(2 q'0) exp(-+ i m1 q'.x) with x on the hyperboloid.

    In the rest frame of x this is 2 pi times the integral of
    sinh(phi)^2 exp(-+ i m1 tau cosh phi); damping needs -+Im m1 > 0.
    """
    m1 = complex(m1)
    decay = -sign * m1.imag * tau
    if not decay > 0:
        raise DomainError("the velocity integral needs a damping imaginary part")
    cut = _tail_cut(decay, tol / 16) + 1.0
    f = lambda t: math.sinh(t) ** 2 * np.exp(-sign * 1j * m1 * tau * math.cosh(t))
    val, err = _quad_complex(f, 0.0, cut, tol / 4, 2000)
    if err > tol:
        raise ConvergenceError(f"quadrature error estimate {err:.3g} exceeds {tol:.3g}")
    return 2 * math.pi * val


def oracle_integrated_D(m1: complex, m2: complex, sign: int, tau: float, negative_m1: bool = False,
                        tol: float = 1e-9) -> complex:
    """Two-factor quadrature for integrated_D at damped (complex) masses.

    The q' integral and the m2 derivative of the x integral are computed
    separately; both are one-dimensional in the rest frame of q.
    """
    m2 = complex(m2)
    inner = oracle_velocity_integral(m1, tau, sign=-1 if negative_m1 else 1, tol=tol)
    decay = sign * m2.imag * tau
    if not -decay > 0:
        raise DomainError("the outer integral needs a damping imaginary part on m2")
    cut = _tail_cut(-decay, tol / 16) + 1.0
    # d/dm2 of 4 pi tau^2 * int sinh^2 exp(-+ i m2 tau cosh)
    f = lambda t: (-sign * 1j * tau * math.cosh(t)) * math.sinh(t) ** 2 * np.exp(-sign * 1j * m2 * tau * math.cosh(t))
    val, err = _quad_complex(f, 0.0, cut, tol / 4, 2000)
    if err > tol:
        raise ConvergenceError(f"quadrature error estimate {err:.3g} exceeds {tol:.3g}")
    outer = 4 * math.pi * tau**2 * val
    return sign * 1j * outer * inner


def cancellation_residual(q: FourVector, qp: FourVector, m: float, tau: float) -> float:
    """Relative size of P (P.I(P)) - p (p.I(P)) - (P.P) I(P) with P = m(q+q'), p = m(q-q')."""
    big = (q + qp) * m
    small = (q - qp) * m
    vec = vector_I(big, tau)
    ba = big.as_array()
    sa = small.as_array()
    dot_b = ba[0] * vec[0] - np.dot(ba[1:], vec[1:])
    dot_s = sa[0] * vec[0] - np.dot(sa[1:], vec[1:])
    combo = ba * dot_b - sa * dot_s - big.invariant_square() * vec
    scale = np.max(np.abs(ba * dot_b)) + np.max(np.abs(big.invariant_square() * vec))
    return float(np.max(np.abs(combo)) / scale)
