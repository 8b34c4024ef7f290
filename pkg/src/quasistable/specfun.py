"""Cylinder functions J, N, H1, H2 of order 0, 1, 2 at complex argument.

Two regimes are used.  For ``|z| <= Z_SWITCH`` the ascending series are
summed directly for every order.  Beyond it the Hankel asymptotic expansion
is truncated at its smallest term, with the reflection ``z -> -z`` applied
in the left half-plane.  Inside the series disc the exponentially small
(recessive) Hankel function is recomputed from its integral representation
whenever cancellation in ``J +/- iN`` would cost more than the target.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .errors import AccuracyError, DomainError

Z_SWITCH = 12.0
TARGET_RTOL = 1e-10
ORDERS = (0, 1, 2)

_EPS = np.finfo(float).eps
_SERIES_TERMS = 60
_ASYM_TERMS = 60
_EULER_GAMMA = 0.57721566490153286061


@dataclass(frozen=True)
class CylinderOrder:
    """Order of a cylinder function; only 0, 1 and 2 exist here."""

    value: int

    def __post_init__(self) -> None:
        if self.value not in ORDERS:
            raise DomainError(f"cylinder order must be 0, 1 or 2, got {self.value!r}")

    def __int__(self) -> int:
        return self.value


@dataclass(frozen=True)
class CylinderEval:
    j: complex
    n: complex
    h1: complex
    h2: complex
    argument: complex
    order: CylinderOrder


@dataclass(frozen=True)
class CylinderTable:
    """Vectorised values; each array has shape ``(3,) + z.shape``, indexed by order."""

    j: np.ndarray
    n: np.ndarray
    h1: np.ndarray
    h2: np.ndarray


def _as_order(order) -> int:
    if isinstance(order, CylinderOrder):
        return order.value
    return CylinderOrder(int(order)).value


def _canon(z) -> np.ndarray:
    # a negative zero imaginary part would put the log on the wrong side of its cut
    z = np.asarray(z, dtype=complex)
    return np.where(z.imag == 0.0, z.real + 0j, z)


def _series(z: np.ndarray):
    """Ascending series for J_n, Y_n (n = 0, 1, 2); returns values and error bounds."""
    half = z / 2.0
    q = half * half
    t = -q
    shape = (3,) + z.shape
    sj = np.zeros(shape, complex)
    sy = np.zeros(shape, complex)
    aj = np.zeros(shape)
    ay = np.zeros(shape)
    for n in ORDERS:
        term = np.full(z.shape, 1.0 / math.factorial(n), complex)
        hk, hnk = 0.0, sum(1.0 / j for j in range(1, n + 1))
        for k in range(_SERIES_TERMS):
            if k > 0:
                term = term * t / (k * (n + k))
                hk += 1.0 / k
                hnk += 1.0 / (n + k)
            psi = -2.0 * _EULER_GAMMA + hk + hnk
            sj[n] += term
            sy[n] += psi * term
            aj[n] += np.abs(term)
            ay[n] += abs(psi) * np.abs(term)
    log_half = np.log(half)
    j = np.empty(shape, complex)
    y = np.empty(shape, complex)
    err = np.empty(shape)
    for n in ORDERS:
        hn = half**n
        j[n] = hn * sj[n]
        finite = np.zeros(z.shape, complex)
        afin = np.zeros(z.shape)
        for k in range(n):
            c = math.factorial(n - k - 1) / math.factorial(k) * q**k
            finite += c
            afin += np.abs(c)
        y[n] = (-finite / hn - hn * sy[n]) / np.pi + 2.0 / np.pi * log_half * j[n]
        ahn = np.abs(hn)
        err[n] = _EPS * (afin / ahn + 2 * np.abs(log_half) * ahn * aj[n] + ahn * ay[n]) / np.pi
        err[n] += _EPS * ahn * aj[n]
    return j, y, err


def _asymptotic_right(z: np.ndarray):
    """Hankel expansion for Re z >= 0; returns H1, H2 and truncation estimates."""
    shape = (3,) + z.shape
    h1 = np.empty(shape, complex)
    h2 = np.empty(shape, complex)
    err = np.zeros(shape)
    pref = np.sqrt(2.0 / (np.pi * z))
    inv = 1.0 / z
    for n in ORDERS:
        mu = 4.0 * n * n
        s1 = np.ones(z.shape, complex)
        s2 = np.ones(z.shape, complex)
        ak = 1.0
        powz = np.ones(z.shape, complex)
        last = np.ones(z.shape)
        active = np.ones(z.shape, bool)
        tail = np.zeros(z.shape)
        for k in range(1, _ASYM_TERMS):
            ak *= (mu - (2 * k - 1) ** 2) / (8.0 * k)
            powz = powz * inv
            base = ak * powz
            mag = np.abs(base)
            grow = active & (mag > last)
            tail = np.where(grow, last, tail)
            active &= ~grow
            if ak == 0.0:
                break
            s1 = np.where(active, s1 + (1j) ** k * base, s1)
            s2 = np.where(active, s2 + (-1j) ** k * base, s2)
            last = np.where(active, mag, last)
        tail = np.where(active, last, tail)
        omega = z - n * np.pi / 2 - np.pi / 4
        h1[n] = pref * np.exp(1j * omega) * s1
        h2[n] = pref * np.exp(-1j * omega) * s2
        err[n] = tail + 4 * _EPS
    return h1, h2, err


def _recessive_integral(zk: complex) -> np.ndarray:
    """Recessive Hankel function (H1 if Im z > 0, H2 if Im z < 0), orders 0-2.

    Trapezoid rule for the cosh integral representation, exponentially
    accurate because the integrand is analytic in a strip.
    """
    upper = zk.imag > 0
    y = abs(zk.imag)
    theta = abs(math.atan2(zk.imag, zk.real))
    d = min(theta, math.pi - theta)
    h = math.pi * d / 45.0
    tmax = 1.0
    while y * math.cosh(tmax) - 2.0 * tmax < 45.0:
        tmax += 0.25
    t = np.arange(0.0, tmax + h, h)
    w = np.full(t.shape, 2.0 * h)
    w[0] = h
    sign = 1j if upper else -1j
    ex = np.exp(sign * zk * np.cosh(t))
    out = np.empty(3, complex)
    for n in ORDERS:
        integral = np.sum(w * ex * np.cosh(n * t))
        if upper:
            out[n] = np.exp(-0.5j * n * np.pi) / (np.pi * 1j) * integral
        else:
            out[n] = -np.exp(0.5j * n * np.pi) / (np.pi * 1j) * integral
    return out


def _right_half(w: np.ndarray):
    """J, N, H1, H2 for Re w >= 0."""
    shape = (3,) + w.shape
    j = np.empty(shape, complex)
    nn = np.empty(shape, complex)
    h1 = np.empty(shape, complex)
    h2 = np.empty(shape, complex)

    small = np.abs(w) <= Z_SWITCH
    if np.any(small):
        ws = w[small]
        js, ys, err = _series(ws)
        env = np.maximum(np.abs(js + 1j * ys), np.abs(js - 1j * ys))
        if np.any(err > TARGET_RTOL * env):
            raise AccuracyError("ascending series cannot certify the accuracy target")
        a1 = js + 1j * ys
        a2 = js - 1j * ys
        for pos, wk in enumerate(ws):
            if abs(wk.imag) > 0.5 and abs(wk) + abs(wk.imag) > 10.0:
                rec = _recessive_integral(complex(wk))
                if wk.imag > 0:
                    a1[:, pos] = rec
                else:
                    a2[:, pos] = rec
        j[:, small] = js
        nn[:, small] = ys
        h1[:, small] = a1
        h2[:, small] = a2

    large = ~small
    if np.any(large):
        a1, a2, err = _asymptotic_right(w[large])
        if np.any(err > TARGET_RTOL):
            raise AccuracyError("Hankel expansion cannot certify the accuracy target")
        h1[:, large] = a1
        h2[:, large] = a2
        j[:, large] = 0.5 * (a1 + a2)
        nn[:, large] = (a1 - a2) / 2j
    return j, nn, h1, h2


def cylinder_table(z) -> CylinderTable:
    """All four kinds for orders 0, 1, 2 at every element of ``z``."""
    z = _canon(z)
    if np.any(z == 0):
        raise DomainError("cylinder functions N, H1, H2 diverge at z = 0")
    flat = z.ravel()
    left = flat.real < 0
    w = np.where(left, -flat, flat)
    j, nn, h1, h2 = _right_half(w)
    if np.any(left):
        # z = w exp(i m pi), m = +1 on and above the negative axis, -1 below
        up = flat.imag >= 0
        sgn = np.array([1.0, -1.0, 1.0])[:, None]
        m = np.where(up, 1.0, -1.0)
        jl = sgn * j
        nl = sgn * (nn + 2j * m * j)
        r1 = np.where(up, -sgn * h2, sgn * (2 * h1 + h2))
        r2 = np.where(up, sgn * (h1 + 2 * h2), -sgn * h1)
        j = np.where(left, jl, j)
        nn = np.where(left, nl, nn)
        h1, h2 = np.where(left, r1, h1), np.where(left, r2, h2)
    shape = (3,) + z.shape
    return CylinderTable(j=j.reshape(shape), n=nn.reshape(shape), h1=h1.reshape(shape), h2=h2.reshape(shape))


def cylinder_eval(order, z: complex) -> CylinderEval:
    """J, N, H1, H2 of the given order at a single complex point."""
    o = _as_order(order)
    tab = cylinder_table(np.asarray([z]))
    return CylinderEval(
        j=complex(tab.j[o, 0]),
        n=complex(tab.n[o, 0]),
        h1=complex(tab.h1[o, 0]),
        h2=complex(tab.h2[o, 0]),
        argument=complex(z),
        order=CylinderOrder(o),
    )


def hankel1(order, z) -> np.ndarray:
    return cylinder_table(z).h1[_as_order(order)]


def hankel2(order, z) -> np.ndarray:
    return cylinder_table(z).h2[_as_order(order)]


def script_h(mu, nu, y, x):
    """y*(H1_mu H2_nu + H2_mu H1_nu)(x) + x*(H1_mu H2_nu - H2_mu H1_nu)(x).

    The Hankel functions all take the argument ``x``; ``y`` enters linearly.
    """
    m, n = _as_order(mu), _as_order(nu)
    tab = cylinder_table(x)
    x = _canon(x)
    a = tab.h1[m] * tab.h2[n]
    b = tab.h2[m] * tab.h1[n]
    out = np.asarray(y) * (a + b) + x * (a - b)
    return out[()] if np.ndim(out) == 0 else out


def script_h_parts(x):
    """Return ``(P, Q)`` with script_h(1, 2, y, x) = y*P + x*Q, vectorised in x."""
    tab = cylinder_table(x)
    a = tab.h1[1] * tab.h2[2]
    b = tab.h2[1] * tab.h1[2]
    return a + b, a - b
