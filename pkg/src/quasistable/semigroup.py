"""Causal Poincare semigroup: membership, composition and its action on
sampled wavefunctions and on Gamow data.

An element is (Lambda, a) with Lambda proper orthochronous and a a
translation; the semigroup keeps only a in the closed forward cone.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
import math

import numpy as np
from scipy.interpolate import NdBSpline, make_interp_spline
from scipy.spatial.transform import Rotation

from .errors import CausalityError, CoverageError, DomainError
from .kinematics import METRIC, FourVector, VelocityVector, boost_matrix, decompose, lorentz_inverse, rotation_matrix
from .resonance import GamowState

CONE_TOL = 1e-12
_LORENTZ_TOL = 1e-12


@dataclass(frozen=True)
class PoincareElement:
    """Lambda = boost(rapidity) @ rotation(rotvec), followed by translation a."""

    rapidity: tuple[float, float, float] = (0.0, 0.0, 0.0)
    rotvec: tuple[float, float, float] = (0.0, 0.0, 0.0)
    a: FourVector = FourVector(0.0, 0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "rapidity", tuple(float(v) for v in np.reshape(self.rapidity, 3)))
        object.__setattr__(self, "rotvec", tuple(float(v) for v in np.reshape(self.rotvec, 3)))
        lam = self.lorentz
        if not np.allclose(lam.T @ METRIC @ lam, METRIC, rtol=0, atol=_LORENTZ_TOL * max(1.0, lam[0, 0] ** 2)):
            raise DomainError("Lambda does not preserve the metric")

    @property
    def lorentz(self) -> np.ndarray:
        return boost_matrix(self.rapidity) @ rotation_matrix(self.rotvec)

    @classmethod
    def from_matrix(cls, lam: np.ndarray, a: FourVector) -> "PoincareElement":
        lam = np.asarray(lam, dtype=float)
        if lam[0, 0] < 1.0 - 1e-12 or np.linalg.det(lam) < 0:
            raise DomainError("Lambda must be proper and orthochronous")
        eta, r3 = decompose(lam)
        return cls(tuple(eta), tuple(Rotation.from_matrix(r3).as_rotvec()), a)

    @classmethod
    def translation(cls, a) -> "PoincareElement":
        return cls(a=a if isinstance(a, FourVector) else FourVector.from_array(a))

    def inverse(self) -> "PoincareElement":
        """Group inverse (Lambda^-1, -Lambda^-1 a); leaves the semigroup unless a = 0."""
        inv = lorentz_inverse(self.lorentz)
        return PoincareElement.from_matrix(inv, FourVector.from_array(-inv @ self.a.as_array()))


def identity() -> PoincareElement:
    return PoincareElement()


def in_causal_semigroup(g: PoincareElement) -> bool:
    """a0 >= 0 and a.a >= 0, with a relative tolerance on the light cone."""
    a = g.a
    scale = a.p0 * a.p0 + a.p1 * a.p1 + a.p2 * a.p2 + a.p3 * a.p3
    return a.p0 >= 0 and a.invariant_square() >= -CONE_TOL * scale


def compose(g2: PoincareElement, g1: PoincareElement) -> PoincareElement:
    """(Lambda2 Lambda1, a2 + Lambda2 a1)."""
    l2 = g2.lorentz
    a = g2.a.as_array() + l2 @ g1.a.as_array()
    return PoincareElement.from_matrix(l2 @ g1.lorentz, FourVector.from_array(a))


@dataclass(frozen=True)
class WaveGrid:
    """psi(q, s) sampled on a tensor grid q1 x q2 x q3 x s."""

    q1: np.ndarray
    q2: np.ndarray
    q3: np.ndarray
    s: np.ndarray
    psi: np.ndarray
    branch: str = "-"
    threshold: float = 0.0

    def __post_init__(self) -> None:
        for name in ("q1", "q2", "q3", "s"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.ndim != 1 or v.size < 1 or np.any(np.diff(v) <= 0):
                raise DomainError(f"axis {name} must be strictly increasing")
            object.__setattr__(self, name, v)
        psi = np.asarray(self.psi, dtype=complex)
        shape = (self.q1.size, self.q2.size, self.q3.size, self.s.size)
        if psi.shape != shape:
            raise DomainError(f"psi has shape {psi.shape}, expected {shape}")
        object.__setattr__(self, "psi", psi)
        if self.branch not in ("+", "-"):
            raise DomainError("branch must be '+' or '-'")
        if np.any(self.s < self.threshold):
            raise DomainError("square-mass nodes must lie at or above threshold")

    @classmethod
    def from_function(cls, f, q1, q2, q3, s, branch: str = "-", threshold: float = 0.0) -> "WaveGrid":
        g1, g2, g3, gs = np.meshgrid(q1, q2, q3, s, indexing="ij")
        return cls(q1, q2, q3, s, f(g1, g2, g3, gs), branch, threshold)


def _axis_interp(axes, values: np.ndarray):
    """Tensor-product cubic interpolant (direct per-axis solves).

    A singleton axis is only ever hit exactly and is dropped; axes with fewer
    than four nodes fall back to the highest order they support.
    """
    keep = [i for i, ax in enumerate(axes) if ax.size > 1]
    squeeze = tuple(0 if axes[i].size == 1 else slice(None) for i in range(3))
    v = values[squeeze]
    knots = []
    for pos, i in enumerate(keep):
        k = min(3, axes[i].size - 1)
        spl = make_interp_spline(axes[i], v, k=k, axis=pos)
        v = np.moveaxis(spl.c, 0, pos)
        knots.append(spl.t)
    degrees = tuple(min(3, axes[i].size - 1) for i in keep)
    re = NdBSpline(tuple(knots), v.real, degrees)
    im = NdBSpline(tuple(knots), v.imag, degrees)
    return keep, lambda pts: re(pts[:, keep]) + 1j * im(pts[:, keep])


def act(wg: WaveGrid, g: PoincareElement, branch: str | None = None, targets=None) -> WaveGrid:
    """psi'(q, s) = exp(-+ i sqrt(s) q.a) psi(Lambda^-1 q, s).

    ``targets`` optionally gives the output velocity axes (q1, q2, q3); by
    default the input axes are reused.  The s axis is never remapped.
    """
    if not in_causal_semigroup(g):
        raise CausalityError("g is not in the causal semigroup")
    branch = branch or wg.branch
    if branch not in ("+", "-"):
        raise DomainError("branch must be '+' or '-'")
    t1, t2, t3 = (wg.q1, wg.q2, wg.q3) if targets is None else (np.asarray(t, float) for t in targets)
    g1, g2, g3 = np.meshgrid(t1, t2, t3, indexing="ij")
    sp = np.stack([g1.ravel(), g2.ravel(), g3.ravel()], axis=-1)
    q0 = np.sqrt(1.0 + np.sum(sp * sp, axis=-1))
    four = np.column_stack([q0, sp])
    pre = four @ lorentz_inverse(g.lorentz).T
    src = pre[:, 1:]
    axes = (wg.q1, wg.q2, wg.q3)
    tol = 1e-12
    for k, ax in enumerate(axes):
        lo, hi = ax[0], ax[-1]
        span = max(hi - lo, 1.0)
        if np.any(src[:, k] < lo - tol * span) or np.any(src[:, k] > hi + tol * span):
            raise CoverageError(f"Lambda^-1 q leaves the grid along axis q{k + 1}")
        src[:, k] = np.clip(src[:, k], lo, hi)
    keep, interp = _axis_interp(axes, wg.psi)
    vals = interp(src)
    adot = four[:, 0] * g.a.p0 - four[:, 1:] @ g.a.as_array()[1:]
    sign = -1.0 if branch == "-" else 1.0
    phase = np.exp(sign * 1j * np.outer(adot, np.sqrt(wg.s)))
    out = (phase * vals).reshape(t1.size, t2.size, t3.size, wg.s.size)
    return WaveGrid(t1, t2, t3, wg.s, out, branch, wg.threshold)


def gamow_transform(state: GamowState, g: PoincareElement) -> tuple[GamowState, complex]:
    """Boost q to Lambda q and return the phase exp(-i sqrt(s_R) (Lambda q).a)."""
    if not in_causal_semigroup(g):
        raise CausalityError("g is not in the causal semigroup")
    q = g.lorentz @ state.q.four().as_array()
    new = GamowState(state.s_R, VelocityVector.from_four(q))
    adot = q[0] * g.a.p0 - float(np.dot(q[1:], g.a.as_array()[1:]))
    phase = cmath.exp(-1j * cmath.sqrt(state.s_R) * adot)
    if abs(phase) > 1.0 + 1e-12:
        raise DomainError("Gamow phase grew under a causal element")
    return new, phase
