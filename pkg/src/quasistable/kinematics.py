"""Minkowski four-vectors, four-velocities and proper orthochronous Lorentz maps.

Metric signature is (+, -, -, -).
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy.spatial.transform import Rotation

METRIC = np.diag([1.0, -1.0, -1.0, -1.0])
_NULL_RTOL = 1e-14


def mdot(a, b):
    """Minkowski product of (..., 4) arrays."""
    a = np.asarray(a)
    b = np.asarray(b)
    return a[..., 0] * b[..., 0] - np.sum(a[..., 1:] * b[..., 1:], axis=-1)


@dataclass(frozen=True)
class FourVector:
    p0: float
    p1: float
    p2: float
    p3: float

    @classmethod
    def from_array(cls, a) -> "FourVector":
        a = np.asarray(a, dtype=float).reshape(4)
        return cls(*(float(v) for v in a))

    def as_array(self) -> np.ndarray:
        return np.array([self.p0, self.p1, self.p2, self.p3])

    def invariant_square(self) -> float:
        return self.p0 * self.p0 - (self.p1 * self.p1 + self.p2 * self.p2 + self.p3 * self.p3)

    def dot(self, other: "FourVector") -> float:
        return self.p0 * other.p0 - (self.p1 * other.p1 + self.p2 * other.p2 + self.p3 * other.p3)

    def classification(self) -> str:
        """One of 'zero', 'null', 'timelike-forward', 'timelike-backward', 'spacelike'."""
        scale = self.p0 * self.p0 + self.p1 * self.p1 + self.p2 * self.p2 + self.p3 * self.p3
        if scale == 0.0:
            return "zero"
        s = self.invariant_square()
        if abs(s) <= _NULL_RTOL * scale:
            return "null"
        if s > 0:
            return "timelike-forward" if self.p0 > 0 else "timelike-backward"
        return "spacelike"

    def __add__(self, other: "FourVector") -> "FourVector":
        return FourVector.from_array(self.as_array() + other.as_array())

    def __sub__(self, other: "FourVector") -> "FourVector":
        return FourVector.from_array(self.as_array() - other.as_array())

    def __mul__(self, c: float) -> "FourVector":
        return FourVector.from_array(c * self.as_array())

    __rmul__ = __mul__


@dataclass(frozen=True)
class VelocityVector:
    """Four-velocity given by its spatial part; q0 follows from q.q = 1."""

    q1: float
    q2: float
    q3: float

    @property
    def spatial(self) -> np.ndarray:
        return np.array([self.q1, self.q2, self.q3])

    @property
    def q0(self) -> float:
        return math.sqrt(1.0 + self.q1 * self.q1 + self.q2 * self.q2 + self.q3 * self.q3)

    def four(self) -> FourVector:
        return FourVector(self.q0, self.q1, self.q2, self.q3)

    @classmethod
    def from_four(cls, q) -> "VelocityVector":
        # re-projection: only the spatial part is kept, q0 is rebuilt
        q = np.asarray(q, dtype=float)
        return cls(float(q[1]), float(q[2]), float(q[3]))


def boost_matrix(rapidity) -> np.ndarray:
    """Pure boost with rapidity vector eta (direction = boost axis)."""
    eta = np.asarray(rapidity, dtype=float).reshape(3)
    r = float(np.linalg.norm(eta))
    out = np.eye(4)
    if r == 0.0:
        return out
    n = eta / r
    ch, sh = math.cosh(r), math.sinh(r)
    out[0, 0] = ch
    out[0, 1:] = sh * n
    out[1:, 0] = sh * n
    out[1:, 1:] += (ch - 1.0) * np.outer(n, n)
    return out


def rotation_matrix(rotvec) -> np.ndarray:
    out = np.eye(4)
    out[1:, 1:] = Rotation.from_rotvec(np.asarray(rotvec, dtype=float).reshape(3)).as_matrix()
    return out


def decompose(lam: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a proper orthochronous Lorentz matrix as boost @ rotation.

    Returns the boost rapidity vector and the 3x3 rotation matrix.
    """
    lam = np.asarray(lam, dtype=float)
    g = lam[0, 0]
    v = lam[1:, 0] / g
    speed = float(np.linalg.norm(v))
    eta = np.zeros(3) if speed == 0.0 else math.atanh(min(speed, 1.0 - 1e-300)) * v / speed
    b = boost_matrix(eta)
    r = METRIC @ b.T @ METRIC @ lam
    return eta, r[1:, 1:]


def lorentz_inverse(lam: np.ndarray) -> np.ndarray:
    return METRIC @ np.asarray(lam).T @ METRIC
