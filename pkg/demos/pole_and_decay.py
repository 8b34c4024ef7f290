"""
Where the resonance pole sits
=============================

The Green's function G(s) = 1/(s - M^2 - Pi(s)) is continued through the
two-particle cut.  A decaying state needs a zero of s - M^2 - Pi on the
second sheet below the real axis.  We look for it at the default
parameters and at tau = 3.
"""

import math

import numpy as np

from quasistable.kinematics import VelocityVector
from quasistable.model import Location, ModelParams, default_quadrature
from quasistable.resonance import (
    GamowState,
    find_pole,
    gamow_amplitude,
    weak_pole,
    width_convention_gap,
)

for tau in (1.0, 3.0):
    p = ModelParams(tau=tau)
    q = default_quadrature(p)
    w = weak_pole(p, q)
    pole = find_pole(p, q, complex(w.real, min(w.imag, 0.0)))
    print(f"tau = {tau}")
    print(f"  weak-coupling estimate  {w:.6f}")
    print(f"  exact zero              {pole.s_R:.6f}  ({pole.sheet} sheet)")
    print(f"  M_R = {pole.M_R:.6f}  Gamma_R = {pole.Gamma_R:.6f}  gap = {width_convention_gap(pole):.3g}")

# At tau = 1 the search leaves the second sheet: the only nearby zero is on
# the first sheet above the axis.  The mirror continuation finds the zero
# of the lower-rim function instead.
p = ModelParams()
mirror = find_pole(p, default_quadrature(p), 1.0 + 0.02j, continuation=Location.SECOND_SHEET_MIRROR)
print(f"mirror continuation at tau = 1: {mirror.s_R:.6f}")

# %%
# Survival at tau = 3: |<psi|exp(-iHt)|psi>|^2 of the Gamow vector is a pure
# exponential, and moving the state to q0 = 2 doubles the decay rate.

p3 = ModelParams(tau=3.0)
pole = find_pole(p3, default_quadrature(p3), weak_pole(p3))
t = np.linspace(0.0, 3.0 * pole.lifetime, 7)
for q0 in (1.0, 2.0):
    st = GamowState(pole.s_R, VelocityVector(math.sqrt(q0 * q0 - 1.0), 0, 0))
    surv = [abs(gamow_amplitude(st, x)) ** 2 for x in t]
    print(f"q0 = {q0}: " + " ".join(f"{v:.4f}" for v in surv))
