"""
The causal semigroup acting on wavefunctions
============================================

Elements (Lambda, a) with a in the forward cone compose into elements of the
same kind.  Inverses leave the set, and Gamow phases never grow.
"""

import numpy as np

from quasistable.cli import composition_error, random_causal
from quasistable.kinematics import FourVector, VelocityVector
from quasistable.resonance import GamowState
from quasistable.semigroup import PoincareElement, compose, gamow_transform, in_causal_semigroup

rng = np.random.default_rng(0)
g1, g2 = random_causal(rng), random_causal(rng)
print("g2 g1 causal:", in_causal_semigroup(compose(g2, g1)))

shift = PoincareElement(a=FourVector(1.0, 0.0, 0.0, 0.0))
print("time shift causal:", in_causal_semigroup(shift), " inverse causal:", in_causal_semigroup(shift.inverse()))

# %%
# Acting twice with interpolation in between agrees with acting once with
# the product.

print(f"composition error on the demo grid: {composition_error():.2e}")

st = GamowState((1 - 0.05j) ** 2, VelocityVector(0.2, -0.1, 0.3))
phases = [abs(gamow_transform(st, random_causal(rng))[1]) for _ in range(10)]
print("Gamow phase moduli:", " ".join(f"{v:.4f}" for v in phases))
