"""Regenerate cylinder_ref.json from mpmath at 60 digits.

    python3 tests/data/make_cylinder_ref.py
"""
import json
from pathlib import Path
import sys

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))
from oracles import cylinder_ref  # noqa: E402

rng = np.random.default_rng(1729)
mods = np.exp(rng.uniform(np.log(0.1), np.log(100.0), 200))
# first half on the real axis (both signs), second half at random angles
angles = np.concatenate([np.where(rng.random(100) < 0.8, 0.0, np.pi), rng.uniform(-np.pi, np.pi, 100)])
points = []
for r, a in zip(mods, angles):
    z = complex(r * np.cos(a), r * np.sin(a)) if a not in (0.0, np.pi) else complex(r if a == 0 else -r, 0.0)
    row = {"z": [z.real, z.imag]}
    for n in (0, 1, 2):
        j, y, h1, h2 = cylinder_ref(n, z)
        row[str(n)] = {k: [v.real, v.imag] for k, v in zip(("j", "n", "h1", "h2"), (j, y, h1, h2))}
    points.append(row)
Path(__file__).with_name("cylinder_ref.json").write_text(json.dumps(points, indent=1) + "\n")
