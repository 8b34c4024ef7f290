import json
import math
from pathlib import Path

import numpy as np
import pytest

from quasistable.errors import DomainError
from quasistable.specfun import (
    CylinderOrder,
    cylinder_eval,
    cylinder_table,
    hankel1,
    hankel2,
    script_h,
    script_h_parts,
)

from oracles import cylinder_ref

REF = json.loads((Path(__file__).parent / "data" / "cylinder_ref.json").read_text())


def test_frozen_reference_points():
    worst = 0.0
    for row in REF:
        z = complex(*row["z"])
        for n in (0, 1, 2):
            e = cylinder_eval(n, z)
            for kind in ("j", "n", "h1", "h2"):
                ref = complex(*row[str(n)][kind])
                worst = max(worst, abs(getattr(e, kind) - ref) / abs(ref))
    assert worst < 1e-10


@pytest.mark.parametrize("z", [0.1, 2.0, 11.9, 12.1, 30.0, -5.0, 3 - 4j, -7 + 0.5j, -2 - 9j, 0.2j])
def test_live_mpmath(z):
    for n in (0, 1, 2):
        j, y, h1, h2 = cylinder_ref(n, complex(z))
        e = cylinder_eval(n, z)
        for got, ref in ((e.j, j), (e.n, y), (e.h1, h1), (e.h2, h2)):
            assert abs(got - ref) <= 1e-10 * abs(ref)


def test_both_sides_of_regime_switch():
    for z in (12.0 - 1e-9, 12.0 + 1e-9, 12j * (1 - 1e-12), 12j * (1 + 1e-12), 8.5 - 8.5j):
        for n in (0, 1, 2):
            ref = cylinder_ref(n, complex(z))
            e = cylinder_eval(n, z)
            for got, r in zip((e.j, e.n, e.h1, e.h2), ref):
                assert abs(got - r) <= 1e-10 * abs(r)


def test_order_validation():
    with pytest.raises(DomainError):
        CylinderOrder(3)
    with pytest.raises(DomainError):
        cylinder_eval(-1, 1.0)


def test_zero_argument_rejected():
    with pytest.raises(DomainError):
        cylinder_table(np.array([1.0, 0.0]))


def test_wronskian_constant():
    # x (H1_1 H2_2 - H2_1 H1_2) is the constant +4i/pi
    x = np.array([0.4, 1.0, 5.0, 25.0, 2 - 1j, 0.5 - 3j])
    _, q = script_h_parts(x)
    assert np.allclose(x * q, 4j / math.pi, rtol=0, atol=1e-12)


def test_script_h_parts_agree():
    x = np.array([0.7, 1.3, 4.0 - 0.2j])
    y = np.array([1.1, 0.9 + 0.1j, 2.0])
    p, q = script_h_parts(x)
    assert np.allclose(script_h(1, 2, y, x), y * p + x * q, rtol=1e-14)


def test_hankel_definitions():
    z = np.array([0.5, 3.0, 1 + 1j, -2 - 0.5j])
    tab = cylinder_table(z)
    assert np.allclose(tab.h1, tab.j + 1j * tab.n, rtol=1e-12)
    assert np.allclose(tab.h2, tab.j - 1j * tab.n, rtol=1e-12)
    assert np.allclose(hankel1(1, z), tab.h1[1])
    assert np.allclose(hankel2(2, z), tab.h2[2])


def test_recessive_hankel_accuracy_below_axis():
    # H1 is exponentially small for large Im z > 0; J + iN would cancel
    z = 0.5 + 9j
    _, _, h1, _ = cylinder_ref(1, z)
    assert abs(complex(hankel1(1, z)) - h1) <= 1e-10 * abs(h1)


def test_negative_real_axis_uses_upper_side():
    z = -3.0
    j, y, h1, h2 = cylinder_ref(0, complex(z))
    e = cylinder_eval(0, z)
    assert abs(e.n - y) <= 1e-10 * abs(y)
