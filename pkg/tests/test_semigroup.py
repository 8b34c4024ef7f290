import cmath
import math

import numpy as np
import pytest

from quasistable.cli import composition_error, random_causal
from quasistable.errors import CausalityError, CoverageError, DomainError
from quasistable.kinematics import FourVector, VelocityVector, boost_matrix
from quasistable.resonance import GamowState
from quasistable.semigroup import (
    PoincareElement,
    WaveGrid,
    act,
    compose,
    gamow_transform,
    identity,
    in_causal_semigroup,
)

ST = GamowState((1 - 0.05j) ** 2, VelocityVector(0, 0, 0))


def _grid(n=41):
    ax = np.linspace(-1.0, 1.0, n)
    f = lambda a, b, c, s: np.exp(-(a * a + b * b + c * c)) / (s + 1j)
    return WaveGrid.from_function(f, ax, ax, ax, np.array([0.5, 1.5]), "-", 0.25)


@pytest.mark.parametrize("a,inside", [
    ((1, 0, 0, 0), True), ((1, 1, 0, 0), True), ((0, 0, 0, 0), True),
    ((1, 1.01, 0, 0), False), ((-1, 0, 0, 0), False), ((0, 0, 1, 0), False),
])
def test_membership_examples(a, inside):
    assert in_causal_semigroup(PoincareElement.translation(a)) is inside


def test_compose_identity_and_closure():
    rng = np.random.default_rng(1)
    g = random_causal(rng)
    for h in (compose(identity(), g), compose(g, identity())):
        assert np.allclose(h.lorentz, g.lorentz, atol=1e-12)
        assert np.allclose(h.a.as_array(), g.a.as_array(), atol=1e-12)
    bad = sum(not in_causal_semigroup(compose(random_causal(rng), random_causal(rng))) for _ in range(1000))
    assert bad == 0


def test_inverse_leaves_semigroup():
    g = PoincareElement(a=FourVector(1.0, 0.0, 0.0, 0.0))
    inv = g.inverse()
    assert in_causal_semigroup(g) and not in_causal_semigroup(inv)
    e = compose(inv, g)
    assert np.allclose(e.lorentz, np.eye(4), atol=1e-12) and np.allclose(e.a.as_array(), 0, atol=1e-12)


def test_element_validation():
    with pytest.raises(DomainError):
        PoincareElement.from_matrix(np.diag([-1.0, 1.0, 1.0, 1.0]), FourVector(0, 0, 0, 0))
    with pytest.raises(DomainError):
        PoincareElement.from_matrix(np.diag([1.0, -1.0, 1.0, 1.0]), FourVector(0, 0, 0, 0))


def test_act_identity_and_translation():
    wg = _grid()
    same = act(wg, identity())
    assert np.allclose(same.psi, wg.psi, rtol=0, atol=1e-15)
    t = 2.0
    moved = act(wg, PoincareElement.translation((t, 0, 0, 0)))
    g1, g2, g3 = np.meshgrid(wg.q1, wg.q2, wg.q3, indexing="ij")
    q0 = np.sqrt(1 + g1**2 + g2**2 + g3**2)[..., None]
    assert np.allclose(moved.psi, np.exp(-1j * np.sqrt(wg.s) * q0 * t) * wg.psi, atol=1e-14)
    assert np.allclose(np.abs(moved.psi), np.abs(wg.psi), atol=1e-15)
    plus = act(wg, PoincareElement.translation((t, 0, 0, 0)), branch="+")
    assert np.allclose(plus.psi, np.conj(np.exp(-1j * np.sqrt(wg.s) * q0 * t)) * wg.psi, atol=1e-14)
    assert np.array_equal(moved.s, wg.s)


def test_boost_matches_analytic():
    wg = _grid(81)
    g = PoincareElement((0.0, 0.0, 0.05))
    out = act(wg, g, targets=(wg.q1[10:-10], wg.q2[10:-10], wg.q3[10:-10]))
    g1, g2, g3 = np.meshgrid(out.q1, out.q2, out.q3, indexing="ij")
    four = np.stack([np.sqrt(1 + g1**2 + g2**2 + g3**2), g1, g2, g3], axis=-1)
    src = four @ np.linalg.inv(boost_matrix((0, 0, 0.05))).T
    ref = np.exp(-np.sum(src[..., 1:] ** 2, axis=-1))[..., None] / (wg.s + 1j)
    assert np.max(np.abs(out.psi - ref)) < 1e-6


def test_composition_law():
    assert composition_error() < 1e-9


def test_guards():
    wg = _grid(11)
    with pytest.raises(CausalityError):
        act(wg, PoincareElement.translation((-1, 0, 0, 0)))
    with pytest.raises(CoverageError):
        act(wg, PoincareElement((2.0, 0.0, 0.0)))
    with pytest.raises(DomainError):
        act(wg, identity(), branch="x")
    with pytest.raises(DomainError):
        WaveGrid(wg.q1, wg.q2, wg.q3, np.array([0.1]), wg.psi[..., :1], "-", 0.25)
    with pytest.raises(CausalityError):
        gamow_transform(ST, PoincareElement.translation((0, 1, 0, 0)))


def test_gamow_pure_boost_and_rest_decay():
    new, phase = gamow_transform(ST, PoincareElement((0.3, 0.0, 0.0)))
    assert phase == 1
    assert new.q.four().p0 == pytest.approx(math.cosh(0.3), rel=1e-14)
    _, phase = gamow_transform(ST, PoincareElement.translation((10.0, 0, 0, 0)))
    assert abs(phase) ** 2 == pytest.approx(math.exp(-1.0), rel=1e-14)
    moving = GamowState(ST.s_R, VelocityVector(math.sqrt(3.0), 0, 0))
    _, phase = gamow_transform(moving, PoincareElement.translation((10.0, 0, 0, 0)))
    assert abs(phase) ** 2 == pytest.approx(math.exp(-2.0), rel=1e-13)
    # phase uses q.a with the boosted velocity
    _, phase = gamow_transform(moving, PoincareElement.translation((2.0, 1.0, 0, 0)))
    assert phase == pytest.approx(cmath.exp(-1j * (1 - 0.05j) * (2.0 * 2.0 - math.sqrt(3.0))), rel=1e-14)


def test_gamow_modulus_bounded():
    rng = np.random.default_rng(2)
    st = GamowState(ST.s_R, VelocityVector(0.2, -0.1, 0.3))
    assert max(abs(gamow_transform(st, random_causal(rng))[1]) for _ in range(100)) <= 1.0
