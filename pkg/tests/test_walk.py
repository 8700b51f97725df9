import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dtqw_landau import walk
from dtqw_landau.walk import PhysicalParams, SpinorLattice, WrapRiskError


def random_lattice(shape, params, seed=0):
    rng = np.random.default_rng(seed)
    L = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    R = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    norm = math.sqrt(np.sum(np.abs(L) ** 2 + np.abs(R) ** 2))
    return SpinorLattice(L / norm, R / norm, params)


def test_coin_matrices_examples():
    U, V = walk.coin_matrices(0, 0)
    assert np.allclose(U, np.eye(2)) and np.allclose(V, np.eye(2))
    U, V = walk.coin_matrices(math.pi / 2, 0)
    assert np.allclose(U, np.diag([1j, -1j])) and np.allclose(V, U)
    U, V = walk.coin_matrices(0, math.pi / 4)
    expected = np.array([[1, 1j], [1j, 1]]) / math.sqrt(2)
    assert np.allclose(U, expected, atol=1e-15) and np.allclose(V, expected, atol=1e-15)


def test_angle_examples():
    assert walk.angle_alpha(0, PhysicalParams(0.3, 2.0, 1.0)) == 0
    assert walk.angle_alpha(3, PhysicalParams(0.1, 1.0)) == pytest.approx(0.015, abs=1e-15)
    assert walk.angle_alpha(10, PhysicalParams(1.0, 0.05)) == pytest.approx(0.25, abs=1e-15)
    assert walk.angle_theta(1, PhysicalParams(0.2, m=1.0)) == pytest.approx(0.6853982, abs=1e-7)
    assert walk.angle_theta(-1, PhysicalParams(0.2, m=1.0)) == pytest.approx(-0.8853982, abs=1e-7)
    assert walk.angle_theta(1, PhysicalParams(0.1)) == math.pi / 4
    with pytest.raises(ValueError):
        walk.angle_theta(0, PhysicalParams(0.1))


@pytest.mark.parametrize("kwargs", [dict(epsilon=0), dict(epsilon=-1), dict(epsilon=1, m=-1),
                                    dict(epsilon=1, B=math.inf), dict(epsilon=math.nan)])
def test_params_validation(kwargs):
    with pytest.raises(ValueError):
        PhysicalParams(**kwargs)


@pytest.mark.parametrize("mode", walk.STEP_MODES)
def test_hand_step_of_delta_state(mode):
    state = walk.gaussian_state(0, 3, 3, PhysicalParams(1.0))
    out = walk.step(state, mode)
    expected_L = {(-1, -1): 0.5, (-1, 1): 0.5}
    expected_R = {(-1, -1): -0.5j, (-1, 1): 0.5j}
    for p in out.p:
        for q in out.q:
            L, R = out.at(p, q)
            assert L == pytest.approx(expected_L.get((p, q), 0), abs=1e-15)
            assert R == pytest.approx(expected_R.get((p, q), 0), abs=1e-15)
    _, sp, sq = walk.density_and_spread(out)
    assert sp == pytest.approx(1, abs=1e-14) and sq == pytest.approx(1, abs=1e-14)


def test_modes_agree_on_random_state():
    state = random_lattice((33, 29), PhysicalParams(0.4, 0.7, 1.3), seed=7)
    a, b = walk.step(state, "composed"), walk.step(state, "two_half_steps")
    assert np.max(np.abs(a.L - b.L)) < 1e-12 and np.max(np.abs(a.R - b.R)) < 1e-12


def test_unknown_mode():
    with pytest.raises(ValueError):
        walk.step(random_lattice((5, 5), PhysicalParams(1.0)), "bogus")


@settings(max_examples=25, deadline=None)
@given(eps=st.floats(0.05, 2.0), B=st.floats(-1.0, 1.0), m=st.floats(0.0, 3.0),
       seed=st.integers(0, 2**16), mode=st.sampled_from(walk.STEP_MODES))
def test_step_conserves_norm(eps, B, m, seed, mode):
    state = random_lattice((9, 12), PhysicalParams(eps, B, m), seed)
    assert abs(walk.step(state, mode).total_probability() - 1) < 1e-12


@settings(max_examples=50, deadline=None)
@given(alpha=st.floats(-10, 10), theta=st.floats(-10, 10))
def test_coins_are_unitary(alpha, theta):
    for M in walk.coin_matrices(alpha, theta):
        assert np.max(np.abs(M.conj().T @ M - np.eye(2))) < 1e-14


def test_composed_angle_mutation_is_caught(monkeypatch):
    # swapping the two rotation angles breaks agreement with the half-step path
    monkeypatch.setattr(walk, "_composed_angles",
                        lambda params: (walk.angle_theta(-1, params), walk.angle_theta(1, params)))
    state = random_lattice((11, 11), PhysicalParams(0.5, 0.2, 1.0), seed=3)
    a, b = walk.step(state, "composed"), walk.step(state, "two_half_steps")
    assert np.max(np.abs(a.L - b.L)) > 1e-3


def test_evolve_zero_steps_returns_input():
    state = random_lattice((7, 7), PhysicalParams(1.0, 0.1, 1.0))
    (snap,) = walk.evolve(state, 0, [0])
    assert np.array_equal(snap.L, state.L) and snap.time == 0


def test_evolve_snapshots_match_repeated_steps():
    state = walk.gaussian_state(0, 12, 12, PhysicalParams(1.0, 0.05, 1.0))
    snaps = walk.evolve(state, 10, [3, 10])
    ref = state
    for _ in range(3):
        ref = walk.step(ref)
    assert snaps[0].time == 3 and np.array_equal(snaps[0].L, ref.L)
    for _ in range(7):
        ref = walk.step(ref)
    assert np.array_equal(snaps[1].R, ref.R)


def test_wrap_guard():
    state = walk.gaussian_state(0, 5, 5, PhysicalParams(1.0))
    walk.evolve(state, 5)
    with pytest.raises(WrapRiskError):
        walk.evolve(state, 6)
    walk.evolve(state, 6, allow_wrap=True)


def test_delta_state_norm_after_500_steps():
    state = walk.gaussian_state(0, 501, 501, PhysicalParams(1.0, 0.0, 1.0))
    (final,) = walk.evolve(state, 500)
    assert abs(final.total_probability() - 1) < 1e-10


def test_gaussian_state():
    state = walk.gaussian_state(2, 20, 20, PhysicalParams(1.0))
    assert abs(state.total_probability() - 1) < 1e-12
    assert np.all(state.R == 0)
    delta = walk.gaussian_state(0, 4, 4, PhysicalParams(1.0))
    assert delta.at(0, 0) == (1, 0) and delta.total_probability() == 1
    P, sp, sq = walk.density_and_spread(delta)
    assert sp == sq == 0 and P.sum() == 1
    with pytest.raises(ValueError):
        walk.gaussian_state(-1, 4, 4, PhysicalParams(1.0))


def test_lattice_accessors():
    state = SpinorLattice.zeros(2, 3, PhysicalParams(0.5))
    assert state.L.shape == (5, 7)
    assert list(state.p) == [-2, -1, 0, 1, 2]
    assert np.allclose(state.Y, np.arange(-3, 4) * 0.5)
    with pytest.raises(IndexError):
        state.at(3, 0)
    with pytest.raises(ValueError):
        SpinorLattice(np.zeros((2, 5)), np.zeros((2, 5)), PhysicalParams(1.0))
