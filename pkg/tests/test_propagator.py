import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dtqw_landau import propagator, spectral, walk
from dtqw_landau.propagator import BranchAmbiguityError, PropagatorMatrix
from dtqw_landau.spectral import LandauLabel as Label, XGrid
from dtqw_landau.walk import PhysicalParams


def random_lattice(shape, params, seed=0):
    rng = np.random.default_rng(seed)
    L = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    R = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    norm = math.sqrt(np.sum(np.abs(L) ** 2 + np.abs(R) ** 2))
    return walk.SpinorLattice(L / norm, R / norm, params)


def test_free_massless_q_is_pure_shift():
    n = 9
    Q = propagator.build_q(PhysicalParams(0.3), 0.0, np.arange(n) - 4).matrix
    up = np.roll(np.eye(n), 1, axis=1)   # L(p) <- L(p + 1)
    down = np.roll(np.eye(n), -1, axis=1)  # R(p) <- R(p - 1)
    assert np.allclose(Q[:n, :n], up, atol=1e-15) and np.allclose(Q[n:, n:], down, atol=1e-15)
    assert np.allclose(Q[:n, n:], 0, atol=1e-15) and np.allclose(Q[n:, :n], 0, atol=1e-15)


@settings(max_examples=20, deadline=None)
@given(eps=st.floats(0.05, 1.0), B=st.floats(-2, 2), m=st.floats(0, 2), K=st.floats(-3, 3))
def test_periodic_q_unitary(eps, B, m, K):
    Q = propagator.build_q(PhysicalParams(eps, B, m), K, XGrid(eps, 10))
    assert Q.unitarity_defect() < 1e-12


def test_truncated_q_matches_matrix_free():
    params = PhysicalParams(0.2, 1.0, 1.0)
    grid = XGrid(0.2, 15)
    Q = propagator.build_q(params, 0.7, grid, "truncated")
    rng = np.random.default_rng(2)
    L, R = rng.normal(size=(2, grid.size)) + 1j * rng.normal(size=(2, grid.size))
    out = Q.matrix @ np.concatenate([L, R])
    L2, R2 = propagator.apply_q(L, R, params, 0.7, grid)
    assert np.allclose(out, np.concatenate([L2, R2]), atol=1e-14)
    with pytest.raises(ValueError):
        propagator.apply_q(L, R, params, 0.7, grid, "open")


def test_fourier_modes_match_real_space_step():
    params = PhysicalParams(0.5, 0.3, 1.0)
    state = random_lattice((64, 64), params, seed=11)
    after = propagator.dft_y(walk.step(state))
    for mode, target in zip(propagator.dft_y(state), after):
        L, R = propagator.apply_q(mode.first, mode.second, params, mode.K, state.p, "periodic")
        assert np.max(np.abs(L - target.first)) < 1e-10 and np.max(np.abs(R - target.second)) < 1e-10


def test_dft_roundtrip_and_parseval():
    params = PhysicalParams(0.5)
    state = random_lattice((17, 24), params, seed=5)
    modes = propagator.dft_y(state)
    assert [m.K for m in modes] == sorted(m.K for m in modes)
    back = propagator.idft_y(modes, params)
    assert np.max(np.abs(back.L - state.L)) < 1e-12 and np.max(np.abs(back.R - state.R)) < 1e-12
    total = sum(np.sum(np.abs(m.first) ** 2 + np.abs(m.second) ** 2) for m in modes) / 24
    assert abs(total - 1) < 1e-12


def test_dft_of_q_delta_is_flat():
    state = walk.gaussian_state(0, 4, 6, PhysicalParams(1.0))
    amps = [abs(m.first[4]) for m in propagator.dft_y(state)]
    assert np.allclose(amps, 1.0, atol=1e-15)


def test_mixed_state_basis_roundtrip():
    rng = np.random.default_rng(0)
    L, R = rng.normal(size=(2, 5)) + 0j
    mode = propagator.MixedState(0.0, np.arange(5), 0.1, L, R)
    back = mode.in_basis("pm").in_basis("LR")
    assert np.allclose(back.first, L) and np.allclose(back.second, R)
    assert np.allclose(mode.in_basis("pm").vector(), mode.vector())
    with pytest.raises(ValueError):
        propagator.MixedState(0.0, np.arange(5), 0.1, L, R, "xy")


def test_identity_log_is_zero():
    Q = PropagatorMatrix(np.eye(6, dtype=complex), PhysicalParams(0.1), 0.0, np.arange(3), "periodic")
    assert np.max(np.abs(propagator.numerical_hamiltonian(Q))) == 0


def test_branch_guard():
    Q = PropagatorMatrix(np.diag([1, -1]).astype(complex), PhysicalParams(0.1), 0.0, np.arange(1),
                         "periodic")
    with pytest.raises(BranchAmbiguityError):
        propagator.numerical_hamiltonian(Q)


def test_hnum_eigenphases():
    params = PhysicalParams(0.25, 1.0, 1.0)
    Q = propagator.build_q(params, 0.0, XGrid.for_levels(0.25, 3, 1.0))
    H = propagator.numerical_hamiltonian(Q)
    assert np.max(np.abs(H - H.conj().T)) < 1e-10
    mu = np.linalg.eigvals(Q.matrix)
    predicted = np.exp(-1j * 0.25 * np.linalg.eigvalsh(H))
    assert max(np.min(np.abs(predicted - z)) for z in mu) < 1e-12


def _remainder_ratio(label):
    out = []
    for eps in (0.1, 0.05):
        params = PhysicalParams(eps, 1.0, 1.0)
        out.append(propagator.hamiltonian_remainder(label, params, grid=XGrid.for_levels(eps, 6, 1.0)))
    return out[0] / out[1]


def test_second_order_remainder():
    assert abs(_remainder_ratio(Label(1, 1)) - 4) < 0.8


def test_wrong_branch_mutation_is_caught(monkeypatch):
    # phases taken in [0, 2pi) keep H Hermitian but break the small-epsilon expansion
    monkeypatch.setattr(propagator, "_log_unit_phases", lambda mu: np.mod(np.angle(mu), 2 * np.pi))
    assert abs(_remainder_ratio(Label(1, 1)) - 4) > 0.8


def test_lattice_norm_example():
    assert propagator.lattice_norm(np.ones(5), np.zeros(5), 0.5) == pytest.approx(math.sqrt(2.5), abs=1e-15)


def test_delta_metric_matches_dense_reference():
    params = PhysicalParams(0.1, 1.0, 1.0)
    label = Label.ground()
    grid = XGrid.for_levels(0.1, 1, 1.0)
    state = spectral.eigenstate0(label, 0.0, 1.0, 1.0, grid)
    vec = np.concatenate(state.to_lr())
    Q = propagator.build_q(params, 0.0, grid, "truncated").matrix
    target = np.exp(1j * 0.1) * vec  # E = -1
    ref = np.linalg.norm(Q @ vec - target) / np.linalg.norm(target)
    assert propagator.delta_metric(label, 0, 0.0, params) == pytest.approx(ref, rel=1e-10)


def test_delta_metric_halving():
    d = {}
    for eps in (0.1, 0.05):
        params = PhysicalParams(eps, 1.0, 1.0)
        d[eps] = [propagator.delta_metric(Label(1, 2), r, 0.0, params) for r in (0, 1)]
    assert 3.6 < d[0.1][0] / d[0.05][0] < 4.4
    assert 7.0 < d[0.1][1] / d[0.05][1] < 9.0
    with pytest.raises(ValueError):
        propagator.delta_metric(Label(1, 2), 2, 0.0, PhysicalParams(0.1, 1.0, 1.0))


@given(c=st.floats(1e-3, 1e3), power=st.sampled_from([2.0, 3.0]))
def test_scaling_slope_power_laws(c, power):
    eps = np.array([0.02, 0.04, 0.08, 0.16, 0.32])
    assert abs(propagator.scaling_slope(eps, c * eps**power) - power) < 1e-12


@pytest.mark.parametrize("eps,deltas", [([0.1, 0.2], [1, 2]), ([0.1, 0.2, 0.3], [1, 0, 2]),
                                        ([0.1, -0.2, 0.3], [1, 2, 3]), ([0.1, 0.2, 0.3], [1, 2])])
def test_scaling_slope_rejects_degenerate_input(eps, deltas):
    with pytest.raises(ValueError):
        propagator.scaling_slope(eps, deltas)
