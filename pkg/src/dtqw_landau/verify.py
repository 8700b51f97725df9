"""Small-scale run of every invariant of the walk, spectral and propagator code."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import experiments, propagator, spectral, walk
from .spectral import LandauLabel as Label


@dataclass
class CheckResult:
    name: str
    module: str
    passed: bool
    value: float
    tolerance: float
    seconds: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status}  {self.module:<11} {self.name:<34} "
                f"value={self.value:.3e} tol={self.tolerance:.1e} ({self.seconds:.2f}s)")


CHECKS: list[tuple[str, str, float, Callable[[], float]]] = []


def check(module: str, tolerance: float):
    """Register ``fn`` as a check whose returned error must stay below ``tolerance``."""
    def deco(fn):
        CHECKS.append((module, fn.__name__, tolerance, fn))
        return fn
    return deco


def _levels(n_max):
    return [Label.ground()] + [Label(s, n) for n in range(1, n_max + 1) for s in (1, -1)]


def _random_lattice(shape, params, seed=1234):
    rng = np.random.default_rng(seed)
    L = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    R = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    norm = math.sqrt(np.sum(np.abs(L) ** 2 + np.abs(R) ** 2))
    return walk.SpinorLattice(L / norm, R / norm, params)


# walk ---------------------------------------------------------------------

@check("walk", 1e-14)
def coin_unitarity():
    worst = 0.0
    for alpha in np.linspace(-3, 3, 7):
        for theta in np.linspace(-3, 3, 7):
            for M in walk.coin_matrices(alpha, theta):
                worst = max(worst, np.max(np.abs(M.conj().T @ M - np.eye(2))))
    return worst


@check("walk", 1e-12)
def norm_conservation():
    state = _random_lattice((21, 25), walk.PhysicalParams(0.7, 0.3, 1.1))
    worst = 0.0
    for _ in range(5):
        nxt = walk.step(state)
        worst = max(worst, abs(nxt.total_probability() - state.total_probability()))
        state = nxt
    return worst


@check("walk", 1e-12)
def mode_equivalence():
    state = _random_lattice((21, 25), walk.PhysicalParams(0.7, 0.3, 1.1))
    a, b = walk.step(state, "composed"), walk.step(state, "two_half_steps")
    return float(max(np.max(np.abs(a.L - b.L)), np.max(np.abs(a.R - b.R))))


@check("walk", 0.0)
def sublattice_parity():
    state = walk.gaussian_state(0, 12, 12, walk.PhysicalParams(1.0, 0.05, 1.0))
    worst = 0.0
    p = state.p[:, None]
    q = state.q[None, :]
    for snap in walk.evolve(state, 10, range(11)):
        odd = ((p + snap.time) % 2 == 1) | ((q + snap.time) % 2 == 1)
        worst = max(worst, float(np.max(np.where(odd, snap.density(), 0.0))))
    return worst


@check("walk", 0.0)
def determinism_and_windowing():
    state = walk.gaussian_state(0, 15, 15, walk.PhysicalParams(1.0, 0.1, 1.0))
    first = walk.evolve(state, 12)[0]
    second = walk.evolve(state, 12)[0]
    full = state
    for _ in range(12):
        full = walk.step(full)
    diffs = [np.max(np.abs(first.L - second.L)), np.max(np.abs(first.L - full.L)),
             np.max(np.abs(first.R - full.R))]
    return float(max(diffs))


@check("walk", 1e-12)
def gaussian_normalization():
    params = walk.PhysicalParams(1.0)
    worst = 0.0
    for w in (0.0, 0.7, 2.0, 5.0):
        state = walk.gaussian_state(w, 20, 20, params)
        worst = max(worst, abs(state.total_probability() - 1), float(np.max(np.abs(state.R))))
    return worst


@check("walk", 1e-3)
def spread_symmetry():
    state = walk.gaussian_state(0, 41, 41, walk.PhysicalParams(1.0, 0.05, 1.0))
    worst = 0.0
    for snap in walk.evolve(state, 40, range(1, 41)):
        _, sp, sq = walk.density_and_spread(snap)
        worst = max(worst, abs(sp - sq) / sp)
    return worst


# spectral -----------------------------------------------------------------

@check("spectral", 1e-14)
def spinor_normalization():
    worst = 0.0
    for B in (1.0, -0.5, 2.0):
        for m in (0.0, 1.0):
            for lab in _levels(10):
                a, b = spectral.spin_coefficients(lab, B, m)
                worst = max(worst, abs(abs(a) ** 2 + abs(b) ** 2 - 1))
    return worst


@check("spectral", 1e-8)
def hermite_orthonormality():
    x = np.arange(-1000, 1001) * 0.01
    phis = spectral.hermite_functions(20, x)
    gram = phis @ phis.T * 0.01
    return float(np.max(np.abs(gram - np.eye(21))))


@check("spectral", 1e-8)
def eigenstate_orthonormality():
    grid = spectral.XGrid.for_levels(0.05, 10, 1.0, 0.5)
    states = [spectral.eigenstate0(lab, 0.5, 1.0, 1.0, grid) for lab in _levels(10)]
    worst = 0.0
    for i, s in enumerate(states):
        for j, t in enumerate(states):
            ip = spectral.inner((s.minus, s.plus), (t.minus, t.plus), grid.epsilon)
            worst = max(worst, abs(ip - (i == j)))
    return worst


@check("spectral", 1e-8)
def eigen_residual():
    worst = 0.0
    for B in (1.0, -0.5):
        grid = spectral.XGrid.for_levels(0.05, 11, B, 0.3)
        for lab in _levels(10):
            s = spectral.eigenstate0(lab, 0.3, B, 1.0, grid)
            hm, hp = spectral.apply_h0(s.expansion, 0.3, B, 1.0).evaluate(grid.x)
            r = spectral.inner((hm - s.energy * s.minus, hp - s.energy * s.plus),
                               (hm - s.energy * s.minus, hp - s.energy * s.plus), grid.epsilon)
            worst = max(worst, math.sqrt(abs(r)))
    return worst


@check("spectral", 1e-10)
def vanishing_energy_shift():
    worst = 0.0
    for B in (1.0, -1.0, 0.5, -0.5):
        for m in (0.0, 1.0):
            for lab in _levels(10):
                worst = max(worst, abs(spectral.matrix_element_h1(lab, lab, B, m)))
    return worst


@check("spectral", 1e-8)
def closed_form_vs_quadrature():
    worst = 0.0
    for B in (1.0, -1.0, 0.5):
        grid = spectral.XGrid.for_levels(0.05, 11, B)
        for m in (0.0, 1.0):
            for lp in _levels(10):
                for lab in _levels(10):
                    worst = max(worst, abs(spectral.matrix_element_h1(lp, lab, B, m)
                                           - spectral.matrix_element_h1_quadrature(lp, lab, B, m, grid)))
    return worst


@check("spectral", 1e-10)
def selection_rule():
    worst = 0.0
    grid = spectral.XGrid.for_levels(0.05, 11, 1.0)
    for lp in _levels(10):
        for lab in _levels(10):
            if abs(lp.n - lab.n) not in (0, 2):
                worst = max(worst, abs(spectral.matrix_element_h1_quadrature(lp, lab, 1.0, 1.0, grid)))
    return worst


@check("spectral", 1e-6)
def dense_diagonalization():
    worst = 0.0
    for B in (0.5, 1.0, 2.0):
        for m in (0.0, 1.0):
            ev = spectral.dense_landau_spectrum(B, m, 18)
            for lab in _levels(10):
                E = spectral.landau_energy0(lab, B, m)
                err = np.min(np.abs(ev - E))
                worst = max(worst, err / abs(E) if E else err)
    return worst


@check("spectral", 1e-10)
def correction_orthogonality():
    worst = 0.0
    for lab in _levels(6):
        base = spectral.hermite_coefficients(lab, 0.0, 1.0, 1.0)
        delta = spectral.first_order_correction(lab, 0.0, 1.0, 1.0)
        worst = max(worst, abs(base.inner(delta)))
    return worst


@check("spectral", 1e-10)
def matrix_element_hermiticity():
    worst = 0.0
    grid = spectral.XGrid.for_levels(0.05, 9, -0.5)
    for lp in _levels(8):
        for lab in _levels(8):
            a = spectral.matrix_element_h1_quadrature(lp, lab, -0.5, 1.0, grid)
            b = spectral.matrix_element_h1_quadrature(lab, lp, -0.5, 1.0, grid)
            worst = max(worst, abs(a - b.conjugate()))
    return worst


@check("spectral", 1e-8)
def profile_normalization():
    worst = 0.0
    grid = spectral.XGrid.for_levels(0.05, 6, 1.0)
    for lab in _levels(6):
        P = spectral.density_profile(spectral.eigenstate0(lab, 0.0, 1.0, 1.0, grid))
        worst = max(worst, abs(np.sum(P) * grid.epsilon - 1), float(np.max(np.abs(P - P[::-1]))))
    return worst


# propagator ---------------------------------------------------------------

@check("propagator", 1e-12)
def q_unitarity():
    worst = 0.0
    for B, m, K in ((0.0, 0.0, 0.0), (1.0, 1.0, 0.3), (-0.7, 0.5, -1.2)):
        Q = propagator.build_q(walk.PhysicalParams(0.2, B, m), K, spectral.XGrid(0.2, 20))
        worst = max(worst, Q.unitarity_defect())
    return worst


@check("propagator", 0.0)
def shift_exactness():
    f = np.random.default_rng(5).normal(size=17)
    back = propagator._shift(propagator._shift(f, 1, "periodic"), -1, "periodic")
    return float(np.max(np.abs(back - f)))


@check("propagator", 1e-10)
def fourier_commutation():
    params = walk.PhysicalParams(0.5, 0.3, 1.0)
    state = _random_lattice((64, 64), params, seed=99)
    after = propagator.dft_y(walk.step(state))
    worst = 0.0
    for mode, target in zip(propagator.dft_y(state), after):
        L, R = propagator.apply_q(mode.first, mode.second, params, mode.K, state.p, "periodic")
        worst = max(worst, np.max(np.abs(L - target.first)), np.max(np.abs(R - target.second)))
    return float(worst)


@check("propagator", 1e-12)
def dft_roundtrip_parseval():
    params = walk.PhysicalParams(0.5, 0.3, 1.0)
    state = _random_lattice((21, 31), params, seed=3)
    modes = propagator.dft_y(state)
    back = propagator.idft_y(modes, params)
    roundtrip = max(np.max(np.abs(back.L - state.L)), np.max(np.abs(back.R - state.R)))
    parseval = abs(sum(np.sum(np.abs(m.first) ** 2 + np.abs(m.second) ** 2) for m in modes)
                   / state.L.shape[1] - state.total_probability())
    return float(max(roundtrip, parseval))


def _hnum(eps, n_max=6):
    grid = spectral.XGrid.for_levels(eps, n_max, 1.0)
    Q = propagator.build_q(walk.PhysicalParams(eps, 1.0, 1.0), 0.0, grid, "periodic")
    return grid, Q, propagator.numerical_hamiltonian(Q)


@check("propagator", 1e-10)
def hnum_hermiticity():
    _, _, H = _hnum(0.2)
    return float(np.max(np.abs(H - H.conj().T)))


@check("propagator", 1e-12)
def eigenphase_consistency():
    _, Q, H = _hnum(0.2)
    E = np.linalg.eigvalsh(H)
    mu = np.linalg.eigvals(Q.matrix)
    # every unit-circle eigenvalue is exp(-i eps E) for some eigenvalue E of H
    predicted = np.exp(-1j * 0.2 * E)
    return float(max(np.min(np.abs(predicted - z)) for z in mu))


@check("propagator", 0.8)
def hnum_second_order_remainder():
    coarse, fine = _hnum(0.1), _hnum(0.05)
    worst = 0.0
    for lab in (Label.ground(), Label(1, 2)):
        r1 = propagator.hamiltonian_remainder(lab, walk.PhysicalParams(0.1, 1.0, 1.0),
                                              grid=coarse[0], H=coarse[2])
        r2 = propagator.hamiltonian_remainder(lab, walk.PhysicalParams(0.05, 1.0, 1.0),
                                              grid=fine[0], H=fine[2])
        worst = max(worst, abs(r1 / r2 - 4))
    return worst


@check("propagator", 1e-12)
def delta_phase_invariance():
    params = walk.PhysicalParams(0.1, 1.0, 1.0)
    worst = 0.0
    for lab in (Label.ground(), Label(1, 1), Label(-1, 3)):
        for r in (0, 1):
            d = propagator.delta_metric(lab, r, 0.2, params)
            if not d > 0:
                return math.inf
            d2 = propagator.delta_metric(lab, r, 0.2, params, phase=np.exp(0.77j))
            worst = max(worst, abs(d2 - d) / d)
    return worst


@check("propagator", 1e-10)
def field_reversal_symmetry():
    worst = 0.0
    for lab in (Label.ground(), Label(1, 2), Label(-1, 3)):
        mirrored = lab if lab.is_ground else Label(-lab.sign, lab.n)
        for r in (0, 1):
            d = propagator.delta_metric(lab, r, 0.4, walk.PhysicalParams(0.1, 1.0, 1.0))
            d2 = propagator.delta_metric(mirrored, r, -0.4, walk.PhysicalParams(0.1, -1.0, 1.0))
            worst = max(worst, abs(d - d2))
    return worst


@check("propagator", 0.15)
def delta_scaling():
    eps = [0.04, 0.08, 0.16]
    worst = 0.0
    for r, expected in ((0, 2.0), (1, 3.0)):
        d = [propagator.delta_metric(Label(1, 1), r, 0.0, walk.PhysicalParams(e, 1.0, 1.0)) for e in eps]
        worst = max(worst, abs(propagator.scaling_slope(eps, d) - expected))
    return worst


# experiments --------------------------------------------------------------

@check("cli", 0.0)
def report_reproducibility():
    a = experiments.scaling(["+:1"], [0.1, 0.2, 0.3]).to_csv()
    b = experiments.scaling(["+:1"], [0.1, 0.2, 0.3]).to_csv()
    return 0.0 if a == b else 1.0


def run_checks(names=None) -> list[CheckResult]:
    results = []
    for module, name, tol, fn in CHECKS:
        if names is not None and name not in names:
            continue
        start = time.perf_counter()
        try:
            value = float(fn())
        except Exception:  # a crashing check is a failing check
            value = math.inf
        passed = bool(value <= tol) if tol == 0 else bool(value < tol)
        results.append(CheckResult(name, module, passed, value, tol, time.perf_counter() - start))
    return results
