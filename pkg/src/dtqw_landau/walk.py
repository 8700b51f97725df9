"""Real-space evolution of the 2D magnetic quantum walk.

The walker is a two-component spinor ``(L, R)`` on a grid with periodic
boundaries. Grids built here are odd-sized and centered,
``p in [-half_p, half_p]``, ``q in [-half_q, half_q]``, and arrays are indexed
``[p + half_p, q + half_q]``. Even sizes are accepted (site indices then run
from ``-n//2`` to ``n//2 - 1``) so that power-of-two lattices can be compared
with FFT-based code.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PhysicalParams",
    "SpinorLattice",
    "WrapRiskError",
    "angle_alpha",
    "angle_theta",
    "coin_matrices",
    "density_and_spread",
    "evolve",
    "gaussian_state",
    "step",
    "trajectory",
]

STEP_MODES = ("composed", "two_half_steps")


class WrapRiskError(ValueError):
    """Raised when the light cone of an evolution would wrap around the grid."""


@dataclass(frozen=True)
class PhysicalParams:
    """Step ``epsilon`` (also the walk parameter nu), field ``B`` and mass ``m``."""

    epsilon: float
    B: float = 0.0
    m: float = 0.0

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be a positive finite number, got {self.epsilon!r}")
        if not math.isfinite(self.B):
            raise ValueError(f"B must be finite, got {self.B!r}")
        if not (self.m >= 0 and math.isfinite(self.m)):
            raise ValueError(f"m must be a nonnegative finite number, got {self.m!r}")

    @property
    def nu(self) -> float:
        return self.epsilon


@dataclass
class SpinorLattice:
    L: np.ndarray
    R: np.ndarray
    params: PhysicalParams
    time: int = field(default=0)

    def __post_init__(self):
        self.L = np.asarray(self.L, dtype=np.complex128)
        self.R = np.asarray(self.R, dtype=np.complex128)
        if self.L.ndim != 2 or self.L.shape != self.R.shape:
            raise ValueError("L and R must be 2D arrays of identical shape")
        if min(self.L.shape) < 3:
            raise ValueError(f"grid dimensions must be >= 3, got {self.L.shape}")

    @classmethod
    def zeros(cls, half_p: int, half_q: int, params: PhysicalParams) -> "SpinorLattice":
        shape = (2 * half_p + 1, 2 * half_q + 1)
        return cls(np.zeros(shape, complex), np.zeros(shape, complex), params)

    @property
    def half_p(self) -> int:
        return self.L.shape[0] // 2

    @property
    def half_q(self) -> int:
        return self.L.shape[1] // 2

    @property
    def p(self) -> np.ndarray:
        return np.arange(self.L.shape[0]) - self.half_p

    @property
    def q(self) -> np.ndarray:
        return np.arange(self.L.shape[1]) - self.half_q

    @property
    def reach(self) -> int:
        """Steps a state supported on the origin can take before it wraps."""
        return min(n - 1 - n // 2 for n in self.L.shape)

    @property
    def X(self) -> np.ndarray:
        return self.p * self.params.epsilon

    @property
    def Y(self) -> np.ndarray:
        return self.q * self.params.epsilon

    def at(self, p: int, q: int) -> tuple[complex, complex]:
        i, k = p + self.half_p, q + self.half_q
        if not (0 <= i < self.L.shape[0] and 0 <= k < self.L.shape[1]):
            raise IndexError(f"site ({p}, {q}) is outside the grid")
        return complex(self.L[i, k]), complex(self.R[i, k])

    def density(self) -> np.ndarray:
        return self.L.real**2 + self.L.imag**2 + self.R.real**2 + self.R.imag**2

    def total_probability(self) -> float:
        return float(np.sum(self.density()))

    def copy(self) -> "SpinorLattice":
        return SpinorLattice(self.L.copy(), self.R.copy(), self.params, self.time)


def coin_matrices(alpha, theta):
    """Return the two coin matrices ``(U, V)`` for angles ``alpha`` and ``theta``.

    ``U`` carries ``exp(+i alpha)`` on its upper off-diagonal entry, ``V`` has the
    off-diagonal phases exchanged.
    """
    ea, eb = np.exp(1j * alpha), np.exp(-1j * alpha)
    c, s = math.cos(theta), math.sin(theta)
    U = np.array([[ea * c, 1j * ea * s], [1j * eb * s, eb * c]])
    V = np.array([[ea * c, 1j * eb * s], [1j * ea * s, eb * c]])
    return U, V


def angle_alpha(p, params: PhysicalParams):
    return params.epsilon**2 * params.B * np.asarray(p) / 2


def angle_theta(sign: int, params: PhysicalParams) -> float:
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    return sign * math.pi / 4 - params.epsilon * params.m / 2


def _composed_angles(params: PhysicalParams) -> tuple[float, float]:
    return angle_theta(1, params), angle_theta(-1, params)


def _step_arrays(L, R, p, params, mode):
    """One periodic step on the arrays ``L, R`` whose rows carry site indices ``p``."""
    alpha = angle_alpha(p, params)[:, None]

    if mode == "composed":
        tp, tm = _composed_angles(params)
        cp, sp = math.cos(tp), math.sin(tp)
        cm, sm = math.cos(tm), math.sin(tm)
        phase = np.exp(2j * alpha)
        # psi(p +/- 1, q +/- 1) read from the input lattice
        L_pp = np.roll(L, (-1, -1), axis=(0, 1))
        R_mp = np.roll(R, (1, -1), axis=(0, 1))
        L_pm = np.roll(L, (-1, 1), axis=(0, 1))
        R_mm = np.roll(R, (1, 1), axis=(0, 1))
        up = cp * L_pp + 1j * sp * R_mp
        down = 1j * sp * L_pm + cp * R_mm
        new_L = phase * cm * up + 1j * phase.conj() * sm * down
        new_R = 1j * phase * sm * up + phase.conj() * cm * down
        return new_L, new_R
    if mode == "two_half_steps":
        U, _ = coin_matrices(alpha, angle_theta(1, params))
        _, V = coin_matrices(alpha, angle_theta(-1, params))
        # transport along p to the half-integer time, then along q
        L_in, R_in = np.roll(L, -1, axis=0), np.roll(R, 1, axis=0)
        half_L = U[0, 0] * L_in + U[0, 1] * R_in
        half_R = U[1, 0] * L_in + U[1, 1] * R_in
        L_in, R_in = np.roll(half_L, -1, axis=1), np.roll(half_R, 1, axis=1)
        return V[0, 0] * L_in + V[0, 1] * R_in, V[1, 0] * L_in + V[1, 1] * R_in
    raise ValueError(f"unknown step mode {mode!r}; expected one of {STEP_MODES}")


def step(state: SpinorLattice, mode: str = "composed") -> SpinorLattice:
    """Advance ``state`` by one full time step on the periodic grid."""
    L, R = _step_arrays(state.L, state.R, state.p, state.params, mode)
    return SpinorLattice(L, R, state.params, state.time + 1)


def _support(state: SpinorLattice):
    rows = np.flatnonzero(np.any((state.L != 0) | (state.R != 0), axis=1))
    cols = np.flatnonzero(np.any((state.L != 0) | (state.R != 0), axis=0))
    if rows.size == 0:
        return None
    return [rows[0], rows[-1] + 1, cols[0], cols[-1] + 1]


def _grow(lo, hi, size):
    # True when the grown window spans the whole axis (periodic roll is exact there).
    lo, hi = lo - 1, hi + 1
    if lo <= 0 or hi >= size:
        return 0, size
    return lo, hi


def _check_reach(state: SpinorLattice, n_steps: int, allow_wrap: bool):
    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")
    if not allow_wrap and state.reach < n_steps:
        # An amplitude moves at most one site per step in each direction,
        # so the delta state first wraps at step reach + 1.
        raise WrapRiskError(
            f"grid of shape {state.L.shape} lets the light cone wrap before "
            f"n_steps={n_steps}; enlarge the grid or pass allow_wrap=True")


def trajectory(state: SpinorLattice, n_steps: int, *, mode: str = "composed",
               allow_wrap: bool = False):
    """Yield ``(state, window)`` after each of ``n_steps`` steps.

    The yielded lattice is updated in place by the next iteration; copy it to keep
    it. Only ``window`` (a pair of slices) can hold nonzero amplitudes, and only
    that window is updated, which gives the same bits as stepping the full
    periodic grid.
    """
    _check_reach(state, n_steps, allow_wrap)
    cur = state.copy()
    box = _support(cur)
    n_p, n_q = cur.L.shape
    p_all = cur.p
    window = (slice(0, 0), slice(0, 0))
    for _ in range(n_steps):
        if box is not None:
            p0, p1 = _grow(box[0], box[1], n_p)
            q0, q1 = _grow(box[2], box[3], n_q)
            window = (slice(p0, p1), slice(q0, q1))
            L, R = _step_arrays(cur.L[window], cur.R[window], p_all[p0:p1], cur.params, mode)
            cur.L[window] = L
            cur.R[window] = R
            box = [p0, p1, q0, q1]
        cur.time += 1
        yield cur, window


def evolve(state: SpinorLattice, n_steps: int, snapshot_times=None, *,
           mode: str = "composed", allow_wrap: bool = False) -> list[SpinorLattice]:
    """Apply ``n_steps`` steps and return copies of the state at ``snapshot_times``.

    ``snapshot_times`` defaults to ``[n_steps]``; time 0 is the input itself.
    """
    if snapshot_times is None:
        snapshot_times = [n_steps]
    wanted = sorted(set(int(t) for t in snapshot_times))
    if wanted and (wanted[0] < 0 or wanted[-1] > n_steps):
        raise ValueError(f"snapshot times must lie in [0, {n_steps}]")
    _check_reach(state, n_steps, allow_wrap)
    snaps = {}
    if 0 in wanted:
        snaps[0] = state.copy()
    for cur, _ in trajectory(state, n_steps, mode=mode, allow_wrap=allow_wrap):
        if cur.time in wanted:
            snaps[cur.time] = cur.copy()
    return [snaps[t] for t in wanted]


def gaussian_state(width: float, half_p: int, half_q: int, params: PhysicalParams) -> SpinorLattice:
    """Normalized Gaussian-density state carried by the ``L`` component.

    ``width == 0`` gives the delta state at the origin.
    """
    if not width >= 0:
        raise ValueError(f"width must be >= 0, got {width!r}")
    state = SpinorLattice.zeros(half_p, half_q, params)
    if width == 0:
        state.L[half_p, half_q] = 1.0
        return state
    p = np.arange(-half_p, half_p + 1)[:, None]
    q = np.arange(-half_q, half_q + 1)[None, :]
    weight = np.exp(-(p**2 + q**2) / (2 * width**2)) / (2 * math.pi * width**2)
    density = weight / np.sum(weight)
    state.L[:] = np.sqrt(density)
    return state


def density_and_spread(state: SpinorLattice):
    """Return ``(P, sigma_p, sigma_q)`` with uncentered second-moment spreads."""
    P = state.density()
    p2 = (state.p.astype(float) ** 2)[:, None]
    q2 = (state.q.astype(float) ** 2)[None, :]
    sigma_p = math.sqrt(float(np.sum(p2 * P)))
    sigma_q = math.sqrt(float(np.sum(q2 * P)))
    return P, sigma_p, sigma_q
