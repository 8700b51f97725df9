"""Fixed-wavenumber propagator, its logarithm, and the one-step eigenstate distance.

State vectors at fixed ``K`` are stored block-wise as ``[L(p_0..p_N), R(p_0..p_N)]``
in the original basis ``(bL, bR)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .spectral import (
    LandauLabel,
    XGrid,
    apply_h1,
    eigenstate0,
    first_order_state,
    hermite_coefficients,
    landau_energy0,
)
from .walk import PhysicalParams, SpinorLattice, angle_theta

__all__ = [
    "BranchAmbiguityError",
    "MixedState",
    "PropagatorMatrix",
    "apply_q",
    "build_q",
    "delta_metric",
    "dft_y",
    "hamiltonian_remainder",
    "idft_y",
    "lattice_norm",
    "numerical_hamiltonian",
    "scaling_slope",
    "to_lr",
    "to_rotated",
]

BOUNDARIES = ("periodic", "truncated")
BRANCH_GUARD = 1e-6


class BranchAmbiguityError(ArithmeticError):
    """An eigenphase of the propagator sits on the branch cut of the logarithm."""


def _sites(grid) -> np.ndarray:
    if isinstance(grid, XGrid):
        return np.arange(-grid.half_p, grid.half_p + 1)
    return np.asarray(grid, dtype=int)


def to_lr(minus, plus):
    s = 1 / math.sqrt(2.0)
    return s * (np.asarray(minus) - plus), s * (np.asarray(minus) + plus)


def to_rotated(L, R):
    s = 1 / math.sqrt(2.0)
    return s * (np.asarray(L) + R), s * (np.asarray(R) - L)


@dataclass
class MixedState:
    """One Fourier mode ``K`` of a lattice state, as a spinor function of ``X``."""

    K: float
    p: np.ndarray
    epsilon: float
    first: np.ndarray
    second: np.ndarray
    basis: str = "LR"

    def __post_init__(self):
        if self.basis not in ("LR", "pm"):
            raise ValueError(f"basis must be 'LR' or 'pm', got {self.basis!r}")

    @property
    def x(self) -> np.ndarray:
        return self.p * self.epsilon

    def in_basis(self, basis: str) -> "MixedState":
        if basis == self.basis:
            return self
        if basis == "pm":
            first, second = to_rotated(self.first, self.second)
        elif basis == "LR":
            first, second = to_lr(self.first, self.second)
        else:
            raise ValueError(f"unknown basis {basis!r}")
        return MixedState(self.K, self.p, self.epsilon, first, second, basis)

    def vector(self) -> np.ndarray:
        lr = self.in_basis("LR")
        return np.concatenate([lr.first, lr.second])


def _walk_coefficients(params: PhysicalParams, K: float, p: np.ndarray):
    """Entries of the per-site coin ``W`` with phase ``eps (B X_p + K)``."""
    eps = params.epsilon
    tp, tm = angle_theta(1, params), angle_theta(-1, params)
    cp, sp, cm, sm = math.cos(tp), math.sin(tp), math.cos(tm), math.sin(tm)
    phase = eps * (params.B * p * eps + K)
    e, ec = np.exp(1j * phase), np.exp(-1j * phase)
    w_ll = e * cm * cp - ec * sm * sp
    w_lr = 1j * (e * cm * sp + ec * sm * cp)
    w_rl = 1j * (e * sm * cp + ec * cm * sp)
    w_rr = -e * sm * sp + ec * cm * cp
    return w_ll, w_lr, w_rl, w_rr


def _shift(f, offset, boundary):
    """Return ``g(p) = f(p + offset)`` for ``offset`` in (+1, -1)."""
    if boundary == "periodic":
        return np.roll(f, -offset, axis=0)
    out = np.zeros_like(f)
    if offset == 1:
        out[:-1] = f[1:]
    else:
        out[1:] = f[:-1]
    return out


def apply_q(L, R, params: PhysicalParams, K: float, grid, boundary: str = "truncated"):
    """One exact walk step on the Fourier mode ``K``, without forming the matrix."""
    if boundary not in BOUNDARIES:
        raise ValueError(f"boundary must be one of {BOUNDARIES}")
    p = _sites(grid)
    L_in = _shift(np.asarray(L, dtype=complex), 1, boundary)
    R_in = _shift(np.asarray(R, dtype=complex), -1, boundary)
    w_ll, w_lr, w_rl, w_rr = _walk_coefficients(params, K, p)
    if np.ndim(L_in) == 2:
        w_ll, w_lr, w_rl, w_rr = (w[:, None] for w in (w_ll, w_lr, w_rl, w_rr))
    return w_ll * L_in + w_lr * R_in, w_rl * L_in + w_rr * R_in


@dataclass
class PropagatorMatrix:
    matrix: np.ndarray
    params: PhysicalParams
    K: float
    p: np.ndarray
    boundary: str

    @property
    def size(self) -> int:
        return len(self.p)

    def unitarity_defect(self) -> float:
        Q = self.matrix
        return float(np.max(np.abs(Q.conj().T @ Q - np.eye(len(Q)))))


def build_q(params: PhysicalParams, K: float, grid, boundary: str = "periodic") -> PropagatorMatrix:
    """Dense one-step propagator ``Q = W D`` on the sites of ``grid``.

    ``grid`` is an :class:`XGrid` or an array of integer site indices.
    """
    p = _sites(grid)
    n = len(p)
    eye = np.eye(n, dtype=complex)
    # columns of Q are the images of the unit vectors
    top = apply_q(eye, np.zeros_like(eye), params, K, p, boundary)
    bottom = apply_q(np.zeros_like(eye), eye, params, K, p, boundary)
    Q = np.block([[top[0], bottom[0]], [top[1], bottom[1]]])
    return PropagatorMatrix(Q, params, K, p, boundary)


def _wavenumbers(n_q: int, epsilon: float) -> np.ndarray:
    return 2 * math.pi * np.fft.fftshift(np.fft.fftfreq(n_q)) / epsilon


def dft_y(state: SpinorLattice) -> list[MixedState]:
    """Split a periodic lattice state into its Fourier modes along ``q``.

    Forward sum ``f(K) = sum_q f(q) exp(-i K Y_q)`` with no prefactor; modes are
    returned in increasing ``K``.
    """
    eps = state.params.epsilon
    n_q = state.L.shape[1]
    Ks = _wavenumbers(n_q, eps)
    modes = []
    spectra = []
    for comp in (state.L, state.R):
        # ifftshift puts q = 0 at index 0 so the FFT phases refer to Y_q = q eps
        spectra.append(np.fft.fftshift(np.fft.fft(np.fft.ifftshift(comp, axes=1), axis=1), axes=1))
    for k, K in enumerate(Ks):
        modes.append(MixedState(float(K), state.p, eps, spectra[0][:, k], spectra[1][:, k]))
    return modes


def idft_y(modes: list[MixedState], params: PhysicalParams, time: int = 0) -> SpinorLattice:
    """Inverse of :func:`dft_y` (``1/N_q`` normalization)."""
    lr = [m.in_basis("LR") for m in modes]
    L_hat = np.stack([m.first for m in lr], axis=1)
    R_hat = np.stack([m.second for m in lr], axis=1)
    L = np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(L_hat, axes=1), axis=1), axes=1)
    R = np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(R_hat, axes=1), axis=1), axes=1)
    return SpinorLattice(L, R, params, time)


def _log_unit_phases(mu: np.ndarray) -> np.ndarray:
    """Principal arguments of unit-modulus eigenvalues, in ``(-pi, pi]``."""
    return np.angle(mu)


def numerical_hamiltonian(Q: PropagatorMatrix) -> np.ndarray:
    """``H = (i/eps) log Q`` through the unitary Schur form of ``Q``.

    Raises :class:`BranchAmbiguityError` if an eigenphase lies within
    ``BRANCH_GUARD`` of ``+-pi``.
    """
    eps = Q.params.epsilon
    T, Z = scipy.linalg.schur(Q.matrix, output="complex")
    mu = np.diag(T)
    theta = np.angle(mu)
    closest = float(np.min(math.pi - np.abs(theta)))
    if closest < BRANCH_GUARD:
        raise BranchAmbiguityError(
            f"an eigenphase lies {closest:.2e} from the branch cut; reduce epsilon or change K")
    energies = -_log_unit_phases(mu) / eps
    return (Z * energies) @ Z.conj().T


def lattice_norm(first, second, epsilon: float) -> float:
    """``sqrt(sum(|first|^2 + |second|^2) * epsilon)``."""
    first, second = np.asarray(first), np.asarray(second)
    total = np.sum(first.real**2 + first.imag**2) + np.sum(second.real**2 + second.imag**2)
    return math.sqrt(float(total) * epsilon)


def _order_state(label, r, K, params, grid):
    if r == 0:
        return eigenstate0(label, K, params.B, params.m, grid)
    if r == 1:
        return first_order_state(label, K, params.B, params.m, params.epsilon, grid)
    raise ValueError(f"order must be 0 or 1, got {r!r}")


def delta_metric(label: LandauLabel, r: int, K: float, params: PhysicalParams,
                 grid: XGrid | None = None, phase: complex = 1.0) -> float:
    """Relative distance between one exact step of ``Phi_l^(r)`` and ``exp(-i E eps) Phi_l^(r)``.

    ``phase`` multiplies the input state; the result does not depend on it.
    """
    eps = params.epsilon
    if grid is None:
        grid = XGrid.for_levels(eps, label.n + 2 * r + 1, params.B, K)
    state = _order_state(label, r, K, params, grid)
    L, R = to_lr(phase * state.minus, phase * state.plus)
    stepped = apply_q(L, R, params, K, grid, "truncated")
    target_phase = np.exp(-1j * state.energy * eps)
    target = (target_phase * L, target_phase * R)
    diff = lattice_norm(stepped[0] - target[0], stepped[1] - target[1], eps)
    return diff / lattice_norm(*target, eps)


def hamiltonian_remainder(label: LandauLabel, params: PhysicalParams, K: float = 0.0,
                          grid: XGrid | None = None, H: np.ndarray | None = None) -> float:
    """``|| (H_num - H0 - eps H1) Phi0_l ||`` with the lattice norm.

    ``H_num`` comes from the periodic propagator on ``grid``; ``H0 Phi0`` and
    ``H1 Phi0`` are evaluated exactly through the oscillator expansion.
    """
    eps = params.epsilon
    if grid is None:
        grid = XGrid.for_levels(eps, label.n + 2, params.B, K)
    if H is None:
        H = numerical_hamiltonian(build_q(params, K, grid, "periodic"))
    exp = hermite_coefficients(label, K, params.B, params.m)
    grid.check_tail(exp.n_max + 2, exp.a, exp.center)
    energy = landau_energy0(label, params.B, params.m)
    phi = exp.evaluate(grid.x)
    h1 = apply_h1(exp, K, params.B, params.m).evaluate(grid.x)
    expected = [energy * f + eps * g for f, g in zip(phi, h1)]
    vec = np.concatenate(to_lr(*phi))
    predicted = np.concatenate(to_lr(*expected))
    resid = H @ vec - predicted
    n = grid.size
    return lattice_norm(resid[:n], resid[n:], eps)


def scaling_slope(epsilons, deltas) -> float:
    """Least-squares slope of ``log(delta)`` against ``log(epsilon)``."""
    x = np.asarray(epsilons, dtype=float)
    y = np.asarray(deltas, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("epsilons and deltas must be 1D sequences of equal length")
    if len(x) < 3:
        raise ValueError("need at least 3 points to fit a slope")
    if np.any(x <= 0) or np.any(y <= 0) or not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("epsilons and deltas must be finite and strictly positive")
    lx, ly = np.log(x), np.log(y)
    lx0 = lx - lx.mean()
    return float(np.dot(lx0, ly - ly.mean()) / np.dot(lx0, lx0))
