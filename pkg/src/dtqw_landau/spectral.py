"""Relativistic Landau levels at fixed wavenumber and their first-order lattice corrections.

Spinors are expressed in the rotated basis ``(b-, b+)`` with
``b- = (bL + bR)/sqrt(2)`` and ``b+ = (-bL + bR)/sqrt(2)``. All wavefunctions
are built from normalized oscillator functions of length ``a = 1/sqrt|B|``
centered at the guiding center ``chi = -K/B``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "HermiteSpinor",
    "LandauEigenstate",
    "LandauLabel",
    "TailError",
    "XGrid",
    "ZeroFieldError",
    "apply_h0",
    "apply_h1",
    "dense_h0_matrix",
    "dense_landau_spectrum",
    "density_profile",
    "eigenstate0",
    "first_order_correction",
    "first_order_state",
    "guiding_center",
    "hermite_coefficients",
    "hermite_dphi",
    "hermite_functions",
    "hermite_phi",
    "inner",
    "landau_energy0",
    "matrix_element_h1",
    "matrix_element_h1_quadrature",
    "perturbation_terms",
    "spin_coefficients",
]

TAIL_TOL = 1e-12


class ZeroFieldError(ValueError):
    """Raised when a quantity that needs ``B != 0`` is requested at zero field."""


class TailError(ValueError):
    """Raised when a basis function does not decay at the edges of its grid."""


def _require_field(B):
    if B == 0:
        raise ZeroFieldError("this quantity is undefined at zero magnetic field")


def _sgn(B) -> int:
    return 1 if B > 0 else -1


@dataclass(frozen=True, order=True)
class LandauLabel:
    """Level label: ``sign == 0, n == 0`` is the ground state, otherwise ``(sign, n)``."""

    sign: int
    n: int

    def __post_init__(self):
        if self.sign == 0:
            if self.n != 0:
                raise ValueError("the ground state has n == 0")
        elif self.sign not in (1, -1) or self.n < 1:
            raise ValueError(f"excited labels need sign in (+1, -1) and n >= 1, got ({self.sign}, {self.n})")

    @classmethod
    def ground(cls) -> "LandauLabel":
        return cls(0, 0)

    @classmethod
    def excited(cls, sign: int, n: int) -> "LandauLabel":
        return cls(sign, n)

    @classmethod
    def parse(cls, text: str) -> "LandauLabel":
        """Parse ``ground``, ``0``, ``+:3`` or ``-:2``."""
        text = text.strip()
        if text in ("ground", "0"):
            return cls.ground()
        try:
            s, n = text.split(":")
            sign = {"+": 1, "-": -1}[s.strip()]
            return cls(sign, int(n))
        except (ValueError, KeyError):
            raise ValueError(f"cannot parse level label {text!r}; use 'ground', '+:n' or '-:n'") from None

    @property
    def is_ground(self) -> bool:
        return self.sign == 0

    def __str__(self):
        if self.is_ground:
            return "ground"
        return f"{'+' if self.sign > 0 else '-'}:{self.n}"


@dataclass(frozen=True)
class XGrid:
    """Centered 1D sampling ``X_p = p * epsilon`` for ``|p| <= half_p``."""

    epsilon: float
    half_p: int

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.half_p < 1:
            raise ValueError("half_p must be >= 1")

    @property
    def x(self) -> np.ndarray:
        return np.arange(-self.half_p, self.half_p + 1) * self.epsilon

    @property
    def size(self) -> int:
        return 2 * self.half_p + 1

    @property
    def half_width(self) -> float:
        return self.half_p * self.epsilon

    def tail(self, n_max: int, a: float, center: float = 0.0) -> float:
        """Largest edge amplitude of the oscillator functions ``0..n_max``."""
        edges = np.array([-self.half_width, self.half_width]) - center
        return float(np.max(np.abs(hermite_functions(n_max, edges, a))))

    def check_tail(self, n_max: int, a: float, center: float = 0.0):
        t = self.tail(n_max, a, center)
        if not t < TAIL_TOL:
            raise TailError(
                f"oscillator functions up to n={n_max} reach {t:.3g} at the grid edge "
                f"(half-width {self.half_width:g}, center {center:g}); widen the grid")

    @classmethod
    def for_levels(cls, epsilon: float, n_max: int, B: float, K: float = 0.0) -> "XGrid":
        """Smallest centered grid on which functions up to ``n_max`` obey the tail bound."""
        _require_field(B)
        a = 1 / math.sqrt(abs(B))
        center = guiding_center(K, B)
        width = max(6.0, 3 * math.sqrt(2 * n_max + 1)) * a + abs(center)
        half_p = max(1, math.ceil(width / epsilon - 1e-9))
        grid = cls(epsilon, half_p)
        while grid.tail(n_max, a, center) >= TAIL_TOL:
            half_p = math.ceil(half_p * 1.1) + 1
            grid = cls(epsilon, half_p)
        return grid


def hermite_functions(n_max: int, x, a: float = 1.0) -> np.ndarray:
    """Normalized oscillator functions ``phi_0..phi_n_max`` at ``x``, shape ``(n_max+1,) + x.shape``.

    Uses the three-term recurrence on normalized functions, which stays finite
    for large ``n`` where factorial-based formulas overflow.
    """
    if not a > 0:
        raise ValueError("a must be positive")
    u = np.asarray(x, dtype=float) / a
    out = np.empty((n_max + 1,) + u.shape)
    out[0] = math.pi**-0.25 * np.exp(-u**2 / 2)
    if n_max >= 1:
        out[1] = math.sqrt(2.0) * u * out[0]
    for n in range(2, n_max + 1):
        out[n] = math.sqrt(2.0 / n) * u * out[n - 1] - math.sqrt((n - 1) / n) * out[n - 2]
    return out / math.sqrt(a)


def hermite_phi(n: int, x, a: float = 1.0):
    if n < 0:
        raise ValueError("n must be >= 0")
    return hermite_functions(n, x, a)[n]


def hermite_dphi(n: int, x, a: float = 1.0):
    """Exact derivative ``(sqrt(n) phi_{n-1} - sqrt(n+1) phi_{n+1}) / (a sqrt 2)``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    phis = hermite_functions(n + 1, x, a)
    lower = math.sqrt(n) * phis[n - 1] if n > 0 else 0.0
    return (lower - math.sqrt(n + 1) * phis[n + 1]) / (a * math.sqrt(2.0))


def guiding_center(K: float, B: float) -> float:
    _require_field(B)
    return -K / B


def landau_energy0(label: LandauLabel, B: float, m: float) -> float:
    _require_field(B)
    if label.is_ground:
        return -_sgn(B) * m
    return label.sign * math.sqrt(m * m + 2 * abs(B) * label.n)


def spin_coefficients(label: LandauLabel, B: float, m: float) -> tuple[complex, complex]:
    """Spinor weights ``(alpha, beta)`` of the lower and upper oscillator functions."""
    _require_field(B)
    if label.is_ground:
        return 0j, 1.0 + 0j
    shifted = landau_energy0(label, B, m) - _sgn(B) * m
    ladder = 2 * abs(B) * label.n
    norm = math.sqrt(shifted**2 + ladder)
    return -1j * math.sqrt(ladder) / norm, complex(shifted / norm)


@dataclass
class HermiteSpinor:
    """Spinor whose ``b-`` and ``b+`` components are finite oscillator expansions.

    ``minus[k]`` and ``plus[k]`` multiply ``phi_k(X - center)`` with length ``a``.
    Derivatives and multiplication by ``X - center`` act exactly on the coefficients.
    """

    minus: np.ndarray
    plus: np.ndarray
    a: float
    center: float = 0.0

    def __post_init__(self):
        size = max(len(self.minus), len(self.plus))
        self.minus = _pad(np.asarray(self.minus, dtype=complex), size)
        self.plus = _pad(np.asarray(self.plus, dtype=complex), size)

    @property
    def n_max(self) -> int:
        return len(self.minus) - 1

    def evaluate(self, x) -> tuple[np.ndarray, np.ndarray]:
        phis = hermite_functions(self.n_max, np.asarray(x, dtype=float) - self.center, self.a)
        return self.minus @ phis, self.plus @ phis

    def map(self, op) -> "HermiteSpinor":
        return HermiteSpinor(op(self.minus), op(self.plus), self.a, self.center)

    def derivative(self) -> "HermiteSpinor":
        return self.map(lambda c: _coef_derivative(c, self.a))

    def times_offset(self) -> "HermiteSpinor":
        return self.map(lambda c: _coef_times_x(c, self.a))

    def __add__(self, other):
        size = max(len(self.minus), len(other.minus))
        return HermiteSpinor(_pad(self.minus, size) + _pad(other.minus, size),
                             _pad(self.plus, size) + _pad(other.plus, size), self.a, self.center)

    def __mul__(self, factor):
        return HermiteSpinor(factor * self.minus, factor * self.plus, self.a, self.center)

    __rmul__ = __mul__

    def inner(self, other: "HermiteSpinor") -> complex:
        size = max(len(self.minus), len(other.minus))
        return complex(np.vdot(_pad(self.minus, size), _pad(other.minus, size))
                       + np.vdot(_pad(self.plus, size), _pad(other.plus, size)))

    def norm(self) -> float:
        return math.sqrt(self.inner(self).real)


def _pad(c, size):
    if len(c) >= size:
        return c
    return np.concatenate([c, np.zeros(size - len(c), dtype=c.dtype)])


def _coef_derivative(c, a):
    k = np.arange(len(c) + 1)
    c = _pad(c, len(c) + 1)
    out = np.zeros_like(c)
    out[:-1] += np.sqrt(k[1:]) * c[1:]
    out[1:] -= np.sqrt(k[1:]) * c[:-1]
    return out / (a * math.sqrt(2.0))


def _coef_times_x(c, a):
    k = np.arange(len(c) + 1)
    c = _pad(c, len(c) + 1)
    out = np.zeros_like(c)
    out[:-1] += np.sqrt(k[1:]) * c[1:]
    out[1:] += np.sqrt(k[1:]) * c[:-1]
    return out * a / math.sqrt(2.0)


def hermite_coefficients(label: LandauLabel, K: float, B: float, m: float) -> HermiteSpinor:
    """Exact oscillator expansion of the order-0 eigenstate ``label``."""
    alpha, beta = spin_coefficients(label, B, m)
    n = label.n
    lower = np.zeros(n + 1, dtype=complex)
    upper = np.zeros(n + 1, dtype=complex)
    if n > 0:
        lower[n - 1] = alpha
    upper[n] = beta
    # B < 0 swaps which rotated-basis component carries the higher function.
    minus, plus = (lower, upper) if B > 0 else (upper, lower)
    return HermiteSpinor(minus, plus, 1 / math.sqrt(abs(B)), guiding_center(K, B))


@dataclass
class LandauEigenstate:
    """Order-0 or order-1 Landau eigenstate sampled on an :class:`XGrid`."""

    label: LandauLabel
    K: float
    B: float
    m: float
    energy: float
    alpha: complex
    beta: complex
    order: int
    grid: XGrid
    minus: np.ndarray
    plus: np.ndarray
    expansion: HermiteSpinor
    epsilon: float | None = None

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def to_lr(self) -> tuple[np.ndarray, np.ndarray]:
        """Components in the original basis ``(bL, bR)``."""
        s = 1 / math.sqrt(2.0)
        return s * (self.minus - self.plus), s * (self.minus + self.plus)


def eigenstate0(label: LandauLabel, K: float, B: float, m: float, grid: XGrid | None = None,
                epsilon: float = 0.05) -> LandauEigenstate:
    """Sampled order-0 eigenstate; a grid satisfying the tail bound is built if none is given."""
    _require_field(B)
    if grid is None:
        grid = XGrid.for_levels(epsilon, label.n, B, K)
    exp = hermite_coefficients(label, K, B, m)
    grid.check_tail(exp.n_max, exp.a, exp.center)
    minus, plus = exp.evaluate(grid.x)
    alpha, beta = spin_coefficients(label, B, m)
    return LandauEigenstate(label, K, B, m, landau_energy0(label, B, m), alpha, beta, 0,
                            grid, minus, plus, exp)


def apply_h0(state, K: float, B: float, m: float, grid: XGrid | None = None,
             derivative: str = "hermite"):
    """Apply the zeroth-order Hamiltonian.

    ``state`` is a :class:`HermiteSpinor` (``derivative="hermite"``, exact) or a
    pair of sample arrays on ``grid`` differentiated with ``"spectral"`` or
    ``"central"`` differences.
    """
    chi = guiding_center(K, B)
    if derivative == "hermite":
        if not isinstance(state, HermiteSpinor):
            raise TypeError("derivative='hermite' needs a HermiteSpinor")
        # (X - chi) is the expansion's own offset only when centers agree.
        _check_center(state, chi)
        d, xi = state.derivative(), state.times_offset()
        minus = m * _pad(state.minus, len(d.minus)) - 1j * (d.plus + B * xi.plus)
        plus = 1j * (-d.minus + B * xi.minus) - m * _pad(state.plus, len(d.plus))
        return HermiteSpinor(minus, plus, state.a, state.center)
    fm, fp = (np.asarray(c, dtype=complex) for c in state)
    xi = grid.x - chi
    dm, dp = _sample_derivative(fm, grid, derivative), _sample_derivative(fp, grid, derivative)
    return m * fm - 1j * (dp + B * xi * fp), 1j * (-dm + B * xi * fm) - m * fp


def apply_h1(state, K: float, B: float, m: float, grid: XGrid | None = None,
             derivative: str = "hermite"):
    """Apply the first-order-in-epsilon Hamiltonian correction (same modes as :func:`apply_h0`)."""
    chi = guiding_center(K, B)
    if derivative == "hermite":
        if not isinstance(state, HermiteSpinor):
            raise TypeError("derivative='hermite' needs a HermiteSpinor")
        _check_center(state, chi)
        d = state.derivative()
        xd = d.times_offset()
        size = len(xd.minus)
        half_m, half_p = 0.5 * _pad(state.minus, size), 0.5 * _pad(state.plus, size)
        minus = 1j * B * (half_m + xd.minus) - m * _pad(d.plus, size)
        plus = m * _pad(d.minus, size) - 1j * B * (half_p + xd.plus)
        return HermiteSpinor(minus, plus, state.a, state.center)
    fm, fp = (np.asarray(c, dtype=complex) for c in state)
    xi = grid.x - chi
    dm, dp = _sample_derivative(fm, grid, derivative), _sample_derivative(fp, grid, derivative)
    return (1j * B * (0.5 * fm + xi * dm) - m * dp,
            m * dm - 1j * B * (0.5 * fp + xi * dp))


def _check_center(state: HermiteSpinor, chi: float):
    if not math.isclose(state.center, chi, rel_tol=0, abs_tol=1e-12):
        raise ValueError(f"expansion centered at {state.center} but the Hamiltonian's guiding center is {chi}")


def _sample_derivative(f, grid: XGrid, method: str):
    h = grid.epsilon
    if method == "spectral":
        k = 2 * math.pi * np.fft.fftfreq(len(f), d=h)
        return np.fft.ifft(1j * k * np.fft.fft(f))
    if method == "central":
        out = np.zeros_like(f)
        out[1:-1] = (f[2:] - f[:-2]) / (2 * h)
        return out
    raise ValueError(f"unknown derivative method {method!r}")


def inner(first, second, epsilon: float) -> complex:
    """Lattice inner product ``sum(conj(u) v) * epsilon`` of two sampled spinors."""
    return complex(sum(np.vdot(u, v) for u, v in zip(first, second)) * epsilon)


def matrix_element_h1(l_prime: LandauLabel, l: LandauLabel, B: float, m: float) -> complex:
    """Closed-form ``<l'|H1|l>``; zero unless the levels differ by 0 or 2 quanta."""
    _require_field(B)
    ap, bp = spin_coefficients(l_prime, B, m)
    al, bl = spin_coefficients(l, B, m)
    ap, bp = ap.conjugate(), bp.conjugate()
    n, n2 = l.n, l_prime.n
    a = 1 / math.sqrt(abs(B))
    mass_term = m / (a * math.sqrt(2.0))
    if n2 == n - 2:
        value = math.sqrt(n - 1) * (0.5j * B * (ap * al * math.sqrt(n2) - bp * bl * math.sqrt(n))
                                     + mass_term * bp * al)
    elif n2 == n:
        value = -mass_term * math.sqrt(n) * (ap * bl + bp * al)
    elif n2 == n + 2:
        value = math.sqrt(n + 1) * (0.5j * B * (-ap * al * math.sqrt(n) + bp * bl * math.sqrt(n2))
                                     + mass_term * ap * bl)
    else:
        return 0j
    return _sgn(B) * complex(value)


def matrix_element_h1_quadrature(l_prime: LandauLabel, l: LandauLabel, B: float, m: float,
                                 grid: XGrid | None = None, K: float = 0.0) -> complex:
    """``<l'|H1|l>`` by lattice quadrature of sampled wavefunctions and exact derivatives."""
    _require_field(B)
    n_top = max(l.n, l_prime.n) + 1
    if grid is None:
        grid = XGrid.for_levels(0.02, n_top, B, K)
    a = 1 / math.sqrt(abs(B))
    chi = guiding_center(K, B)
    grid.check_tail(n_top, a, chi)
    xi = grid.x - chi

    def components(label):
        alpha, beta = spin_coefficients(label, B, m)
        n = label.n
        hi, dhi = beta * hermite_phi(n, xi, a), beta * hermite_dphi(n, xi, a)
        if n > 0:
            lo, dlo = alpha * hermite_phi(n - 1, xi, a), alpha * hermite_dphi(n - 1, xi, a)
        else:
            lo = dlo = np.zeros_like(xi)
        return (lo, hi, dlo, dhi) if B > 0 else (hi, lo, dhi, dlo)

    fm, fp, dm, dp = components(l)
    gm, gp, _, _ = components(l_prime)
    h_minus = 1j * B * (0.5 * fm + xi * dm) - m * dp
    h_plus = m * dm - 1j * B * (0.5 * fp + xi * dp)
    return inner((gm, gp), (h_minus, h_plus), grid.epsilon)


def perturbation_terms(label: LandauLabel) -> list[LandauLabel]:
    """Levels coupled to ``label`` by the first-order Hamiltonian, other than itself."""
    if label.is_ground:
        return [LandauLabel(1, 2), LandauLabel(-1, 2)]
    n, lam = label.n, label.sign
    terms = []
    if n >= 3:
        terms += [LandauLabel(1, n - 2), LandauLabel(-1, n - 2)]
    elif n == 2:
        terms.append(LandauLabel.ground())
    terms.append(LandauLabel(-lam, n))
    terms += [LandauLabel(1, n + 2), LandauLabel(-1, n + 2)]
    return terms


def first_order_correction(label: LandauLabel, K: float, B: float, m: float) -> HermiteSpinor:
    """The correction ``Delta`` in ``Phi1 = Phi0 + epsilon * Delta``, orthogonal to ``Phi0``."""
    _require_field(B)
    energy = landau_energy0(label, B, m)
    correction = 0 * hermite_coefficients(label, K, B, m)
    for other in perturbation_terms(label):
        gap = energy - landau_energy0(other, B, m)
        # |E_ground| = m < sqrt(m^2 + 4|B|) and levels with distinct n or sign never coincide.
        assert gap != 0, f"degenerate levels {label} and {other}"
        weight = matrix_element_h1(other, label, B, m) / gap
        correction = correction + weight * hermite_coefficients(other, K, B, m)
    return correction


def first_order_state(label: LandauLabel, K: float, B: float, m: float, epsilon: float,
                      grid: XGrid | None = None) -> LandauEigenstate:
    """Normalized eigenstate of ``H0 + epsilon H1`` to first order in ``epsilon``.

    The energy is unchanged at this order. The state is ``Phi0 + epsilon * Delta``
    rescaled to unit norm, so its density is directly comparable with ``Phi0``'s.
    """
    _require_field(B)
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if grid is None:
        grid = XGrid.for_levels(epsilon, label.n + 2, B, K)
    expansion = hermite_coefficients(label, K, B, m)
    expansion = expansion + epsilon * first_order_correction(label, K, B, m)
    expansion = (1 / expansion.norm()) * expansion
    grid.check_tail(expansion.n_max, expansion.a, expansion.center)
    minus, plus = expansion.evaluate(grid.x)
    alpha, beta = spin_coefficients(label, B, m)
    return LandauEigenstate(label, K, B, m, landau_energy0(label, B, m), alpha, beta, 1, grid,
                            minus, plus, expansion, epsilon)


def density_profile(state: LandauEigenstate) -> np.ndarray:
    return np.abs(state.minus) ** 2 + np.abs(state.plus) ** 2


def dense_h0_matrix(B: float, m: float, n_basis: int) -> np.ndarray:
    """Zeroth-order Hamiltonian on the truncated basis ``{phi_k b-, phi_k b+}, k < n_basis``.

    Built from the truncated position and derivative matrices; both enter
    linearly, so truncation does not distort the retained ladder.
    """
    _require_field(B)
    a = 1 / math.sqrt(abs(B))
    lower = np.diag(np.sqrt(np.arange(1, n_basis)), k=1)
    deriv = (lower - lower.T) / (a * math.sqrt(2.0))
    position = a * (lower + lower.T) / math.sqrt(2.0)
    eye = np.eye(n_basis)
    return np.block([[m * eye, -1j * (deriv + B * position)],
                     [1j * (-deriv + B * position), -m * eye]])


def dense_landau_spectrum(B: float, m: float, n_basis: int) -> np.ndarray:
    """Sorted eigenvalues of :func:`dense_h0_matrix`."""
    return np.linalg.eigvalsh(dense_h0_matrix(B, m, n_basis))
