"""Two-dimensional discrete-time quantum walk in a uniform artificial magnetic field.

Submodules
----------
walk
    Real-space lattice evolution, initial states and spreads.
spectral
    Oscillator functions, relativistic Landau levels and first-order corrections.
propagator
    Fixed-wavenumber propagator, matrix logarithm and the one-step distance.
experiments
    Report-producing runners used by the command line.
verify
    Invariant checks runnable as a single suite.
"""

__version__ = "0.1.0"

from .walk import (  # noqa: E402
    PhysicalParams,
    SpinorLattice,
    density_and_spread,
    evolve,
    gaussian_state,
    step,
)
from .spectral import (  # noqa: E402
    LandauLabel,
    XGrid,
    eigenstate0,
    first_order_state,
    landau_energy0,
    matrix_element_h1,
    spin_coefficients,
)
from .propagator import build_q, delta_metric, dft_y, idft_y, numerical_hamiltonian  # noqa: E402

__all__ = [
    "LandauLabel",
    "PhysicalParams",
    "SpinorLattice",
    "XGrid",
    "build_q",
    "delta_metric",
    "density_and_spread",
    "dft_y",
    "eigenstate0",
    "evolve",
    "first_order_state",
    "gaussian_state",
    "idft_y",
    "landau_energy0",
    "matrix_element_h1",
    "numerical_hamiltonian",
    "spin_coefficients",
    "step",
]
