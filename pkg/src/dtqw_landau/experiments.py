"""Experiment runners producing tabular reports for the walk and its Landau levels."""
from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .propagator import delta_metric, scaling_slope
from .spectral import (
    LandauLabel,
    XGrid,
    ZeroFieldError,
    density_profile,
    eigenstate0,
    first_order_state,
    landau_energy0,
)
from .walk import PhysicalParams, gaussian_state, trajectory

__all__ = [
    "DEFAULT_MAX_GRID_CELLS",
    "ExperimentReport",
    "MemoryGuardError",
    "NonFiniteOutputError",
    "energies",
    "front_maxima",
    "front_radius_spread",
    "profiles",
    "scaling",
    "spread",
    "density",
]

DEFAULT_MAX_GRID_CELLS = 4_000_000


class MemoryGuardError(MemoryError):
    """The requested lattice exceeds the configured cell budget."""


class NonFiniteOutputError(ArithmeticError):
    """A NaN or infinity reached a report row."""


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


@dataclass
class ExperimentReport:
    """Rows of named columns plus ``#``-prefixed metadata, serialized as CSV."""

    command: str
    parameters: dict
    columns: list[str]
    rows: list[tuple] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError(f"row {row!r} does not match columns {self.columns}")
            for v in row:
                if isinstance(v, (float, np.floating)) and not math.isfinite(v):
                    raise NonFiniteOutputError(f"non-finite value in row {row!r}")

    def column(self, name: str) -> list:
        k = self.columns.index(name)
        return [row[k] for row in self.rows]

    def to_csv(self, command_line: str | None = None) -> str:
        buf = io.StringIO()
        buf.write(f"# command: {command_line or self.command}\n")
        buf.write(f"# version: {__version__}\n")
        for key, value in self.parameters.items():
            buf.write(f"# {key}: {_fmt_param(value)}\n")
        for key, value in self.summary.items():
            buf.write(f"# {key}: {_fmt(value)}\n")
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(_fmt(v) for v in row) + "\n")
        return buf.getvalue()


def _fmt_param(value) -> str:
    if isinstance(value, (list, tuple)):
        return " ".join(_fmt(v) for v in value)
    return _fmt(value)


def _nonzero_fields(b_values):
    if any(b == 0 for b in b_values):
        raise ZeroFieldError("B = 0 is excluded from Landau-level experiments; split the range around 0")


def _map(fn, items, threads: int):
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def energies(b_values, m: float = 1.0, n_max: int = 5) -> ExperimentReport:
    """Order-0 Landau energies for the ground state and ``(+-, n)``, ``n <= n_max``."""
    b_values = [float(b) for b in b_values]
    _nonzero_fields(b_values)
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    labels = [LandauLabel.ground()]
    for n in range(1, n_max + 1):
        labels += [LandauLabel(1, n), LandauLabel(-1, n)]
    rows = [(B, str(lab), landau_energy0(lab, B, m)) for B in b_values for lab in labels]
    return ExperimentReport("energies", {"B": b_values, "m": m, "n_max": n_max},
                            ["B", "label", "energy"], rows)


def profiles(labels, K: float = 0.0, B: float = 1.0, m: float = 1.0,
             epsilon: float = 0.25, order: int = 0) -> ExperimentReport:
    """Densities ``P(X)`` (order 0) or ``P1(X) - P0(X)`` (order 1) on a shared lattice."""
    _nonzero_fields([B])
    labels = [LandauLabel.parse(lab) if isinstance(lab, str) else lab for lab in labels]
    if order not in (0, 1):
        raise ValueError("order must be 0 or 1")
    grid = XGrid.for_levels(epsilon, max(lab.n for lab in labels) + 2 * order + 1, B, K)
    rows = []
    for lab in labels:
        p0 = density_profile(eigenstate0(lab, K, B, m, grid))
        values = p0
        if order == 1:
            values = density_profile(first_order_state(lab, K, B, m, epsilon, grid)) - p0
        rows += [(str(lab), float(x), float(v)) for x, v in zip(grid.x, values)]
    column = "P" if order == 0 else "dP"
    params = {"labels": [str(lab) for lab in labels], "K": K, "B": B, "m": m,
              "epsilon": epsilon, "order": order}
    return ExperimentReport("profiles", params, ["label", "X", column], rows)


def scaling(labels, epsilons, b_values=(1.0,), m: float = 1.0, K: float = 0.0,
            threads: int = 1) -> ExperimentReport:
    """One-step distances of order-0 and order-1 eigenstates versus epsilon, with log-log slopes."""
    b_values = [float(b) for b in b_values]
    _nonzero_fields(b_values)
    labels = [LandauLabel.parse(lab) if isinstance(lab, str) else lab for lab in labels]
    epsilons = [float(e) for e in epsilons]
    points = [(B, lab, eps) for B in b_values for lab in labels for eps in epsilons]

    def run(point):
        B, lab, eps = point
        params = PhysicalParams(eps, B, m)
        return (B, eps, str(lab), delta_metric(lab, 0, K, params), delta_metric(lab, 1, K, params))

    rows = _map(run, points, threads)
    summary = {}
    if len(epsilons) >= 3:
        for B in b_values:
            for lab in labels:
                sel = [r for r in rows if r[0] == B and r[2] == str(lab)]
                eps = [r[1] for r in sel]
                summary[f"slope_r0[B={_fmt(B)},{lab}]"] = scaling_slope(eps, [r[3] for r in sel])
                summary[f"slope_r1[B={_fmt(B)},{lab}]"] = scaling_slope(eps, [r[4] for r in sel])
    params = {"labels": [str(lab) for lab in labels], "epsilons": epsilons, "B": b_values,
              "m": m, "K": K}
    return ExperimentReport("scaling", params, ["B", "epsilon", "label", "delta0", "delta1"],
                            rows, summary)


def _walk_grid(n_steps: int, max_cells: int) -> int:
    half = n_steps + 1
    cells = (2 * half + 1) ** 2
    if cells > max_cells:
        raise MemoryGuardError(f"{n_steps} steps need a {2 * half + 1}^2 = {cells} cell lattice, "
                               f"above the cap of {max_cells}; raise --max-grid-cells")
    return half


def _spread_run(width, B, m, epsilon, n_steps, half):
    state = gaussian_state(width, half, half, PhysicalParams(epsilon, B, m))
    p2 = state.p.astype(float) ** 2
    P = state.density()
    rows = [(0, B, math.sqrt(float(np.sum(p2[:, None] * P))),
             math.sqrt(float(np.sum(p2[None, :] * P))))]
    for cur, (wp, wq) in trajectory(state, n_steps):
        L, R = cur.L[wp, wq], cur.R[wp, wq]
        P = L.real**2 + L.imag**2 + R.real**2 + R.imag**2
        rows.append((cur.time, B, math.sqrt(float(np.sum(p2[wp][:, None] * P))),
                     math.sqrt(float(np.sum(p2[wq][None, :] * P)))))
    return rows


def spread(width: float = 0.0, b_values=(0.0, 0.01, 0.04, 0.16), m: float = 1.0,
           n_steps: int = 500, epsilon: float = 1.0, max_cells: int = DEFAULT_MAX_GRID_CELLS,
           threads: int = 1) -> ExperimentReport:
    """p- and q-spreads at every step for each field value."""
    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")
    b_values = [float(b) for b in b_values]
    half = _walk_grid(n_steps, max_cells)
    runs = _map(lambda B: _spread_run(width, B, m, epsilon, n_steps, half), b_values, threads)
    rows = [row for run in runs for row in run]
    params = {"width": width, "B": b_values, "m": m, "epsilon": epsilon, "steps": n_steps,
              "grid": 2 * half + 1}
    return ExperimentReport("spread", params, ["j", "B", "sigma_p", "sigma_q"], rows)


def density(width: float = 0.0, B: float = 0.0, m: float = 1.0, n_steps: int = 500,
            epsilon: float = 1.0, max_cells: int = DEFAULT_MAX_GRID_CELLS, half: int | None = None):
    """Probability density on every lattice site after ``n_steps``.

    Returns ``(report, P)`` where ``P`` is the density array indexed ``[p + half, q + half]``.
    """
    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")
    if half is None:
        half = _walk_grid(n_steps, max_cells)
    state = gaussian_state(width, half, half, PhysicalParams(epsilon, B, m))
    final = state
    for final, _ in trajectory(state, n_steps):
        pass
    P = final.density()
    p = np.repeat(final.p, P.shape[1])
    q = np.tile(final.q, P.shape[0])
    rows = list(zip(p.tolist(), q.tolist(), P.ravel().tolist()))
    summary = {"total_probability": float(np.sum(P))}
    summary.update({f"front_max_{k}": v for k, v in front_maxima(P).items()})
    params = {"width": width, "B": B, "m": m, "epsilon": epsilon, "steps": n_steps,
              "grid": 2 * half + 1}
    return ExperimentReport("density", params, ["p", "q", "P"], rows, summary), P


def _coords(P):
    h_p, h_q = P.shape[0] // 2, P.shape[1] // 2
    p = (np.arange(P.shape[0]) - h_p)[:, None]
    q = (np.arange(P.shape[1]) - h_q)[None, :]
    return p, q


def front_maxima(P: np.ndarray) -> dict:
    """Largest density in the four quadrant sectors around the axes.

    ``right`` is ``p > |q|``, ``left`` is ``p < -|q|``, ``top`` is ``q > |p|``
    and ``bottom`` is ``q < -|p|``.
    """
    p, q = _coords(P)
    sectors = {"right": p > np.abs(q), "left": p < -np.abs(q),
               "top": q > np.abs(p), "bottom": q < -np.abs(p)}
    return {name: float(np.max(np.where(mask, P, 0.0))) for name, mask in sectors.items()}


def front_radius_spread(P: np.ndarray, level: float = 1e-3, n_bins: int = 72) -> float:
    """Coefficient of variation over angle of the outer radius of the ``level * max(P)`` contour."""
    p, q = _coords(P)
    r = np.hypot(p, q)
    bins = (np.floor((np.arctan2(q, p) + math.pi) / (2 * math.pi) * n_bins).astype(int)) % n_bins
    mask = P >= level * P.max()
    radii = np.zeros(n_bins)
    np.maximum.at(radii, bins[mask], r[mask])
    return float(radii.std() / radii.mean())
