"""Control paths and Brownian driving noise.

Controls are piecewise-constant real paths on a partition of [0, T]; they
are the discretized Cameron-Martin directions.  Energy is the exact
piecewise-constant quadrature of the squared path, and membership in the
energy ball S_N is decided from it.  Noise paths carry independent
Gaussian increments from the counter-based streams in :mod:`refldp.rng`.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import rng
from .errors import StructuralError


@dataclass(frozen=True)
class Control:
    """Piecewise-constant control: values[j] on [grid[j], grid[j+1])."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.ndim != 1 or g.size < 2:
            raise StructuralError("control grid needs at least two points")
        if np.any(np.diff(g) <= 0):
            raise StructuralError("control grid must be strictly increasing")
        if v.shape != (g.size - 1,):
            raise StructuralError("control needs one value per grid cell")
        if not np.all(np.isfinite(v)):
            raise StructuralError("control values must be finite")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    @property
    def horizon(self) -> float:
        return float(self.grid[-1])

    def cumulative_integral(self) -> np.ndarray:
        """Running integral of the control at the grid points."""
        return np.concatenate(([0.0], np.cumsum(self.values * np.diff(self.grid))))

    def values_on(self, target_grid: np.ndarray) -> np.ndarray:
        """Per-cell averages of the control on another partition.

        Exact for piecewise-constant paths: the running integral is
        piecewise linear, so cell averages come from interpolating it.
        Averaging can only lower the energy (Jensen), so S_N membership
        is preserved.  Outside [grid[0], grid[-1]] the control is zero.
        """
        target_grid = np.asarray(target_grid, dtype=float)
        cum = np.interp(target_grid, self.grid, self.cumulative_integral())
        return np.diff(cum) / np.diff(target_grid)


def control_energy(k: Control) -> float:
    """Integral of the squared control, exact for piecewise constants."""
    return float(np.dot(k.values * k.values, np.diff(k.grid)))


def in_SN(k: Control, N: float) -> bool:
    """Membership in the closed energy ball of radius N (boundary included)."""
    return control_energy(k) <= N


def control_distance(k1: Control, k2: Control) -> float:
    """L2 distance of two controls, computed on the merged partition."""
    merged = np.union1d(k1.grid, k2.grid)
    d = k1.values_on(merged) - k2.values_on(merged)
    return float(np.sqrt(np.dot(d * d, np.diff(merged))))


def zero_control(horizon: float) -> Control:
    return Control(np.array([0.0, float(horizon)]), np.array([0.0]))


def constant_control(value: float, horizon: float, cells: int = 1) -> Control:
    grid = np.linspace(0.0, float(horizon), cells + 1)
    return Control(grid, np.full(cells, float(value)))


def oscillatory_family(base: Control, amplitude: float, eps: float) -> Control:
    """Fast sinusoid added to a base control, sampled at cell midpoints.

    As eps -> 0 the family converges weakly (not strongly) to the base:
    pairings against fixed test functions decay like eps while the energy
    stays at amplitude^2 * T / 2 above the cross terms.
    """
    if eps <= 0.0:
        raise StructuralError("eps must be positive")
    mids = 0.5 * (base.grid[:-1] + base.grid[1:])
    values = base.values + amplitude * np.sin(mids / eps)
    return Control(base.grid, values)


@dataclass(frozen=True)
class NoisePath:
    """Brownian increments on a solver grid; increment j has variance dt_j."""

    grid: np.ndarray
    increments: np.ndarray
    seed: int

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        w = np.asarray(self.increments, dtype=float)
        if g.ndim != 1 or g.size < 2 or np.any(np.diff(g) <= 0):
            raise StructuralError("noise grid must be strictly increasing")
        if w.shape != (g.size - 1,):
            raise StructuralError("noise needs one increment per step")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "increments", w)


def sample_noise(grid, seed: int, stream: Optional[tuple] = None) -> NoisePath:
    """Draw a Brownian path on the given grid.

    Increment j is sqrt(dt_j) times the j-th draw of the counter-based
    stream keyed by (seed, stream), so paths are reproducible and
    parallel-safe across samples.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise StructuralError("noise grid must be strictly increasing")
    dts = np.diff(grid)
    z = rng.normals(seed, ("noise",) + (tuple(stream) if stream else ()), dts.size)
    return NoisePath(grid, np.sqrt(dts) * z, int(seed))
