"""Time-discrete trajectories: a grid, states, and optional local-time data."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import StructuralError


@dataclass
class Trajectory:
    """States on a time grid, with per-step local-time increments.

    grid has M+1 points; states is (M+1, d).  local_time_increments, when
    present, is (M, d): row j is the increment accumulated over
    (grid[j], grid[j+1]].  control_values, when present, is (M,): the
    piecewise-constant control on [grid[j], grid[j+1]).
    """

    grid: np.ndarray
    states: np.ndarray
    local_time_increments: Optional[np.ndarray] = None
    control_values: Optional[np.ndarray] = None

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if self.grid.ndim != 1 or self.grid.size < 1:
            raise StructuralError("trajectory grid must be a 1-d array")
        if np.any(np.diff(self.grid) <= 0):
            raise StructuralError("trajectory grid must be strictly increasing")
        if self.states.ndim != 2 or self.states.shape[0] != self.grid.size:
            raise StructuralError(
                f"states shape {self.states.shape} inconsistent with grid of "
                f"{self.grid.size} points"
            )
        n_steps = self.grid.size - 1
        if self.local_time_increments is not None:
            self.local_time_increments = np.asarray(self.local_time_increments, dtype=float)
            if self.local_time_increments.shape != (n_steps, self.states.shape[1]):
                raise StructuralError("local_time_increments must have one row per step")
        if self.control_values is not None:
            self.control_values = np.asarray(self.control_values, dtype=float)
            if self.control_values.shape != (n_steps,):
                raise StructuralError("control_values must have one entry per step")

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def n_steps(self) -> int:
        return self.grid.size - 1

    def h_norms(self) -> np.ndarray:
        """Euclidean norm of every state."""
        return np.linalg.norm(self.states, axis=1)

    def local_time_variation(self) -> float:
        """Total variation of the accumulated local time, sum of |dL| per step."""
        if self.local_time_increments is None:
            return 0.0
        return float(np.linalg.norm(self.local_time_increments, axis=1).sum())
