"""Finite-dimensional spectral model of the ambient spaces.

A state is a coefficient vector in the eigenbasis of the positive
self-adjoint operator A.  The H inner product is the Euclidean one, the
V norm weights coordinates by the eigenvalues, and the dual norm divides
by them.  The path-space distance combines the sup of H-distances with
the time integral of squared V-distances.
"""

from dataclasses import dataclass

import numpy as np

from .errors import StructuralError
from .trajectory import Trajectory


@dataclass(frozen=True)
class SpaceConfig:
    """Retained spectrum of A: positive, nondecreasing eigenvalues."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        if lam.ndim != 1 or lam.size == 0:
            raise StructuralError("eigenvalues must be a non-empty 1-d array")
        if not np.all(np.isfinite(lam)):
            raise StructuralError("eigenvalues must be finite")
        if lam[0] <= 0.0:
            raise StructuralError("smallest eigenvalue must be positive (coercivity)")
        if np.any(np.diff(lam) < 0.0):
            raise StructuralError("eigenvalues must be nondecreasing")
        object.__setattr__(self, "eigenvalues", lam)

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])

    @classmethod
    def quadratic_spectrum(cls, dim: int) -> "SpaceConfig":
        """Dirichlet-Laplacian-like default spectrum, eigenvalue i^2 for mode i."""
        if dim < 1:
            raise StructuralError("dim must be a positive integer")
        return cls(np.arange(1, dim + 1, dtype=float) ** 2)


def as_state(x, dim: int | None = None) -> np.ndarray:
    """Coerce to a finite 1-d float array, optionally checking its length."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise StructuralError(f"state must be 1-d, got shape {v.shape}")
    if dim is not None and v.size != dim:
        raise StructuralError(f"state has dimension {v.size}, expected {dim}")
    if not np.all(np.isfinite(v)):
        raise StructuralError("state entries must be finite")
    return v


def _check_same_dim(x: np.ndarray, y: np.ndarray):
    if x.shape != y.shape:
        raise StructuralError(f"dimension mismatch: {x.shape} vs {y.shape}")


def h_inner(x, y) -> float:
    """H inner product, the Euclidean dot of coefficient vectors."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_same_dim(x, y)
    return float(np.dot(x, y))


def h_norm(x) -> float:
    return float(np.linalg.norm(np.asarray(x, dtype=float)))


def v_norm_sq(x, cfg: SpaceConfig) -> float:
    """Squared V norm, sum of eigenvalue-weighted squared coefficients."""
    x = np.asarray(x, dtype=float)
    _check_same_dim(x, cfg.eigenvalues)
    return float(np.dot(cfg.eigenvalues, x * x))


def dual_norm_sq(x, cfg: SpaceConfig) -> float:
    """Squared dual (V*) norm, coefficients weighted by 1/eigenvalue."""
    x = np.asarray(x, dtype=float)
    _check_same_dim(x, cfg.eigenvalues)
    return float(np.dot(x * x, 1.0 / cfg.eigenvalues))


def apply_A(x, cfg: SpaceConfig) -> np.ndarray:
    """Apply the diagonal operator A, componentwise eigenvalue scaling."""
    x = np.asarray(x, dtype=float)
    _check_same_dim(x, cfg.eigenvalues)
    return cfg.eigenvalues * x


def project_ball(y) -> np.ndarray:
    """Metric projection onto the closed unit ball: identity inside,
    exact radial normalization outside.  No tolerance band at |y| = 1."""
    y = np.asarray(y, dtype=float)
    r = np.linalg.norm(y)
    if r <= 1.0:
        return y
    return y / r


def project_ball_batch(u: np.ndarray) -> np.ndarray:
    """Vectorized projection for arrays of shape (..., d)."""
    r = np.linalg.norm(u, axis=-1, keepdims=True)
    scale = np.where(r > 1.0, 1.0 / np.maximum(r, 1e-300), 1.0)
    return u * scale


def project_into_ball_strict(u: np.ndarray) -> np.ndarray:
    """Projection whose *computed* norms are <= 1 at every row.

    Plain normalization can land at 1 + 1ulp in floating point; grid-point
    membership assertions need the computed norm itself to not exceed 1.
    """
    out = project_ball_batch(np.asarray(u, dtype=float))
    for _ in range(4):
        r = np.linalg.norm(out, axis=-1, keepdims=True)
        bad = r > 1.0
        if not np.any(bad):
            break
        out = np.where(bad, out / r, out)
    return out


def xt_distance(traj_a: Trajectory, traj_b: Trajectory, cfg: SpaceConfig) -> float:
    """Path-space distance: sqrt of sup-squared H distance plus the
    trapezoidal time integral of squared V distances.  Grids must match."""
    if traj_a.grid.shape != traj_b.grid.shape or not np.array_equal(traj_a.grid, traj_b.grid):
        raise StructuralError("xt_distance requires identical time grids")
    if traj_a.states.shape != traj_b.states.shape:
        raise StructuralError("xt_distance requires states of equal dimension")
    diff = traj_a.states - traj_b.states
    sup_sq = float(np.max(np.einsum("td,td->t", diff, diff)))
    v_sq = np.einsum("td,d,td->t", diff, cfg.eigenvalues, diff)
    integral = float(np.trapezoid(v_sq, traj_a.grid)) if traj_a.grid.size > 1 else 0.0
    return float(np.sqrt(sup_sq + integral))
