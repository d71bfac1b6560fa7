"""Spectral space primitives: norms, projection, path distance."""

import numpy as np
import pytest

from refldp import (SpaceConfig, StructuralError, Trajectory, apply_A,
                    h_inner, project_ball, v_norm_sq, xt_distance)
from refldp.space import dual_norm_sq, project_into_ball_strict


def test_h_inner_basics():
    assert h_inner([1.0, 0.0], [0.0, 1.0]) == 0.0
    assert h_inner([1.0, 0.0], [1.0, 0.0]) == 1.0
    assert h_inner([3.0, 4.0], [3.0, 4.0]) == 25.0


def test_h_inner_dim_mismatch():
    with pytest.raises(StructuralError):
        h_inner([1.0, 0.0], [1.0, 0.0, 0.0])


def test_v_norm_sq_examples():
    cfg = SpaceConfig(np.array([2.0, 5.0]))
    assert v_norm_sq([1.0, 0.0], cfg) == 2.0
    assert v_norm_sq([0.0, 0.0], cfg) == 0.0
    assert v_norm_sq([1.0, 1.0], cfg) == 7.0
    with pytest.raises(StructuralError):
        v_norm_sq([1.0], cfg)


def test_apply_A_examples():
    cfg = SpaceConfig(np.array([2.0, 5.0]))
    assert np.array_equal(apply_A([1.0, 0.0], cfg), [2.0, 0.0])
    assert np.array_equal(apply_A([0.0, 0.0], cfg), [0.0, 0.0])
    assert np.array_equal(apply_A([1.0, 1.0], cfg), [2.0, 5.0])


def test_project_ball_examples():
    assert np.array_equal(project_ball([0.5, 0.0]), [0.5, 0.0])
    assert np.allclose(project_ball([3.0, 4.0]), [0.6, 0.8], rtol=0, atol=1e-15)
    assert np.array_equal(project_ball([0.0, 0.0]), [0.0, 0.0])


def test_space_config_validation():
    with pytest.raises(StructuralError):
        SpaceConfig(np.array([0.0, 1.0]))
    with pytest.raises(StructuralError):
        SpaceConfig(np.array([2.0, 1.0]))
    cfg = SpaceConfig.quadratic_spectrum(4)
    assert np.array_equal(cfg.eigenvalues, [1.0, 4.0, 9.0, 16.0])


def test_projection_obstacle_inequality_exact():
    # (x - y, x - pi(x)) >= 0 for |y| <= 1, asserted with no tolerance
    rng = np.random.default_rng(2024)
    for dim in range(1, 9):
        x = 2.0 * rng.standard_normal((12_500, dim))
        y = rng.standard_normal((12_500, dim))
        y *= (rng.random((12_500, 1)) ** (1.0 / dim)
              / np.maximum(np.linalg.norm(y, axis=1, keepdims=True), 1e-300))
        r = np.linalg.norm(x, axis=1, keepdims=True)
        px = x * np.where(r > 1.0, 1.0 / r, 1.0)
        vals = np.einsum("sd,sd->s", x - y, x - px)
        assert np.min(vals) >= 0.0


def test_projection_lipschitz_two():
    rng = np.random.default_rng(7)
    for dim in range(1, 9):
        x = 3.0 * rng.standard_normal((12_500, dim))
        y = 3.0 * rng.standard_normal((12_500, dim))
        rx = np.linalg.norm(x, axis=1, keepdims=True)
        ry = np.linalg.norm(y, axis=1, keepdims=True)
        px = x * np.where(rx > 1.0, 1.0 / rx, 1.0)
        py = y * np.where(ry > 1.0, 1.0 / ry, 1.0)
        lhs = np.linalg.norm(px - py, axis=1)
        rhs = 2.0 * np.linalg.norm(x - y, axis=1)
        assert np.all(lhs <= rhs)


def test_coercivity():
    cfg = SpaceConfig.quadratic_spectrum(8)
    rng = np.random.default_rng(3)
    for _ in range(200):
        x = rng.standard_normal(8)
        quad = h_inner(apply_A(x, cfg), x)
        assert quad >= v_norm_sq(x, cfg) * (1.0 - 1e-12)
        assert quad >= cfg.lambda_min * h_inner(x, x) * (1.0 - 1e-12)


def test_dual_norm_vs_v_norm():
    cfg = SpaceConfig(np.array([2.0, 5.0]))
    assert dual_norm_sq([2.0, 0.0], cfg) == pytest.approx(2.0)


def test_strict_projection_grid_membership():
    rng = np.random.default_rng(11)
    u = 5.0 * rng.standard_normal((10_000, 6))
    out = project_into_ball_strict(u)
    assert np.max(np.linalg.norm(out, axis=1)) <= 1.0


def _const_traj(vec, grid):
    states = np.tile(np.asarray(vec, dtype=float), (len(grid), 1))
    return Trajectory(np.asarray(grid, dtype=float), states)


def test_xt_distance_examples():
    cfg = SpaceConfig(np.array([2.0, 5.0]))
    grid = np.linspace(0.0, 1.0, 11)
    a = _const_traj([1.0, 0.0], grid)
    b = _const_traj([0.0, 0.0], grid)
    assert xt_distance(a, a, cfg) == 0.0
    # constant paths: sup term 1, integral term lambda_1 * T = 2
    assert xt_distance(a, b, cfg) == pytest.approx(np.sqrt(3.0), rel=1e-14)
    single = Trajectory(np.array([0.0]), np.array([[1.0, 0.0]]))
    single_b = Trajectory(np.array([0.0]), np.array([[0.0, 0.0]]))
    assert xt_distance(single, single_b, cfg) == 1.0


def test_xt_distance_grid_mismatch():
    cfg = SpaceConfig(np.array([1.0]))
    a = _const_traj([1.0], np.linspace(0, 1, 5))
    b = _const_traj([1.0], np.linspace(0, 1, 6))
    with pytest.raises(StructuralError):
        xt_distance(a, b, cfg)


def test_xt_metric_properties():
    cfg = SpaceConfig.quadratic_spectrum(3)
    grid = np.linspace(0.0, 1.0, 21)
    rng = np.random.default_rng(5)
    for _ in range(50):
        a, b, c = (Trajectory(grid, rng.standard_normal((21, 3))) for _ in range(3))
        dab = xt_distance(a, b, cfg)
        dba = xt_distance(b, a, cfg)
        assert dab == dba  # exact symmetry
        dac = xt_distance(a, c, cfg)
        dcb = xt_distance(c, b, cfg)
        assert dab <= (dac + dcb) * (1.0 + 1e-12)
