"""Registered model instances and their parameter schemas.

Each instance is a named builder taking a flat parameter dict (as parsed
from a scenario file) and returning a ModelSpec.  Declared Lipschitz and
continuity constants are part of the instance; the assumption audit
checks them statistically rather than trusting them.
"""

import math

import numpy as np

from .dynamics import (DiffusionMap, DriftMap, ModelSpec, TrilinearForm,
                       nse_galerkin_form, nse_space_config, zero_form)
from .errors import ConfigError
from .space import SpaceConfig

_LIP_FLOOR = 1e-12

NSE_TORUS_8_WAVENUMBERS = [(1, 0), (-1, 0), (0, 1), (0, -1),
                           (1, 1), (-1, -1), (1, -1), (-1, 1)]
NSE_TORUS_16_WAVENUMBERS = NSE_TORUS_8_WAVENUMBERS + [
    (2, 0), (-2, 0), (0, 2), (0, -2), (2, 1), (-2, -1), (1, 2), (-1, -2)]


def _space_from_params(params: dict, default_dim: int = 4) -> SpaceConfig:
    eigenvalues = params.get("eigenvalues")
    if eigenvalues is not None:
        return SpaceConfig(np.atleast_1d(np.asarray(eigenvalues, dtype=float)))
    return SpaceConfig.quadratic_spectrum(int(params.get("dim", default_dim)))


def _u0_vector(params: dict, dim: int) -> np.ndarray:
    u0 = params.get("u0", 0.0)
    arr = np.atleast_1d(np.asarray(u0, dtype=float))
    if arr.size == 1 and dim >= 1:
        vec = np.zeros(dim)
        vec[0] = arr[0]
        return vec
    if arr.size != dim:
        raise ConfigError(f"u0 has {arr.size} entries, model dimension is {dim}")
    return arr


def _sigma_map(kind: str, amp: float, dim: int, declared: float | None,
               profile: str = "first-mode") -> DiffusionMap:
    if profile == "first-mode":
        direction = np.zeros(dim)
        direction[0] = 1.0
    elif profile == "all-modes":
        direction = np.full(dim, 1.0 / math.sqrt(dim))
    else:
        raise ConfigError(f"unknown sigma profile {profile!r}")
    if kind == "constant":
        vec = amp * direction

        def fn(u):
            return np.broadcast_to(vec, u.shape).copy()
        default_bound = abs(amp)
    elif kind == "linear":
        def fn(u):
            return amp * u
        default_bound = abs(amp)
    elif kind == "vanishing":
        def fn(u):
            r_sq = np.sum(u * u, axis=-1, keepdims=True)
            return (1.0 - r_sq) * amp * direction
        default_bound = 5.0 * abs(amp)
    else:
        raise ConfigError(f"unknown sigma kind {kind!r}")
    bound = default_bound if declared is None else float(declared)
    return DiffusionMap(fn, max(bound, _LIP_FLOOR), name=f"sigma-{kind}")


def _damped_drift(gamma: float, forcing: float, dim: int, lambda_min: float,
                  declared: float | None) -> DriftMap:
    force = np.zeros(dim)
    force[0] = forcing

    def fn(u):
        return -gamma * u + force
    bound = gamma / math.sqrt(lambda_min) if declared is None else float(declared)
    return DriftMap(fn, max(bound, _LIP_FLOOR), name="linear-damped-drift")


def build_zero(params: dict) -> ModelSpec:
    space = _space_from_params(params)
    d = space.dim
    return ModelSpec(
        space=space,
        f=DriftMap(lambda u: np.zeros_like(u), _LIP_FLOOR, name="zero-drift"),
        sigma=DiffusionMap(lambda u: np.zeros_like(u), _LIP_FLOOR, name="zero-sigma"),
        b=zero_form(),
        u0=_u0_vector(params, d),
        name="zero",
    )


def build_linear_damped(params: dict) -> ModelSpec:
    space = _space_from_params(params)
    d = space.dim
    gamma = float(params.get("gamma", 0.5))
    forcing = float(params.get("forcing", 0.0))
    sigma_kind = str(params.get("sigma_kind", "constant"))
    sigma_amp = float(params.get("sigma_amp", 0.0))
    return ModelSpec(
        space=space,
        f=_damped_drift(gamma, forcing, d, space.lambda_min,
                        params.get("declared_f_lip")),
        sigma=_sigma_map(sigma_kind, sigma_amp, d, params.get("declared_sigma_lip"),
                         str(params.get("sigma_profile", "first-mode"))),
        b=zero_form(),
        u0=_u0_vector(params, d),
        name="linear-damped",
    )


def build_constant_sigma_scalar(params: dict) -> ModelSpec:
    lam = float(params.get("lambda1", 1.0))
    space = SpaceConfig(np.array([lam]))
    gamma = float(params.get("gamma", 0.0))
    sigma_amp = float(params.get("sigma_amp", 1.0))
    return ModelSpec(
        space=space,
        f=_damped_drift(gamma, float(params.get("forcing", 0.0)), 1, lam,
                        params.get("declared_f_lip")),
        sigma=_sigma_map("constant", sigma_amp, 1, params.get("declared_sigma_lip")),
        b=zero_form(),
        u0=_u0_vector(params, 1),
        name="constant-sigma-scalar",
    )


def _build_nse(params: dict, wavenumbers, name: str) -> ModelSpec:
    space = nse_space_config(wavenumbers)
    d = space.dim
    if "dim" in params and int(params["dim"]) != d:
        raise ConfigError(f"{name} has fixed dimension {d}")
    form = nse_galerkin_form(space, wavenumbers)
    gamma = float(params.get("gamma", 0.1))
    forcing = float(params.get("forcing", 0.0))
    u0_amp = float(params.get("u0_amp", 0.5))
    profile = 1.0 / (1.0 + np.arange(d))
    u0 = u0_amp * profile / np.linalg.norm(profile)
    if "u0" in params:
        u0 = _u0_vector(params, d)
    return ModelSpec(
        space=space,
        f=_damped_drift(gamma, forcing, d, space.lambda_min,
                        params.get("declared_f_lip")),
        sigma=_sigma_map(str(params.get("sigma_kind", "constant")),
                         float(params.get("sigma_amp", 0.5)), d,
                         params.get("declared_sigma_lip"),
                         str(params.get("sigma_profile", "first-mode"))),
        b=form,
        u0=u0,
        name=name,
    )


def build_nse_torus_8(params: dict) -> ModelSpec:
    return _build_nse(params, NSE_TORUS_8_WAVENUMBERS, "nse-torus-8")


def build_nse_torus_16(params: dict) -> ModelSpec:
    return _build_nse(params, NSE_TORUS_16_WAVENUMBERS, "nse-torus-16")


REGISTRY = {
    "zero": {
        "builder": build_zero,
        "doc": "all coefficient maps vanish; pure linear decay",
        "schema": {"dim": "int (default 4)",
                   "eigenvalues": "list of floats (default i^2)",
                   "u0": "float on first mode or full list (default 0)"},
    },
    "linear-damped": {
        "builder": build_linear_damped,
        "doc": "drift -gamma*u + forcing on the first mode, selectable diffusion",
        "schema": {"dim": "int (default 4)",
                   "eigenvalues": "list of floats (default i^2)",
                   "gamma": "float damping (default 0.5)",
                   "forcing": "float constant forcing on mode 1 (default 0)",
                   "sigma_kind": "constant | linear | vanishing (default constant)",
                   "sigma_amp": "float (default 0)",
                   "sigma_profile": "first-mode | all-modes (default first-mode)",
                   "declared_sigma_lip": "float override of the declared constant",
                   "declared_f_lip": "float override of the declared constant",
                   "u0": "float on first mode or full list (default 0)"},
    },
    "constant-sigma-scalar": {
        "builder": build_constant_sigma_scalar,
        "doc": "one mode, constant diffusion; the controllable scalar testbed",
        "schema": {"lambda1": "float eigenvalue (default 1)",
                   "gamma": "float damping (default 0)",
                   "forcing": "float (default 0)",
                   "sigma_amp": "float (default 1)",
                   "declared_sigma_lip": "float override",
                   "declared_f_lip": "float override",
                   "u0": "float (default 0)"},
    },
    "nse-torus-8": {
        "builder": build_nse_torus_8,
        "doc": "8-mode divergence-free Fourier truncation of 2-d convection",
        "schema": {"gamma": "float damping (default 0.1)",
                   "forcing": "float on the first mode (default 0)",
                   "sigma_kind": "constant | linear | vanishing (default constant)",
                   "sigma_amp": "float (default 0.5)",
                   "sigma_profile": "first-mode | all-modes (default first-mode)",
                   "u0_amp": "float, scales the default decaying profile (default 0.5)",
                   "u0": "full list override"},
    },
    "nse-torus-16": {
        "builder": build_nse_torus_16,
        "doc": "16-mode divergence-free Fourier truncation of 2-d convection",
        "schema": {"gamma": "float damping (default 0.1)",
                   "forcing": "float on the first mode (default 0)",
                   "sigma_kind": "constant | linear | vanishing (default constant)",
                   "sigma_amp": "float (default 0.5)",
                   "sigma_profile": "first-mode | all-modes (default first-mode)",
                   "u0_amp": "float (default 0.5)",
                   "u0": "full list override"},
    },
}


def build_model(name: str, params: dict) -> ModelSpec:
    if name not in REGISTRY:
        raise ConfigError(f"unknown model instance {name!r}; "
                          f"known: {', '.join(sorted(REGISTRY))}")
    return REGISTRY[name]["builder"](params)


def instance_listing() -> list[dict]:
    return [{"name": name, "doc": entry["doc"], "schema": entry["schema"]}
            for name, entry in sorted(REGISTRY.items())]
