"""Coefficient maps: drift, diffusion, and the trilinear convection form.

Maps operate on coefficient arrays of shape (..., d) so single states and
batches share one code path.  Drift outputs are read as duality
coefficients (an element of the dual space), diffusion outputs live in H.
The convection form is carried by its bilinear companion: ``bilinear(u, v)``
returns the coefficient vector whose dot with w equals the trilinear value.

The shipped fluid instance is a divergence-free Fourier truncation of the
2-d periodic convection nonlinearity.  Each retained wavevector pair
contributes one cosine and one sine vector mode; the interaction tensor is
assembled from exact triad sums of complex exponentials and explicitly
antisymmetrized in its last two slots, so the cancellation b(u, v, v) = 0
holds to roundoff by construction.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import rng
from .errors import CoefficientError, StructuralError
from .report import ExperimentReport
from .space import SpaceConfig, dual_norm_sq, h_norm, v_norm_sq

_LIP_FLOOR = 1e-12


@dataclass(frozen=True)
class DriftMap:
    """Drift u -> f(u) with a declared Lipschitz constant (dual norm vs H)."""

    fn: Callable[[np.ndarray], np.ndarray]
    lipschitz_bound: float
    name: str = ""

    def __call__(self, u: np.ndarray) -> np.ndarray:
        return self.fn(u)


@dataclass(frozen=True)
class DiffusionMap:
    """Diffusion u -> sigma(u) in H; the declared constant also caps the
    linear growth |sigma(u)| <= C (1 + |u|)."""

    fn: Callable[[np.ndarray], np.ndarray]
    lipschitz_bound: float
    name: str = ""

    def __call__(self, u: np.ndarray) -> np.ndarray:
        return self.fn(u)


@dataclass(frozen=True)
class TrilinearForm:
    """Trilinear convection form via its bilinear companion.

    bilinear(u, v) returns duality coefficients of the bilinear term, so
    the trilinear value is the plain dot product with the third argument.
    """

    bilinear: Callable[[np.ndarray, np.ndarray], np.ndarray]
    continuity_constant: float
    name: str = ""
    tensor: Optional[np.ndarray] = field(default=None, repr=False)

    def value(self, u, v, w) -> np.ndarray:
        return np.einsum("...d,...d->...", self.bilinear(u, v), np.asarray(w, dtype=float))


def zero_form() -> TrilinearForm:
    return TrilinearForm(lambda u, v: np.zeros(np.broadcast(u, v).shape),
                         continuity_constant=_LIP_FLOOR, name="zero")


def form_from_tensor(tensor: np.ndarray, continuity_constant: float,
                     name: str = "") -> TrilinearForm:
    tensor = np.asarray(tensor, dtype=float)

    def bilinear(u, v):
        return np.einsum("ijl,...i,...j->...l", tensor,
                         np.asarray(u, dtype=float), np.asarray(v, dtype=float))

    return TrilinearForm(bilinear, continuity_constant, name=name, tensor=tensor)


@dataclass(frozen=True)
class ModelSpec:
    """One problem instance: spectrum, coefficients, and initial state."""

    space: SpaceConfig
    f: DriftMap
    sigma: DiffusionMap
    b: TrilinearForm
    u0: np.ndarray
    name: str = ""

    def __post_init__(self):
        u0 = np.asarray(self.u0, dtype=float)
        if u0.shape != (self.space.dim,):
            raise StructuralError("u0 dimension does not match the space")
        if float(np.linalg.norm(u0)) > 1.0:
            raise StructuralError("u0 must lie in the closed unit ball")
        object.__setattr__(self, "u0", u0)


def _checked_eval(fn, u, dim: int | None, what: str) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if dim is not None and u.shape[-1] != dim:
        raise StructuralError(f"{what}: state dimension {u.shape[-1]} != {dim}")
    out = np.asarray(fn(u), dtype=float)
    if out.shape != u.shape:
        raise CoefficientError(f"{what}: output shape {out.shape} != input {u.shape}")
    if not np.all(np.isfinite(out)):
        raise CoefficientError(f"{what}: non-finite output")
    return out


def eval_f(drift: DriftMap, u, dim: int | None = None) -> np.ndarray:
    """Evaluate the drift, guarding shape and finiteness."""
    return _checked_eval(drift.fn, u, dim, f"drift {drift.name or '<anon>'}")


def eval_sigma(diffusion: DiffusionMap, u, dim: int | None = None) -> np.ndarray:
    """Evaluate the diffusion, guarding shape and finiteness."""
    return _checked_eval(diffusion.fn, u, dim, f"diffusion {diffusion.name or '<anon>'}")


def eval_b(form: TrilinearForm, u, v, w) -> float:
    """Trilinear value with finiteness guard."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if not (u.shape == v.shape == w.shape):
        raise StructuralError("eval_b: argument dimensions differ")
    out = float(form.value(u, v, w))
    if not math.isfinite(out):
        raise CoefficientError("trilinear form produced a non-finite value")
    return out


# ---------------------------------------------------------------------------
# Fourier truncation of the 2-d periodic convection form
# ---------------------------------------------------------------------------

def canonical_wavevector_pairs(wavenumbers) -> list[tuple[int, int]]:
    """Validate a negation-closed set of nonzero integer wavevectors and
    return one representative per +/- pair, sorted by |k|^2 then lexicographically."""
    wvs = [tuple(int(c) for c in k) for k in wavenumbers]
    if any(len(k) != 2 for k in wvs):
        raise StructuralError("wavevectors must be 2-d integer vectors")
    wv_set = set(wvs)
    if len(wv_set) != len(wvs):
        raise StructuralError("duplicate wavevectors")
    if (0, 0) in wv_set:
        raise StructuralError("wavevectors must be nonzero")
    for k in wv_set:
        if (-k[0], -k[1]) not in wv_set:
            raise StructuralError(f"wavevector set not closed under negation: missing -{k}")
    reps = [k for k in wv_set if k[0] > 0 or (k[0] == 0 and k[1] > 0)]
    reps.sort(key=lambda k: (k[0] * k[0] + k[1] * k[1], k[0], k[1]))
    return reps


def nse_mode_eigenvalues(wavenumbers) -> np.ndarray:
    """Stokes eigenvalues |k|^2, two modes (cos, sin) per pair, sorted."""
    reps = canonical_wavevector_pairs(wavenumbers)
    return np.repeat([float(k[0] ** 2 + k[1] ** 2) for k in reps], 2)


def nse_space_config(wavenumbers) -> SpaceConfig:
    return SpaceConfig(nse_mode_eigenvalues(wavenumbers))


def nse_mode_table(wavenumbers):
    """Support wavevectors and complex vector coefficients of every mode.

    Mode 2p is the cosine stream mode of pair p, mode 2p+1 the sine mode:
    amplitude (k_perp / |k|) cos(k.x) / (sqrt(2) pi), which is orthonormal
    in the H inner product on the 2-pi-periodic box.  Returns integer
    wavevectors K (d, 2, 2) and coefficients C (d, 2, 2) complex.
    """
    reps = canonical_wavevector_pairs(wavenumbers)
    d = 2 * len(reps)
    K = np.zeros((d, 2, 2), dtype=int)
    C = np.zeros((d, 2, 2), dtype=complex)
    amp = 1.0 / (math.sqrt(2.0) * math.pi)
    for p, k in enumerate(reps):
        kvec = np.array(k, dtype=float)
        perp = np.array([-kvec[1], kvec[0]]) / np.linalg.norm(kvec)
        for sgn, slot in ((1, 0), (-1, 1)):
            K[2 * p, slot] = sgn * np.array(k)
            K[2 * p + 1, slot] = sgn * np.array(k)
            C[2 * p, slot] = 0.5 * amp * perp
            C[2 * p + 1, slot] = (-0.5j if sgn > 0 else 0.5j) * amp * perp
    return K, C


def nse_galerkin_form(cfg: SpaceConfig, wavenumbers,
                      continuity_margin: float = 1.3,
                      estimate_samples: int = 8000) -> TrilinearForm:
    """Convection form of the divergence-free Fourier truncation.

    The interaction tensor T[i, j, l] is the exact integral of
    (mode_i . grad) mode_j . mode_l over the periodic box, assembled from
    triad sums of complex exponentials.  T is antisymmetrized over (j, l),
    so b(u, v, w) = -b(u, w, v) holds to roundoff.  The continuity
    constant of the interpolation bound is estimated by random sampling
    and stored with a safety margin.
    """
    K, C = nse_mode_table(wavenumbers)
    d = K.shape[0]
    if d != cfg.dim:
        raise StructuralError(
            f"wavevector set yields {d} real modes, space has dim {cfg.dim}")

    lookup: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for l in range(d):
        for slot in range(2):
            lookup.setdefault(tuple(K[l, slot]), []).append((l, slot))

    T = np.zeros((d, d, d), dtype=complex)
    box = (2.0 * math.pi) ** 2
    for i in range(d):
        for ps in range(2):
            p, cp = K[i, ps], C[i, ps]
            for j in range(d):
                for qs in range(2):
                    q, cq = K[j, qs], C[j, qs]
                    adv = np.dot(cp, 1j * q.astype(float))
                    if adv == 0:
                        continue
                    r = (-(p[0] + q[0]), -(p[1] + q[1]))
                    for l, rs in lookup.get(r, ()):
                        T[i, j, l] += adv * np.dot(cq, C[l, rs])
    T *= box
    if np.max(np.abs(T.imag)) > 1e-12:
        raise CoefficientError("convection tensor has a non-real component")
    tensor = 0.5 * (T.real - T.real.transpose(0, 2, 1))

    gen = rng.generator(0, "nse-continuity", d)
    u = gen.standard_normal((estimate_samples, d))
    v = gen.standard_normal((estimate_samples, d))
    w = gen.standard_normal((estimate_samples, d))
    vals = np.abs(np.einsum("ijl,si,sj,sl->s", tensor, u, v, w))
    lam = cfg.eigenvalues
    hn = np.linalg.norm(u, axis=1), np.linalg.norm(w, axis=1)
    vn = (np.sqrt(np.einsum("si,i,si->s", u, lam, u)),
          np.sqrt(np.einsum("si,i,si->s", v, lam, v)),
          np.sqrt(np.einsum("si,i,si->s", w, lam, w)))
    den = np.sqrt(vn[0] * hn[0]) * np.sqrt(vn[2] * hn[1]) * vn[1]
    c_est = float(np.max(vals / np.maximum(den, 1e-300)))
    return form_from_tensor(tensor, continuity_margin * max(c_est, _LIP_FLOOR),
                            name=f"nse-torus-{d}")


# ---------------------------------------------------------------------------
# Assumption audit
# ---------------------------------------------------------------------------

def verify_assumptions(m: ModelSpec, samples: int, rng_seed: int) -> ExperimentReport:
    """Statistical audit of the standing assumptions on a model instance.

    Samples random pairs, points, and triples; records the worst observed
    homogeneous ratios against the declared constants.  Failures land in
    the report flags, never as exceptions.
    """
    if samples < 1:
        raise StructuralError("samples must be >= 1")
    d = m.space.dim
    lam = m.space.eigenvalues
    gen = rng.generator(rng_seed, "verify-assumptions")
    rep = ExperimentReport(name=f"verify-assumptions:{m.name or 'model'}", seed=rng_seed)

    def ball_spread(n):
        z = gen.standard_normal((n, d))
        radius = gen.uniform(0.0, 2.0, n)
        norms = np.maximum(np.linalg.norm(z, axis=1), 1e-300)
        return z * (radius / norms)[:, None]

    u, v = ball_spread(samples), ball_spread(samples)
    gap = np.linalg.norm(u - v, axis=1)
    ok = gap > 1e-9

    fu, fv = eval_f(m.f, u, d), eval_f(m.f, v, d)
    df = np.sqrt(np.einsum("si,i,si->s", fu - fv, 1.0 / lam, fu - fv))
    f_ratio = float(np.max(df[ok] / gap[ok])) if np.any(ok) else 0.0
    rep.add_check("f_lipschitz_worst", f_ratio, m.f.lipschitz_bound + _LIP_FLOOR)

    su, sv = eval_sigma(m.sigma, u, d), eval_sigma(m.sigma, v, d)
    ds = np.linalg.norm(su - sv, axis=1)
    s_ratio = float(np.max(ds[ok] / gap[ok])) if np.any(ok) else 0.0
    rep.add_check("sigma_lipschitz_worst", s_ratio, m.sigma.lipschitz_bound + _LIP_FLOOR)
    growth = np.linalg.norm(su, axis=1) / (1.0 + np.linalg.norm(u, axis=1))
    rep.add_check("sigma_growth_worst", float(np.max(growth)),
                  m.sigma.lipschitz_bound + _LIP_FLOOR)

    tu = gen.standard_normal((samples, d))
    tv = gen.standard_normal((samples, d))
    tw = gen.standard_normal((samples, d))
    bvw = np.einsum("sd,sd->s", m.b.bilinear(tu, tv), tw)
    bwv = np.einsum("sd,sd->s", m.b.bilinear(tu, tw), tv)
    antisym = np.abs(bvw + bwv) / (1.0 + np.abs(bvw))
    rep.add_check("b_antisym_worst", float(np.max(antisym)), 1e-12 + 1e-9)

    vn_u = np.sqrt(np.einsum("si,i,si->s", tu, lam, tu))
    vn_v = np.sqrt(np.einsum("si,i,si->s", tv, lam, tv))
    vn_w = np.sqrt(np.einsum("si,i,si->s", tw, lam, tw))
    hn_u = np.linalg.norm(tu, axis=1)
    hn_w = np.linalg.norm(tw, axis=1)
    den = np.sqrt(vn_u * hn_u) * np.sqrt(vn_w * hn_w) * vn_v
    interp = np.abs(bvw) / np.maximum(den, 1e-300)
    rep.add_check("b_interp_worst", float(np.max(interp)),
                  m.b.continuity_constant + 1e-9)

    rep.add_check("u0_h_norm", h_norm(m.u0), 1.0)
    rep.add_metric("samples", samples)
    return rep


def dual_bilinear_bound_ratio(m: ModelSpec, u: np.ndarray) -> float:
    """Ratio of the dual norm of the self-interaction to the product bound."""
    bu = m.b.bilinear(u, u)
    den = math.sqrt(v_norm_sq(u, m.space)) * h_norm(u)
    return math.sqrt(dual_norm_sq(bu, m.space)) / max(den, 1e-300)
