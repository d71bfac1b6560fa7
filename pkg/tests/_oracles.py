"""Independent oracles used by the tests.

Everything here recomputes expected values through routes that share no
code with the package internals: direct convolution sums and real-space
quadrature for the convection form, the closed-form least-norm value for
the discrete steering problem, exact antiderivatives for sinusoid
pairings, and a plain per-sample re-simulation of the reflected sampler.
"""

import math

import numpy as np

TWO_PI = 2.0 * math.pi


def _canonical_pairs(wavenumbers):
    reps = sorted({tuple(int(c) for c in k) for k in wavenumbers
                   if k[0] > 0 or (k[0] == 0 and k[1] > 0)},
                  key=lambda k: (k[0] ** 2 + k[1] ** 2, k[0], k[1]))
    return reps


def _mode_coefficients(wavenumbers):
    """Complex Fourier coefficients of every real mode, derived from the
    documented cos/sin stream-mode convention (independent assembly)."""
    reps = _canonical_pairs(wavenumbers)
    amp = 1.0 / (math.sqrt(2.0) * math.pi)
    table = []
    for k in reps:
        kv = np.array(k, dtype=float)
        perp = np.array([-kv[1], kv[0]]) / np.hypot(*kv)
        cos_mode = {k: 0.5 * amp * perp, (-k[0], -k[1]): 0.5 * amp * perp}
        sin_mode = {k: -0.5j * amp * perp, (-k[0], -k[1]): 0.5j * amp * perp}
        table.append(cos_mode)
        table.append(sin_mode)
    return table


def _field_coefficients(table, coeffs):
    field = {}
    for ci, mode in zip(coeffs, table):
        for wv, vec in mode.items():
            field[wv] = field.get(wv, 0.0) + ci * vec
    return field


def convection_convolution_oracle(wavenumbers, u, v, w) -> float:
    """b(u, v, w) by brute-force convolution over Fourier coefficients."""
    table = _mode_coefficients(wavenumbers)
    fu = _field_coefficients(table, np.asarray(u, dtype=float))
    fv = _field_coefficients(table, np.asarray(v, dtype=float))
    fw = _field_coefficients(table, np.asarray(w, dtype=float))
    total = 0.0 + 0.0j
    for p, cu in fu.items():
        for q, cv in fv.items():
            r = (-p[0] - q[0], -p[1] - q[1])
            cw = fw.get(r)
            if cw is None:
                continue
            total += np.dot(cu, 1j * np.array(q, dtype=float)) * np.dot(cv, cw)
    return float((TWO_PI ** 2 * total).real)


def convection_convolution_oracle_batch(wavenumbers, us, vs, ws) -> np.ndarray:
    """Vectorized convolution oracle for (B, d) coefficient batches."""
    table = _mode_coefficients(wavenumbers)
    entries = []  # (mode index, wavevector, coefficient vector)
    for mode_idx, mode in enumerate(table):
        for wv, vec in mode.items():
            entries.append((mode_idx, wv, vec))
    modes = np.array([e[0] for e in entries])
    wvs = np.array([e[1] for e in entries], dtype=float)
    cofs = np.array([e[2] for e in entries])
    index_of = {}
    for a, e in enumerate(entries):
        index_of.setdefault(e[1], []).append(a)

    triples = []
    for a in range(len(entries)):
        for b in range(len(entries)):
            r = (int(-wvs[a, 0] - wvs[b, 0]), int(-wvs[a, 1] - wvs[b, 1]))
            for c in index_of.get(r, ()):
                triples.append((a, b, c))
    ta, tb, tc = (np.array([t[i] for t in triples]) for i in range(3))

    us, vs, ws = (np.asarray(x, dtype=float) for x in (us, vs, ws))
    cu = us[:, modes[ta]][..., None] * cofs[ta]
    cv = vs[:, modes[tb]][..., None] * cofs[tb]
    cw = ws[:, modes[tc]][..., None] * cofs[tc]
    adv = np.einsum("btc,tc->bt", cu, 1j * wvs[tb])
    pair = np.einsum("btc,btc->bt", cv, cw)
    return (TWO_PI ** 2 * (adv * pair).sum(axis=1)).real


def convection_quadrature_oracle(wavenumbers, u, v, w, grid_n: int = 48) -> float:
    """b(u, v, w) by rectangle-rule quadrature of the real-space integrand.

    Fields are evaluated directly from cos/sin mode formulas on a uniform
    periodic grid; the rule is exact for trigonometric polynomials below
    the grid frequency, so only roundoff remains.
    """
    reps = _canonical_pairs(wavenumbers)
    amp = 1.0 / (math.sqrt(2.0) * math.pi)
    xs = np.arange(grid_n) * TWO_PI / grid_n
    X, Y = np.meshgrid(xs, xs, indexing="ij")

    def eval_field(coeffs, derivative=None):
        out = np.zeros((2, grid_n, grid_n))
        for p, k in enumerate(reps):
            kv = np.array(k, dtype=float)
            perp = amp * np.array([-kv[1], kv[0]]) / np.hypot(*kv)
            phase = k[0] * X + k[1] * Y
            if derivative is None:
                c_part, s_part = np.cos(phase), np.sin(phase)
            else:
                kd = float(k[derivative])
                c_part, s_part = -kd * np.sin(phase), kd * np.cos(phase)
            for comp in range(2):
                out[comp] += perp[comp] * (coeffs[2 * p] * c_part
                                           + coeffs[2 * p + 1] * s_part)
        return out

    uf = eval_field(u)
    wf = eval_field(w)
    integrand = np.zeros((grid_n, grid_n))
    for comp in range(2):
        dv_dx = eval_field(v, derivative=0)[comp]
        dv_dy = eval_field(v, derivative=1)[comp]
        integrand += (uf[0] * dv_dx + uf[1] * dv_dy) * wf[comp]
    return float(integrand.mean() * TWO_PI ** 2)


def lq_least_norm_value(lam: float, gamma: float, sigma_amp: float, dt: float,
                        n_steps: int, u0: float, target: float) -> float:
    """Closed-form minimum of the discrete steering energy to an exact
    terminal target under u+ = ((1 - dt*gamma) u + dt*sigma_amp*k)/(1 + dt*lam)."""
    a = (1.0 - dt * gamma) / (1.0 + dt * lam)
    b = dt * sigma_amp / (1.0 + dt * lam)
    gains = np.array([a ** (n_steps - 1 - j) * b for j in range(n_steps)])
    delta = target - a ** n_steps * u0
    return 0.5 * delta ** 2 / float(np.dot(gains, gains) / dt)


def sinusoid_pairing_exact(eps: float, grid: np.ndarray, phi_vals: np.ndarray) -> float:
    """Exact integral of sin(t/eps) against a piecewise-linear function."""
    total = 0.0
    for t0, t1, p0, p1 in zip(grid[:-1], grid[1:], phi_vals[:-1], phi_vals[1:]):
        slope = (p1 - p0) / (t1 - t0)
        a0 = p0 - slope * t0

        def anti(t):
            return (-eps * math.cos(t / eps) * a0
                    + slope * (eps ** 2 * math.sin(t / eps) - eps * t * math.cos(t / eps)))
        total += anti(t1) - anti(t0)
    return total


def resimulate_reflected_frequency(lam, gamma, sigma_amp, u0, dt, n_steps,
                                   eps, level, samples, seed) -> tuple:
    """Plain per-sample re-simulation of the small-noise reflected sampler.

    Same scheme written out long-hand (scalar loop, implicit radial
    penalty at n = 1e4); independent seed stream.  Returns the frequency
    of the terminal halfspace u(T) >= level and its standard error.
    """
    n_pen = 1e4
    rng = np.random.default_rng(seed)
    hits = 0
    root_eps_dt = math.sqrt(eps * dt)
    for _ in range(samples):
        u = u0
        for _ in range(n_steps):
            w = u + dt * (-gamma * u) + sigma_amp * root_eps_dt * rng.standard_normal()
            v = w / (1.0 + dt * lam)
            if abs(v) > 1.0:
                r = (abs(v) + dt * n_pen) / (1.0 + dt * n_pen)
                v = math.copysign(r, v)
            u = v
        if min(u, 1.0) >= level:
            hits += 1
    p = hits / samples
    return p, math.sqrt(max(p * (1 - p), 1e-12) / samples)
