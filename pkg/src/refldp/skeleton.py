"""The deterministic controlled solution map and its continuity probes.

gamma0 sends a control to the reflected deterministic trajectory driven by
it.  The weak-continuity probe drives gamma0 with the oscillatory family
(which converges weakly but not strongly to its base) and reports the
decay of path-space distances; that decay is the numerical content of the
continuity-in-the-driving-signal condition behind the large-deviation
criteria.
"""

import numpy as np

from .controls import (Control, control_distance, control_energy, in_SN,
                       oscillatory_family)
from .dynamics import ModelSpec
from .errors import StructuralError
from .report import ExperimentReport
from .reflected import DEFAULT_LADDER, solve_reflected
from .space import xt_distance
from .stepping import StepperConfig
from .trajectory import Trajectory


def gamma0(m: ModelSpec, cfg: StepperConfig, k: Control,
           n_ladder=DEFAULT_LADDER) -> Trajectory:
    """Deterministic reflected trajectory driven by the control k."""
    traj, _ = solve_reflected(m, cfg, k, eps=0.0, seed=0, n_ladder=n_ladder)
    return traj


def weak_continuity_probe(m: ModelSpec, cfg: StepperConfig, base: Control,
                          amplitude: float, eps_list,
                          threshold: float,
                          energy_budget_N: float | None = None,
                          decrease_factor: float = 1.5,
                          n_ladder=DEFAULT_LADDER) -> ExperimentReport:
    """Distances from the base skeleton along the oscillatory family.

    eps_list must decrease.  Pass requires the distance sequence to shrink
    by at least decrease_factor from first to last and the last entry to
    sit below the declared threshold.
    """
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise StructuralError("eps_list must be strictly decreasing")
    family = [oscillatory_family(base, amplitude, e) for e in eps_list]
    if energy_budget_N is None:
        energy_budget_N = 2.0 * control_energy(base) + amplitude ** 2 * base.horizon
    for e, k in zip(eps_list, family):
        if not in_SN(k, energy_budget_N):
            raise StructuralError(
                f"family member at eps={e} leaves the declared energy ball "
                f"({control_energy(k):.6g} > {energy_budget_N:.6g})")

    ref = gamma0(m, cfg, base, n_ladder)
    rep = ExperimentReport(name="weak-continuity")
    dists = []
    for e, k in zip(eps_list, family):
        dist = xt_distance(gamma0(m, cfg, k, n_ladder), ref, m.space)
        dists.append(dist)
        rep.add_metric(f"xt_distance_eps_{e:g}", dist)
        rep.add_metric(f"control_energy_eps_{e:g}", control_energy(k))
    rep.add_metric("energy_budget_N", energy_budget_N)

    first, last = dists[0], dists[-1]
    ratio = first / last if last > 0.0 else float(np.inf) if first > 0.0 else 1.0
    degenerate = first <= 1e-14 and last <= 1e-14
    if np.isfinite(ratio):
        rep.add_check("decrease_factor", ratio, decrease_factor,
                      ok=degenerate or ratio >= decrease_factor, mode=">=")
    else:
        rep.add_check("decrease_factor", float(np.finfo(float).max),
                      decrease_factor, ok=True, mode=">=")
    rep.add_check("final_distance", last, threshold)
    return rep


def lipschitz_probe(m: ModelSpec, cfg: StepperConfig, k1: Control, k2: Control,
                    n_ladder=DEFAULT_LADDER) -> ExperimentReport:
    """Sensitivity diagnostic: path-space distance of two controlled runs
    against the strong-norm distance of the controls."""
    dist = xt_distance(gamma0(m, cfg, k1, n_ladder), gamma0(m, cfg, k2, n_ladder),
                       m.space)
    rep = ExperimentReport(name="lipschitz-probe")
    rep.add_metric("xt_distance", dist)
    rep.add_metric("control_l2_distance", control_distance(k1, k2))
    return rep
