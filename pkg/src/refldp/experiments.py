"""Experiment orchestration: scenario -> model/stepper -> report + artifacts."""

import os
import time

import numpy as np

from .controls import constant_control, zero_control
from .dynamics import ModelSpec, verify_assumptions
from .errors import ConfigError
from .instances import build_model
from .rate import (OptimizerSettings, TargetEvent, evaluate_rate,
                   ldp_slope_fit, lq_rate_dp_oracle, verify_condition_i)
from .reflected import DEFAULT_LADDER, check_solution_properties, solve_reflected
from .report import ExperimentReport
from .scenario import Scenario, parse_scenario
from .skeleton import gamma0, weak_continuity_probe
from .space import xt_distance
from .stepping import (StepperConfig, penalty_diagnostics, solve_penalized,
                       tol_reflect)
from .storage import (ensure_dir, read_trajectory, write_control,
                      write_report, write_trajectory)
from .trajectory import Trajectory


def build_stepper(scn: Scenario) -> StepperConfig:
    s = scn.stepper
    try:
        return StepperConfig(dt=float(s["dt"]), T=float(s["T"]),
                             penalty_n=float(s.get("penalty_n", 1e4)),
                             scheme=str(s.get("scheme", "semi-implicit-A")))
    except KeyError as exc:
        raise ConfigError(f"scenario {scn.name}: missing stepper key {exc}")


def build_scenario_model(scn: Scenario) -> ModelSpec:
    params = dict(scn.model)
    instance = str(params.pop("instance"))
    return build_model(instance, params)


def _ladder(group: dict) -> tuple:
    ladder = group.get("n_ladder")
    if ladder is None:
        return DEFAULT_LADDER
    if not isinstance(ladder, list):
        ladder = [ladder]
    return tuple(float(n) for n in ladder)


def _scenario_control(group: dict, cfg: StepperConfig, key: str = "control_value"):
    value = float(group.get(key, 0.0))
    if value == 0.0:
        return zero_control(cfg.T)
    return constant_control(value, cfg.T)


def _build_event(scn: Scenario) -> TargetEvent:
    ev = scn.group("event")
    if not ev:
        raise ConfigError(f"scenario {scn.name}: experiment needs an event.* group")
    kind = str(ev.get("kind", ""))
    tolerance = float(ev.get("tolerance", 1e-3))
    center = ev.get("center")
    normal = ev.get("normal")
    as_vec = (lambda v: np.atleast_1d(np.asarray(v, dtype=float))
              if v is not None else None)
    return TargetEvent(kind=kind, tolerance=tolerance, center=as_vec(center),
                       radius=(float(ev["radius"]) if "radius" in ev else None),
                       normal=as_vec(normal),
                       level=(float(ev["level"]) if "level" in ev else None))


def _optimizer_settings(scn: Scenario) -> OptimizerSettings:
    o = scn.group("optimizer")
    rho = o.get("rho_schedule")
    if rho is not None and not isinstance(rho, list):
        rho = [rho]
    return OptimizerSettings(
        control_dim=int(o.get("control_dim", 16)),
        rho_schedule=tuple(float(r) for r in rho) if rho else (1e1, 1e2, 1e3, 1e4),
        starts=int(o.get("starts", 8)),
        seed=int(o.get("seed", scn.seed)),
        fd_step_rel=float(o.get("fd_step_rel", 1e-4)),
        maxiter=int(o.get("maxiter", 80)),
        start_scale=float(o.get("start_scale", 0.5)),
        n_ladder=_ladder(o),
    )


# ---------------------------------------------------------------------------
# experiment bodies: return (report, artifacts) with artifacts a dict
# filename -> writer(path)
# ---------------------------------------------------------------------------

def _exp_verify_assumptions(scn, model, cfg, jobs):
    samples = int(scn.group("audit").get("samples", 10000))
    rep = verify_assumptions(model, samples, scn.seed)
    return rep, {}


def _exp_penalization_sweep(scn, model, cfg, jobs):
    g = scn.group("sweep")
    ns = g.get("n_values", list(DEFAULT_LADDER))
    ns = [float(n) for n in (ns if isinstance(ns, list) else [ns])]
    if len(ns) < 2 or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ConfigError("sweep.n_values must be increasing with length >= 2")
    control = _scenario_control(g, cfg)
    drift_bound = float(g.get("drift_bound", g.get("oracle_drift", 1.0)))

    rep = ExperimentReport(name=scn.name, seed=scn.seed)
    trajs, sup_defects, work_l1 = [], [], []
    for n in ns:
        traj = solve_penalized(model, cfg.with_penalty(n), control)
        diag = penalty_diagnostics(traj, cfg.with_penalty(n))
        trajs.append(traj)
        sup_defects.append(diag.metrics["sup_defect"])
        work_l1.append(diag.metrics["n_defect_l1"])
        for key, value in diag.metrics.items():
            rep.add_metric(f"{key}_n_{n:g}", value)
        bound = (1.0 + tol_reflect(n, cfg.dt, drift_bound)) ** 4
        rep.add_check(f"sup4_bounded_n_{n:g}", diag.metrics["sup_h_norm_4"], bound)

    dists = [xt_distance(a, b, model.space) for a, b in zip(trajs, trajs[1:])]
    for i, dist in enumerate(dists):
        rep.add_metric(f"ladder_distance_{i}", dist)
    contracting = all(d2 < d1 or d1 <= 1e-14 for d1, d2 in zip(dists, dists[1:]))
    rep.add_flag("ladder_distances_decreasing", contracting,
                 float(contracting), 1.0)

    oracle_drift = g.get("oracle_drift")
    if oracle_drift is not None:
        rtol = float(g.get("defect_rtol", 0.2))
        for n, sup in zip(ns, sup_defects):
            target = float(oracle_drift) / n
            rel = abs(sup - target) / target
            rep.add_check(f"defect_oracle_rel_err_n_{n:g}", rel, rtol)

    monotone = all(b <= a * 1.05 + 1e-15 for a, b in zip(sup_defects, sup_defects[1:]))
    rep.add_flag("sup_defect_monotone", monotone, float(monotone), 1.0)
    active = [w for w in work_l1 if w > 1e-14]
    if len(active) >= 2:
        ratio = max(active) / min(active)
        rep.add_check("penalty_work_spread", ratio, 2.0)
    return rep, {"trajectory.csv": lambda p: write_trajectory(p, trajs[-1])}


def _exp_definition_checks(scn, model, cfg, jobs):
    g = scn.group("checks")
    probes = int(g.get("probes", 1000))
    eps = float(g.get("eps", 0.0))
    ladder = _ladder(g)
    control = _scenario_control(g, cfg)
    traj, cert = solve_reflected(model, cfg, control, eps, scn.seed, ladder)
    rep = ExperimentReport(name=scn.name, seed=scn.seed)
    rep.merge(cert, prefix="cert_")
    props = check_solution_properties(traj, model, probes, scn.seed)
    rep.merge(props)

    dists = [cert.metrics[f"ladder_distance_{i}"] for i in range(len(ladder) - 1)]
    contracting = all(d2 < d1 or d1 <= 1e-14 for d1, d2 in zip(dists, dists[1:]))
    if bool(g.get("expect_ladder_contraction", True)):
        rep.add_flag("ladder_contracting", contracting, float(contracting), 1.0)
    return rep, {"trajectory.csv": lambda p: write_trajectory(p, traj)}


def _exp_weak_continuity(scn, model, cfg, jobs):
    g = scn.group("probe")
    base = constant_control(float(g.get("base_value", 0.0)), cfg.T,
                            cells=cfg.n_steps)
    eps_list = g.get("eps_list", [0.2, 0.1, 0.05, 0.025])
    budget = g.get("energy_budget")
    rep = weak_continuity_probe(
        model, cfg, base, float(g.get("amplitude", 1.0)),
        [float(e) for e in eps_list], threshold=float(g["threshold"]),
        energy_budget_N=float(budget) if budget is not None else None,
        decrease_factor=float(g.get("factor", 1.5)), n_ladder=_ladder(g))
    rep.name = scn.name
    rep.seed = scn.seed
    skel = gamma0(model, cfg, base, _ladder(g))
    return rep, {"trajectory.csv": lambda p: write_trajectory(p, skel)}


def _exp_condition_i(scn, model, cfg, jobs):
    g = scn.group("cond")
    control = _scenario_control(g, cfg, key="k_value")
    eps_list = [float(e) for e in g.get("eps_list", [0.1, 0.01, 0.001])]
    budget = g.get("energy_budget")
    rep = verify_condition_i(
        model, cfg, [control], eps_list, scn.seed,
        delta=float(g.get("delta", 0.05)), samples=int(g.get("samples", 1000)),
        floor=float(g.get("floor", 0.01)),
        energy_budget_N=float(budget) if budget is not None else None,
        n_ladder=_ladder(g))
    rep.name = scn.name
    skel = gamma0(model, cfg, control, _ladder(g))
    return rep, {"trajectory.csv": lambda p: write_trajectory(p, skel)}


def _lq_coefficients(scn: Scenario, cfg: StepperConfig):
    """Scalar affine step coefficients implied by the scenario's model."""
    mp = scn.model
    lam = mp.get("eigenvalues", mp.get("lambda1", 1.0))
    if isinstance(lam, list):
        if len(lam) != 1:
            raise ConfigError("lq-dp oracle needs a one-dimensional model")
        lam = lam[0]
    lam = float(lam)
    gamma = float(mp.get("gamma", 0.0))
    sigma_amp = float(mp.get("sigma_amp", 1.0))
    forcing = float(mp.get("forcing", 0.0))
    if sigma_amp == 0.0:
        raise ConfigError("lq-dp oracle needs sigma_amp != 0")
    denom = 1.0 + cfg.dt * lam
    return ((1.0 - cfg.dt * gamma) / denom, cfg.dt * sigma_amp / denom,
            cfg.dt * forcing / denom)


def _oracle_interval(event: TargetEvent):
    if event.kind == "terminal-ball":
        if event.center.size != 1:
            raise ConfigError("lq-dp oracle needs a scalar event")
        c = float(event.center[0])
        return c - event.radius, c + event.radius
    if event.kind == "terminal-halfspace":
        if event.normal.size != 1 or event.normal[0] == 0.0:
            raise ConfigError("lq-dp oracle needs a scalar halfspace")
        n0 = float(event.normal[0])
        lo = event.level / n0
        return (lo, lo + 2.0 * (abs(lo) + 1.0)) if n0 > 0 else \
            (lo - 2.0 * (abs(lo) + 1.0), lo)
    raise ConfigError("lq-dp oracle supports terminal events only")


def _exp_rate(scn, model, cfg, jobs):
    event = _build_event(scn)
    opt = _optimizer_settings(scn)
    res = evaluate_rate(model, cfg, event, opt)
    rep = ExperimentReport(name=scn.name, seed=scn.seed)
    g = scn.group("rate")
    expect_feasible = bool(g.get("expect_feasible", True))
    rep.add_flag("feasibility_as_expected", res.feasible == expect_feasible,
                 float(res.feasible), float(expect_feasible))
    rep.add_metric("constraint_residual", res.constraint_residual)
    rep.add_metric("iterations", res.iterations)
    if res.feasible:
        rep.add_metric("rate_value", res.rate_value)

    oracle = scn.group("oracle")
    if oracle.get("kind") == "lq-dp" and res.feasible:
        if model.space.dim != 1:
            raise ConfigError("lq-dp oracle needs a one-dimensional model")
        a, b, c = _lq_coefficients(scn, cfg)
        z_lo, z_hi = _oracle_interval(event)
        val = lq_rate_dp_oracle(a, b, c, float(model.u0[0]), cfg.n_steps,
                                cfg.dt, z_lo, z_hi)
        rep.add_metric("oracle_rate", val)
        rep.add_check("oracle_rel_dev", abs(res.rate_value - val) / max(val, 1e-12),
                      float(oracle.get("rtol", 0.02)))
    artifacts = {
        "optimal_control.csv": lambda p: write_control(p, res.optimal_control),
    }
    return rep, artifacts


def _exp_mc_ldp(scn, model, cfg, jobs):
    event = _build_event(scn)
    g = scn.group("mc")
    opt = _optimizer_settings(scn)
    rep = ldp_slope_fit(
        model, cfg, event, [float(e) for e in g.get("eps_list", [0.2, 0.1, 0.05])],
        samples_per_eps=int(g.get("samples", 10000)), seed=scn.seed, opt=opt,
        criterion=str(g.get("criterion", "extrapolate")),
        rel_tol=float(g.get("rel_tol", 0.25)), n_ladder=_ladder(g))
    rep.name = scn.name
    return rep, {}


_EXPERIMENTS = {
    "verify-assumptions": _exp_verify_assumptions,
    "penalization-sweep": _exp_penalization_sweep,
    "definition-checks": _exp_definition_checks,
    "weak-continuity": _exp_weak_continuity,
    "condition-i": _exp_condition_i,
    "rate": _exp_rate,
    "mc-ldp": _exp_mc_ldp,
}


def run_scenario(scn: Scenario, jobs: int = 1,
                 output_override: str | None = None,
                 seed_override: int | None = None) -> ExperimentReport:
    """Execute a parsed scenario and write its artifacts."""
    if seed_override is not None:
        scn.seed = int(seed_override)
        scn.raw["seed"] = int(seed_override)
    started = time.monotonic()
    model = build_scenario_model(scn)
    cfg = build_stepper(scn)
    report, artifacts = _EXPERIMENTS[scn.experiment](scn, model, cfg, jobs)
    report.name = scn.name
    report.seed = scn.seed
    report.scenario = dict(scn.raw)

    out_dir = output_override or scn.output
    ensure_dir(out_dir)
    for fname, writer in artifacts.items():
        path = os.path.join(out_dir, fname)
        writer(path)
        report.artifacts.append(path)
    report.wall_time_s = time.monotonic() - started
    report_path = os.path.join(out_dir, "report.json")
    report.artifacts.append(report_path)
    write_report(report_path, report)
    return report


def run_scenario_file(path: str, jobs: int = 1,
                      output_override: str | None = None,
                      seed_override: int | None = None) -> ExperimentReport:
    return run_scenario(parse_scenario(path), jobs=jobs,
                        output_override=output_override,
                        seed_override=seed_override)


def replay(trajectory_csv: str, scenario_path: str,
           output_override: str | None = None) -> ExperimentReport:
    """Re-run conformance checks on a stored trajectory without solving."""
    scn = parse_scenario(scenario_path)
    model = build_scenario_model(scn)
    cfg = build_stepper(scn)
    traj = read_trajectory(trajectory_csv)
    if traj.dim != model.space.dim:
        raise ConfigError(
            f"trajectory dimension {traj.dim} does not match model "
            f"dimension {model.space.dim}")
    probes = int(scn.group("checks").get("probes", 1000))
    rep = ExperimentReport(name=f"replay:{scn.name}", seed=scn.seed,
                           scenario=dict(scn.raw))
    rep.merge(check_solution_properties(traj, model, probes, scn.seed))
    rep.merge(penalty_diagnostics(traj, cfg), prefix="diag_")
    if output_override:
        ensure_dir(output_override)
        path = os.path.join(output_override, "replay_report.json")
        rep.artifacts.append(path)
        write_report(path, rep)
    return rep
