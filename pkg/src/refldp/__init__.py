"""refldp: a numerical laboratory for stochastic evolution equations
reflected in the closed unit ball, their penalized approximations, the
controlled skeleton dynamics, and small-noise large-deviation diagnostics."""

from .controls import (Control, NoisePath, constant_control, control_energy,
                       in_SN, oscillatory_family, sample_noise, zero_control)
from .dynamics import (DiffusionMap, DriftMap, ModelSpec, TrilinearForm,
                       eval_b, eval_f, eval_sigma, nse_galerkin_form,
                       nse_space_config, verify_assumptions, zero_form)
from .errors import (BlowUpError, CoefficientError, ConfigError,
                     StructuralError)
from .rate import (OptimizerSettings, RateResult, TargetEvent, evaluate_rate,
                   ldp_slope_fit, lq_rate_dp_oracle, mc_probability,
                   verify_condition_i, verify_condition_ii)
from .reflected import (check_solution_properties, sample_small_noise,
                        solve_reflected)
from .report import ExperimentReport
from .skeleton import gamma0, lipschitz_probe, weak_continuity_probe
from .space import (SpaceConfig, apply_A, h_inner, h_norm, project_ball,
                    v_norm_sq, xt_distance)
from .stepping import (StepperConfig, penalty_diagnostics, solve_penalized,
                       step_penalized, tol_reflect)
from .trajectory import Trajectory

__version__ = "0.1.0"

__all__ = [
    "BlowUpError", "CoefficientError", "ConfigError", "Control",
    "DiffusionMap", "DriftMap", "ExperimentReport", "ModelSpec", "NoisePath",
    "OptimizerSettings", "RateResult", "SpaceConfig", "StepperConfig",
    "StructuralError", "TargetEvent", "Trajectory", "TrilinearForm",
    "apply_A", "check_solution_properties", "constant_control",
    "control_energy", "eval_b", "eval_f", "eval_sigma", "evaluate_rate",
    "gamma0", "h_inner", "h_norm", "in_SN", "ldp_slope_fit",
    "lipschitz_probe", "lq_rate_dp_oracle", "mc_probability",
    "nse_galerkin_form", "nse_space_config", "oscillatory_family",
    "penalty_diagnostics", "project_ball", "sample_noise",
    "sample_small_noise", "solve_penalized", "solve_reflected",
    "step_penalized", "tol_reflect", "v_norm_sq", "verify_assumptions",
    "verify_condition_i", "verify_condition_ii", "weak_continuity_probe",
    "xt_distance", "zero_control", "zero_form",
]
