"""Structured experiment reports: metrics, thresholds, pass flags.

Every pass flag is backed by a named metric and the threshold it was
compared against, so a report is self-describing.  Metric maps serialize
with sorted keys and shortest-roundtrip float reprs, which makes
determinism checks a byte comparison.
"""

import json
import math
from dataclasses import dataclass, field
from typing import Optional


def _finite_float(value) -> float:
    v = float(value)
    if not math.isfinite(v):
        raise ValueError(f"report metrics must be finite, got {value!r}")
    return v


@dataclass
class ExperimentReport:
    name: str
    seed: Optional[int] = None
    metrics: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)
    pass_flags: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    artifacts: list = field(default_factory=list)
    scenario: dict = field(default_factory=dict)
    wall_time_s: float = 0.0

    def add_metric(self, key: str, value):
        self.metrics[key] = _finite_float(value)

    def add_check(self, key: str, value, threshold, ok: Optional[bool] = None,
                  mode: str = "<="):
        """Record metric + threshold + flag together.

        When ok is omitted the flag is value <= threshold (or >= for
        mode ">=").
        """
        v = _finite_float(value)
        t = _finite_float(threshold)
        self.metrics[key] = v
        self.thresholds[key] = t
        if ok is None:
            ok = (v <= t) if mode == "<=" else (v >= t)
        self.pass_flags[key] = bool(ok)

    def add_flag(self, key: str, ok: bool, value, threshold):
        self.add_check(key, value, threshold, ok=ok)

    def merge(self, other: "ExperimentReport", prefix: str = ""):
        for k, v in other.metrics.items():
            self.metrics[prefix + k] = v
        for k, v in other.thresholds.items():
            self.thresholds[prefix + k] = v
        for k, v in other.pass_flags.items():
            self.pass_flags[prefix + k] = v
        self.warnings.extend(other.warnings)

    @property
    def passed(self) -> bool:
        return all(self.pass_flags.values())

    def metric_map_json(self) -> str:
        """Canonical serialization of the metric map (determinism probe)."""
        return json.dumps(self.metrics, sort_keys=True)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "seed": self.seed,
            "metrics": dict(sorted(self.metrics.items())),
            "thresholds": dict(sorted(self.thresholds.items())),
            "pass_flags": dict(sorted(self.pass_flags.items())),
            "passed": self.passed,
            "warnings": list(self.warnings),
            "artifacts": list(self.artifacts),
            "scenario": self.scenario,
            "wall_time_s": self.wall_time_s,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)
