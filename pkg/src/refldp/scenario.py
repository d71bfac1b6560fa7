"""Scenario files: flat `key = value` text with dotted section prefixes.

One scenario per file.  A scenario pins everything a run needs: the model
instance and its parameters, the stepper, the experiment kind with its
parameters, the seed, and the output directory, so identical files (plus
seed) reproduce identical reports up to timestamps.
"""

from dataclasses import dataclass, field

from .errors import ConfigError

EXPERIMENTS = ("verify-assumptions", "penalization-sweep", "definition-checks",
               "weak-continuity", "condition-i", "rate", "mc-ldp")


def _parse_scalar(text: str):
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def _parse_value(text: str):
    text = text.strip()
    if "," in text:
        return [_parse_scalar(part.strip()) for part in text.split(",") if part.strip()]
    return _parse_scalar(text)


@dataclass
class Scenario:
    name: str
    seed: int
    experiment: str
    output: str
    model: dict = field(default_factory=dict)
    stepper: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    def group(self, prefix: str) -> dict:
        return self.params.get(prefix, {})


def parse_scenario(path: str) -> Scenario:
    """Parse a scenario file; malformed lines are reported by number."""
    flat = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}")
    for lineno, line in enumerate(lines, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if "=" not in text:
            raise ConfigError(f"{path}: line {lineno}: expected 'key = value'")
        key, _, value = text.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"{path}: line {lineno}: empty key")
        if key in flat:
            raise ConfigError(f"{path}: line {lineno}: duplicate key {key!r}")
        flat[key] = _parse_value(value)

    for required in ("name", "seed", "experiment", "model.instance",
                     "stepper.dt", "stepper.T"):
        if required not in flat:
            raise ConfigError(f"{path}: missing required key {required!r}")
    experiment = str(flat["experiment"])
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"{path}: unknown experiment {experiment!r}; "
                          f"known: {', '.join(EXPERIMENTS)}")

    model, stepper, params = {}, {}, {}
    for key, value in flat.items():
        if key in ("name", "seed", "experiment", "output"):
            continue
        if "." not in key:
            raise ConfigError(f"{path}: top-level key {key!r} not recognized")
        prefix, _, rest = key.partition(".")
        if prefix == "model":
            model[rest] = value
        elif prefix == "stepper":
            stepper[rest] = value
        else:
            params.setdefault(prefix, {})[rest] = value

    return Scenario(
        name=str(flat["name"]),
        seed=int(flat["seed"]),
        experiment=experiment,
        output=str(flat.get("output", f"out/{flat['name']}")),
        model=model,
        stepper=stepper,
        params=params,
        raw=flat,
    )
