"""Experiment configuration and the ``key = value`` config-file format."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from ..cspsa import GainSchedule

EXPERIMENTS = (
    "schmidt_sweep",
    "concurrence_sweep",
    "haar_average",
    "werner_sweep",
    "mixed_set",
    "mse_curve",
    "seesaw_oracle",
)

DEFAULT_GRIDS = {
    "schmidt_sweep": tuple(np.round(np.arange(1, 11) * 0.05, 10)),
    "concurrence_sweep": tuple(np.round(np.arange(1, 11) * 0.1, 10)),
    "werner_sweep": tuple(np.round(np.arange(1, 11) * 0.1, 10)),
    "mse_curve": (100.0, 1000.0, 10000.0),
    "haar_average": (),
    "mixed_set": (),
    "seesaw_oracle": (),
}
DEFAULT_K_MAX = {"werner_sweep": 75, "mixed_set": 75, "haar_average": 75, "mse_curve": 200}

# config-file keys and CLI flag names mapped to ExperimentConfig fields
KEY_ALIASES = {
    "experiment": "experiment",
    "grid": "grid",
    "shots": "n_shots",
    "n_shots": "n_shots",
    "iters": "k_max",
    "k_max": "k_max",
    "trajectories": "trajectories",
    "states": "states_per_point",
    "states_per_point": "states_per_point",
    "seed": "seed",
    "gains": "gains",
    "out": "output_path",
    "output_path": "output_path",
    "workers": "workers",
    "input": "input_path",
    "input_path": "input_path",
    "restarts": "seesaw_restarts",
    "seesaw_restarts": "seesaw_restarts",
}


class InvalidConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    grid: tuple[float, ...] = ()
    n_shots: int = 100
    k_max: int = 200
    trajectories: int = 100
    states_per_point: int = 20
    seed: int = 0
    gains: GainSchedule = field(default_factory=GainSchedule)
    output_path: str = "results"
    workers: int = 1
    input_path: str | None = None
    seesaw_restarts: int = 10

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENTS:
            raise InvalidConfigError(f"unknown experiment {self.experiment!r}")
        for name in ("n_shots", "k_max", "trajectories", "states_per_point", "workers",
                     "seesaw_restarts"):
            if getattr(self, name) < 1:
                raise InvalidConfigError(f"{name} must be a positive integer")
        if not 0 <= self.seed < 2**64:
            raise InvalidConfigError("seed must be a 64-bit non-negative integer")
        g = np.asarray(self.grid, dtype=float)
        exp = self.experiment
        if exp == "schmidt_sweep" and np.any((g < 0) | (g > 0.5)):
            raise InvalidConfigError("Schmidt coefficients must lie in [0, 1/2]")
        if exp == "werner_sweep" and np.any((g < 0) | (g > 1)):
            raise InvalidConfigError("Werner parameters must lie in [0, 1]")
        if exp == "concurrence_sweep" and np.any((g <= 0) | (g > 1)):
            raise InvalidConfigError("concurrence values must lie in (0, 1]")
        if exp == "mse_curve" and np.any((g < 1) | (g != np.round(g))):
            raise InvalidConfigError("mse_curve grid holds ensemble sizes N >= 1")
        if exp in ("schmidt_sweep", "werner_sweep", "concurrence_sweep", "mse_curve") and g.size == 0:
            raise InvalidConfigError(f"{exp} needs a non-empty grid")
        if exp == "seesaw_oracle" and not self.input_path:
            raise InvalidConfigError("seesaw_oracle needs an input density-matrix file")
        return self

    def echo(self) -> dict:
        d = asdict(self)
        d["gains"] = list(self.gains.as_tuple())
        d["grid"] = list(self.grid)
        return d


def _coerce(field_name: str, value):
    try:
        if field_name == "grid":
            if isinstance(value, str):
                value = [v for v in value.replace(",", " ").split() if v]
            return tuple(float(v) for v in value)
        if field_name == "gains":
            return value if isinstance(value, GainSchedule) else GainSchedule.parse(str(value))
        if field_name in ("n_shots", "k_max", "trajectories", "states_per_point", "seed",
                          "workers", "seesaw_restarts"):
            f = float(value)
            if f != int(f):
                raise ValueError(f"{value!r} is not an integer")
            return int(f)
        if field_name == "experiment":
            return str(value).strip().replace("-", "_")
        return str(value)
    except ValueError as exc:
        raise InvalidConfigError(f"bad value for {field_name}: {exc}") from exc


def parse_config_text(text: str) -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in KEY_ALIASES:
            raise InvalidConfigError(f"line {lineno}: unknown key {key!r}")
        values[KEY_ALIASES[key]] = value
    return values


def load_config_file(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text)


def build_config(experiment: str, file_values: dict | None = None,
                 overrides: dict | None = None) -> ExperimentConfig:
    """Merge defaults < config file < explicit overrides, then validate."""
    merged = dict(file_values or {})
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    exp = _coerce("experiment", merged.pop("experiment", experiment))
    if exp != _coerce("experiment", experiment):
        raise InvalidConfigError(
            f"config file is for {exp!r} but {experiment!r} was requested")
    if exp not in EXPERIMENTS:
        raise InvalidConfigError(f"unknown experiment {exp!r}")
    fields = {k: _coerce(k, v) for k, v in merged.items()}
    fields.setdefault("grid", DEFAULT_GRIDS[exp])
    fields.setdefault("k_max", DEFAULT_K_MAX.get(exp, 200))
    return ExperimentConfig(experiment=exp, **fields).validate()


def with_overrides(config: ExperimentConfig, **changes) -> ExperimentConfig:
    return replace(config, **changes).validate()
