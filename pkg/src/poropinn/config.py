"""Flat ``section.key = value`` run configuration.

Blank lines and ``#`` comments are ignored.  Every key is optional and
defaults to the reference setup.  All random
streams derive from the single ``seed`` key (see ``training`` for offsets).
"""

import os
from dataclasses import dataclass

from .errors import ConfigError
from .net import LayerSpec
from .pde import SolutionParams
from .sampling import GridSpec
from .training import CurriculumConfig, TrainConfig


def _bool(text):
    low = text.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional_int(text):
    return None if text.strip().lower() in ("", "none") else int(text)


def _mode(text):
    if text not in ("standard", "curriculum"):
        raise ValueError("expected 'standard' or 'curriculum'")
    return text


# key -> (parser, default)
SCHEMA = {
    "seed": (int, 0),
    "grid.nx": (int, 50),
    "grid.nz": (int, 50),
    "grid.nt": (int, 50),
    "net.hidden_layers": (int, 5),
    "net.hidden_units": (int, 20),
    "train.mode": (_mode, "standard"),
    "train.epochs": (int, 3000),
    "train.batch_size": (int, 256),
    "train.learning_rate": (float, 1e-3),
    "train.colloc_total": (int, 1000),
    "adam.beta1": (float, 0.9),
    "adam.beta2": (float, 0.999),
    "adam.epsilon": (float, 1e-8),
    "curriculum.n_intervals": (int, 10),
    "curriculum.epochs_per_interval": (_optional_int, None),
    "curriculum.mode": (str, "incremental"),
    "curriculum.ic_subsample": (_optional_int, None),
    "solution.alpha": (float, 0.5),
    "solution.beta": (float, 2.0),
    "solution.delta": (float, 1.0),
    "solution.eps": (float, 1.0),
    "solution.zeta": (float, 1.5),
    "solution.eta": (float, 2.5),
    "sampling.lhs_centered": (_bool, False),
    "output.dir": (str, None),
    "log.wall_clock": (_bool, True),
    "eval.slice_t": (float, 1.0),
    "eval.profile_x": (float, 1.0),
    "eval.nx": (int, 50),
    "eval.nz": (int, 50),
}


@dataclass(frozen=True)
class RunConfig:
    values: dict

    def __getitem__(self, key):
        return self.values[key]

    def with_overrides(self, **overrides):
        vals = dict(self.values)
        for key, val in overrides.items():
            if key not in SCHEMA:
                raise ConfigError(f"unknown configuration key {key!r}")
            vals[key] = val
        return RunConfig(vals)

    def train_config(self, mode=None):
        v = self.values
        mode = mode or v["train.mode"]
        curriculum = None
        if mode == "curriculum":
            curriculum = CurriculumConfig(
                v["curriculum.n_intervals"], v["curriculum.epochs_per_interval"],
                v["curriculum.mode"], v["curriculum.ic_subsample"],
            )
        try:
            cfg = TrainConfig(
                grid=GridSpec(v["grid.nx"], v["grid.nz"], v["grid.nt"]),
                net=LayerSpec(3, v["net.hidden_layers"], v["net.hidden_units"], 3),
                epochs=v["train.epochs"],
                batch_size=v["train.batch_size"],
                learning_rate=v["train.learning_rate"],
                colloc_total=v["train.colloc_total"],
                curriculum=curriculum,
                seed=v["seed"],
                adam_beta1=v["adam.beta1"],
                adam_beta2=v["adam.beta2"],
                adam_epsilon=v["adam.epsilon"],
                solution=self.solution_params(),
                lhs_centered=v["sampling.lhs_centered"],
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if cfg.net.hidden_layers < 1:
            raise ConfigError("net.hidden_layers must be >= 1")
        return cfg.validate()

    def solution_params(self):
        v = self.values
        try:
            return SolutionParams(
                v["solution.alpha"], v["solution.beta"], v["solution.delta"],
                v["solution.eps"], v["solution.zeta"], v["solution.eta"],
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def output_dir(self, flag=None):
        return flag or self.values["output.dir"] or os.environ.get("POROPINN_OUT") or "poropinn_out"

    def dumps(self):
        """Canonical text form; parsing it back yields the same values."""
        lines = ["# resolved poropinn configuration"]
        for key in sorted(SCHEMA):
            val = self.values[key]
            if isinstance(val, bool):
                text = "true" if val else "false"
            elif val is None:
                text = "none"
            elif isinstance(val, float):
                text = repr(val)
            else:
                text = str(val)
            lines.append(f"{key} = {text}")
        return "\n".join(lines) + "\n"


def defaults():
    return RunConfig({k: d for k, (_, d) in SCHEMA.items()})


def parse_config(text, source="<config>"):
    values = dict(defaults().values)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, _, val = (s.strip() for s in line.partition("="))
        if key not in SCHEMA:
            raise ConfigError(f"{source}:{lineno}: unknown configuration key {key!r}")
        parser = SCHEMA[key][0]
        if key == "output.dir" and val.lower() == "none":
            values[key] = None
            continue
        try:
            values[key] = parser(val)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
    return RunConfig(values)


def load_config(path):
    if path is None:
        return defaults()
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, path)
