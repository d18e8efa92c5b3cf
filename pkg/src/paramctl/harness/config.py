"""Declarative grid configuration loaded from YAML.

Example::

    seed: 0
    runs: 30
    max_generations: 100000
    precision: 1.0e-5
    reward: {c: 100, form: improvement}
    rl: {alpha: 0.9, alpha0: 0.02, gamma: 0.8, epsilon: 0.1}
    ea: {k: [1, 2, 3], mu: [1, 5, 10], lambda: [1, 3, 7]}
    problems: [sphere, rastrigin, rosenbrock, levi]
    controllers: {A: {depth_limit: 2}, Q: {}, K: {}, E: {}, EK: {}}

``problems`` entries may also be mappings with ``name``, ``dimension``,
``lower``, ``upper`` and ``rosenbrock_form``.  ``controllers`` may be a
plain list of names.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from ..controllers import CONTROLLERS, RLParams, make_controller
from ..core import DomainError
from ..engine import REWARD_FORMS, EaConfig
from ..problems import PROBLEM_NAMES, ProblemInstance

DEFAULT_CONTROLLERS = ("A", "Q", "K", "E", "EK")


class ConfigError(ValueError):
    """Invalid grid configuration; the CLI maps it to exit code 2."""


@dataclass(frozen=True)
class ProblemEntry:
    name: str
    dimension: int = 2
    lower: float | None = None
    upper: float | None = None
    rosenbrock_form: str = "printed"

    def instance(self, precision: float) -> ProblemInstance:
        kw: dict[str, Any] = {"dimension": self.dimension, "epsilon": precision}
        if self.lower is not None:
            kw["lower"] = self.lower
        if self.upper is not None:
            kw["upper"] = self.upper
        if self.name == "rosenbrock":
            kw["rosenbrock_form"] = self.rosenbrock_form
        return ProblemInstance(self.name, **kw)


@dataclass(frozen=True)
class ControllerEntry:
    name: str
    options: Mapping[str, Any] = field(default_factory=dict)


@dataclass
class GridConfig:
    problems: list[ProblemEntry] = field(default_factory=lambda: [ProblemEntry(n) for n in PROBLEM_NAMES])
    controllers: list[ControllerEntry] = field(
        default_factory=lambda: [ControllerEntry(n) for n in DEFAULT_CONTROLLERS]
    )
    rl: RLParams = field(default_factory=RLParams)
    k: list[float] = field(default_factory=lambda: [1, 2, 3])
    mu: list[int] = field(default_factory=lambda: [1, 5, 10])
    lam: list[int] = field(default_factory=lambda: [1, 3, 7])
    c: float = 100.0
    reward_form: str = "improvement"
    runs: int = 30
    precision: float = 1e-5
    max_generations: int = 100_000
    seed: int = 0
    traces: bool = False

    def ea_configs(self) -> list[EaConfig]:
        """Grid rows in table order: k outermost, then mu, then lambda."""
        return [
            EaConfig(mu=m, lam=l, k=k, c=self.c, max_generations=self.max_generations, reward_form=self.reward_form)
            for k in self.k
            for m in self.mu
            for l in self.lam
        ]

    def validate(self) -> "GridConfig":
        if not self.controllers:
            raise ConfigError("controller list is empty")
        if not self.problems:
            raise ConfigError("problem list is empty")
        if not (self.k and self.mu and self.lam):
            raise ConfigError("EA grid (k, mu, lambda) must be non-empty")
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.reward_form not in REWARD_FORMS:
            raise ConfigError(f"reward form must be one of {REWARD_FORMS}")
        names = [c.name for c in self.controllers]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate controller in {names}")
        try:
            cfgs = self.ea_configs()
            for p in self.problems:
                p.instance(self.precision)
            for ce in self.controllers:
                make_controller(ce.name, [cfgs[0].sigma_spec()], self.rl, **dict(ce.options))
        except (DomainError, ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc
        return self


def _as_list(v: Any, key: str) -> list:
    if isinstance(v, (list, tuple)):
        return list(v)
    if isinstance(v, (int, float, str)):
        return [v]
    raise ConfigError(f"{key}: expected a list, got {type(v).__name__}")


def _parse_problems(raw: Any) -> list[ProblemEntry]:
    out = []
    for item in _as_list(raw, "problems"):
        if isinstance(item, str):
            item = {"name": item}
        if not isinstance(item, dict) or "name" not in item:
            raise ConfigError(f"problems: bad entry {item!r}")
        if item["name"] not in PROBLEM_NAMES:
            raise ConfigError(f"problems: unknown problem {item['name']!r}; choose from {PROBLEM_NAMES}")
        try:
            out.append(ProblemEntry(**item))
        except TypeError as exc:
            raise ConfigError(f"problems: {exc}") from exc
    return out


def _parse_controllers(raw: Any) -> list[ControllerEntry]:
    if isinstance(raw, dict):
        items = [(k, v or {}) for k, v in raw.items()]
    else:
        items = [(n, {}) for n in _as_list(raw, "controllers")]
    out = []
    for name, opts in items:
        if name not in CONTROLLERS:
            raise ConfigError(f"controllers: unknown controller {name!r}; choose from {sorted(CONTROLLERS)}")
        if not isinstance(opts, dict):
            raise ConfigError(f"controllers: options for {name} must be a mapping")
        out.append(ControllerEntry(str(name), dict(opts)))
    return out


_TOP_KEYS = {
    "seed", "runs", "max_generations", "precision", "reward", "rl", "ea",
    "problems", "controllers", "traces",
}


def config_from_dict(data: Mapping[str, Any] | None) -> GridConfig:
    data = dict(data or {})
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    cfg = GridConfig()
    try:
        if "problems" in data:
            cfg.problems = _parse_problems(data["problems"])
        if "controllers" in data:
            cfg.controllers = _parse_controllers(data["controllers"])
        if "rl" in data:
            rl = dict(data["rl"] or {})
            cfg.rl = RLParams(**{k: float(v) for k, v in rl.items()})
        ea = dict(data.get("ea") or {})
        bad = set(ea) - {"k", "mu", "lambda"}
        if bad:
            raise ConfigError(f"ea: unknown keys {sorted(bad)}")
        if "k" in ea:
            cfg.k = [float(v) for v in _as_list(ea["k"], "ea.k")]
        if "mu" in ea:
            cfg.mu = [int(v) for v in _as_list(ea["mu"], "ea.mu")]
        if "lambda" in ea:
            cfg.lam = [int(v) for v in _as_list(ea["lambda"], "ea.lambda")]
        reward = dict(data.get("reward") or {})
        bad = set(reward) - {"c", "form"}
        if bad:
            raise ConfigError(f"reward: unknown keys {sorted(bad)}")
        cfg.c = float(reward.get("c", cfg.c))
        cfg.reward_form = str(reward.get("form", cfg.reward_form))
        for key, conv in (("runs", int), ("max_generations", int), ("precision", float), ("seed", int)):
            if key in data:
                setattr(cfg, key, conv(data[key]))
        if "traces" in data:
            cfg.traces = bool(data["traces"])
    except ConfigError:
        raise
    except (TypeError, ValueError, DomainError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


def load_config(path: str | Path | None = None) -> GridConfig:
    """Read ``path`` (YAML); ``None`` gives the full default grid."""
    if path is None:
        return GridConfig().validate()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if data is not None and not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return config_from_dict(data)


def apply_overrides(cfg: GridConfig, **overrides: Any) -> GridConfig:
    """Replace fields given as non-``None`` keyword arguments and re-validate.

    ``controllers`` and ``problems`` accept lists of names; controllers
    keep any options the file gave them.
    """
    changes: dict[str, Any] = {}
    for key, value in overrides.items():
        if value is None:
            continue
        if key == "controllers":
            known = {c.name: c for c in cfg.controllers}
            value = [known.get(n, ControllerEntry(n)) for n in value]
            for c in value:
                if c.name not in CONTROLLERS:
                    raise ConfigError(f"unknown controller {c.name!r}; choose from {sorted(CONTROLLERS)}")
        elif key == "problems":
            known_p = {p.name: p for p in cfg.problems}
            value = [known_p.get(n) or _parse_problems([n])[0] for n in value]
        changes[key] = value
    try:
        return dataclasses.replace(cfg, **changes).validate()
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
