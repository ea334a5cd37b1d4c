"""Run configuration: built-in defaults, TOML files, and flag overrides.

Precedence is flag > file > defaults. Sections mirror the dataclasses below;
any key that is not a field raises :class:`ConfigError` naming the key.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import sys
from dataclasses import dataclass, field

from .errors import ConfigError
from .mstep import MStepConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

ENVS = ("bridge", "chain", "point-circle")
ALGOS = ("cppo", "ppo", "ppo-lag")


@dataclass
class EStepConfig:
    kl: float = 0.02
    radius_scheme: str = "variance"
    lower_eps: float = 0.01


@dataclass
class PPOConfig:
    lr: float = 3e-4
    clip: float = 0.2
    target_kl: float = 0.01
    epochs: int = 10
    minibatch: int | None = 256


@dataclass
class LagrangeConfig:
    lr: float = 0.05
    init: float = 0.0


@dataclass
class TrainConfig:
    env: str = "bridge"
    algo: str = "cppo"
    seed: int = 0
    total_steps: int = 80_000
    batch_size: int = 400
    rollout: int = 20
    cost_limit: float = 1.0
    rho: float = 0.9
    gamma: float = 0.99
    lam: float = 0.97
    cost_gamma: float = 0.99
    cost_lam: float = 0.95
    hidden: tuple = (64, 64)
    value_lr: float = 1e-3
    value_epochs: int = 40
    recovery: bool = True
    estep: EStepConfig = field(default_factory=EStepConfig)
    mstep: MStepConfig = field(default_factory=MStepConfig)
    ppo: PPOConfig = field(default_factory=PPOConfig)
    lagrange: LagrangeConfig = field(default_factory=LagrangeConfig)

    def validate(self) -> TrainConfig:
        if self.env not in ENVS:
            raise ConfigError(f"env: unknown environment {self.env!r} (choose from {', '.join(ENVS)})")
        if self.algo not in ALGOS:
            raise ConfigError(f"algo: unknown algorithm {self.algo!r} (choose from {', '.join(ALGOS)})")
        if not 0.0 < self.rho < 1.0:
            raise ConfigError("rho: must lie in (0, 1)")
        if self.rollout < 1 or self.batch_size < self.rollout or self.batch_size % self.rollout:
            raise ConfigError("batch_size: must be a positive multiple of rollout")
        if self.cost_limit <= 0:
            raise ConfigError("cost_limit: must be positive")
        if self.total_steps < self.batch_size:
            raise ConfigError("total_steps: must cover at least one batch")
        if self.estep.radius_scheme not in ("variance", "linear"):
            raise ConfigError("estep.radius_scheme: must be 'variance' or 'linear'")
        if not 0.0 < self.estep.lower_eps < 1.0:
            raise ConfigError("estep.lower_eps: must lie in (0, 1)")
        self.hidden = tuple(int(h) for h in self.hidden)
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


# per-environment defaults layered under file and flags
ENV_DEFAULTS = {
    "bridge": {"total_steps": 80_000, "batch_size": 400, "rollout": 20, "cost_limit": 1.0,
               "mstep": {"epochs": 20, "minibatch": None}},
    "chain": {"total_steps": 60_000, "batch_size": 300, "rollout": 30, "cost_limit": 1.5,
              "mstep": {"epochs": 20, "minibatch": None}},
    "point-circle": {"total_steps": 200_000, "batch_size": 1000, "rollout": 50, "cost_limit": 5.0,
                     "mstep": {"epochs": 10, "minibatch": 256}},
}

_SECTIONS = {"estep": EStepConfig, "mstep": MStepConfig, "ppo": PPOConfig,
             "lagrange": LagrangeConfig}


def _merge(base: dict, layer: dict, where: str = ""):
    for key, value in layer.items():
        path = f"{where}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key {path!r}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key {path!r} must be a table")
            _merge(base[key], value, path + ".")
        else:
            base[key] = value


def _build(data: dict) -> TrainConfig:
    kwargs = dict(data)
    try:
        for name, cls in _SECTIONS.items():
            kwargs[name] = cls(**kwargs[name])
        return TrainConfig(**kwargs).validate()
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load_toml(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"bad TOML in {path}: {exc}") from None


def resolve(file_layer: dict | None = None, flags: dict | None = None) -> TrainConfig:
    """Defaults, then the env-specific defaults, then the file, then flags.

    The env (which picks the env-specific defaults) may come from either
    the flags or the file.
    """
    file_layer = dict(file_layer or {})
    flags = {k: v for k, v in (flags or {}).items() if v is not None}
    data = TrainConfig().to_dict()
    env = flags.get("env", file_layer.get("env", data["env"]))
    if env in ENV_DEFAULTS:
        _merge(data, ENV_DEFAULTS[env])
    _merge(data, file_layer)
    _merge(data, flags)
    return _build(data)


def config_hash(cfg: TrainConfig) -> str:
    """Git-style blob hash of the canonical JSON form of the config."""
    body = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha1(b"blob %d\0" % len(body) + body).hexdigest()
