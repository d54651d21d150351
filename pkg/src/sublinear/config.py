"""Experiment configuration: one flat record shared by all CLI commands.

A config is stored as a JSON object whose keys are the field names of
:class:`ExperimentConfig`. Unknown keys are rejected. Command-line flags
override file values.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass
from typing import Any

COMMANDS = ("eval", "check", "estimate", "lln", "envelope")
STOCHASTIC = ("lln",)
POLICY_SETS = ("constant", "default")
# fields that do not change any computed number
_UNHASHED = ("out", "plot", "threads")


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"field '{field}': {message}")
        self.field = field


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    f: str | None = None
    n: tuple[int, ...] | None = None
    interval: tuple[float, float] | None = None
    target: str = "upper"
    grid: tuple[tuple[float, float], ...] | None = None
    data: str | None = None
    phi: tuple[str, ...] = ("x",)
    group_size: int | None = None
    groups: int | None = None
    family: tuple[str, ...] | None = None
    policies: str = "constant"
    n_schedule: tuple[int, ...] | None = None
    replications: int = 1000
    seed: int | None = None
    tol: float = 1e-6
    budget: int = 100_000
    threads: int = 1
    out: str | None = None
    plot: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError("command", f"must be one of {', '.join(COMMANDS)}, got {self.command!r}")
        if self.target not in ("upper", "lower"):
            raise ConfigError("target", f"must be 'upper' or 'lower', got {self.target!r}")
        if self.policies not in POLICY_SETS:
            raise ConfigError("policies", f"must be one of {', '.join(POLICY_SETS)}")
        if not self.tol > 0:
            raise ConfigError("tol", "must be positive")
        for name in ("budget", "replications", "threads"):
            if getattr(self, name) < 1:
                raise ConfigError(name, "must be a positive integer")
        for name in ("group_size", "groups"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ConfigError(name, "must be a positive integer")
        if self.n is not None and any(k < 1 for k in self.n):
            raise ConfigError("n", "arities must be positive")
        if self.n_schedule is not None and any(k < 1 for k in self.n_schedule):
            raise ConfigError("n_schedule", "sample counts must be positive")
        if self.interval is not None and self.interval[0] > self.interval[1]:
            raise ConfigError("interval", "lower end exceeds upper end")
        if self.seed is not None and not 0 <= self.seed < 2**64:
            raise ConfigError("seed", "must be an unsigned 64-bit integer")
        if self.command in STOCHASTIC and self.seed is None:
            raise ConfigError("seed", f"'{self.command}' is stochastic and needs --seed")
        if self.command == "envelope" and self.data is None and self.seed is None:
            raise ConfigError("seed", "simulated envelope runs need --seed")

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = [list(x) if isinstance(x, tuple) else x for x in v]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @property
    def hash(self) -> str:
        d = {k: v for k, v in self.to_dict().items() if k not in _UNHASHED}
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        for k in d:
            if k not in names:
                raise ConfigError(k, "unknown field")
        if "command" not in d:
            raise ConfigError("command", "missing")
        return cls(**{k: _coerce(k, v) for k, v in d.items()})

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc.msg} (line {exc.lineno})") from None
        if not isinstance(d, dict):
            raise ConfigError("config", "top level must be a JSON object")
        return cls.from_dict(d)


def _int(field, v):
    if isinstance(v, bool) or not isinstance(v, int):
        if isinstance(v, float) and v.is_integer():
            return int(v)
        raise ConfigError(field, f"expected an integer, got {v!r}")
    return v


def _float(field, v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(field, f"expected a number, got {v!r}")
    return float(v)


def _str(field, v):
    if not isinstance(v, str):
        raise ConfigError(field, f"expected a string, got {v!r}")
    return v


def _list(field, v):
    if not isinstance(v, (list, tuple)):
        raise ConfigError(field, f"expected a list, got {v!r}")
    return v


def _coerce(field: str, v: Any) -> Any:
    if v is None:
        return None
    if field in ("command", "f", "target", "data", "policies", "out", "plot"):
        return _str(field, v)
    if field in ("group_size", "groups", "replications", "seed", "budget", "threads"):
        return _int(field, v)
    if field == "tol":
        return _float(field, v)
    if field in ("n", "n_schedule"):
        return tuple(_int(field, x) for x in _list(field, v))
    if field in ("phi", "family"):
        return tuple(_str(field, x) for x in _list(field, v))
    if field == "interval":
        v = _list(field, v)
        if len(v) != 2:
            raise ConfigError(field, "expected two numbers")
        return (_float(field, v[0]), _float(field, v[1]))
    if field == "grid":
        out = []
        for pair in _list(field, v):
            pair = _list(field, pair)
            if len(pair) != 2:
                raise ConfigError(field, "every grid entry must be a (mu_lower, mu_upper) pair")
            a, b = _float(field, pair[0]), _float(field, pair[1])
            if a > b:
                raise ConfigError(field, f"pair ({a}, {b}) has mu_lower > mu_upper")
            out.append((a, b))
        return tuple(out)
    raise ConfigError(field, "unknown field")
