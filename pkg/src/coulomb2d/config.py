"""Run configuration: TOML file, flag overrides, and a canonical serialization.

Precedence is flags > file > defaults.
"""
from __future__ import annotations

import dataclasses
import hashlib
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import tomli_w

from .errors import ConfigError
from .thermal import GridConfig, SolverConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

FORMATS = ("csv", "json", "both")


@dataclass
class PotentialSpec:
    name: str = "ginibre"
    params: dict[str, float] = field(default_factory=dict)


@dataclass
class TestFunctionSpec:
    name: str = "power"
    params: dict[str, Any] = field(default_factory=lambda: {"p": 2})


@dataclass
class EdgeSpec:
    u_min: float = -4.0
    u_max: float = 4.0
    u_points: int = 81


@dataclass
class SweepSpec:
    thetas: list[float] = field(default_factory=lambda: [1.0, 2.0, 4.0])
    n: int | None = None
    bulk_tol: float = 0.1
    edge_tol: float = 0.02


@dataclass
class OutputSpec:
    dir: str = "out"
    format: str = "both"


@dataclass
class RunConfig:
    potential: PotentialSpec = field(default_factory=PotentialSpec)
    n: list[int] = field(default_factory=lambda: [256])
    beta_star: float = 1.0
    theta: float | None = None
    grid: GridConfig = field(default_factory=GridConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    edge: EdgeSpec = field(default_factory=EdgeSpec)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    test_function: TestFunctionSpec = field(default_factory=TestFunctionSpec)
    output: OutputSpec = field(default_factory=OutputSpec)

    def effective_theta(self) -> float:
        """Entropy parameter for thermal solves: explicit override, else theta1 from beta*."""
        if self.theta is not None:
            return self.theta
        inv = 1.0 / self.beta_star - 0.5
        if inv <= 0:
            raise ConfigError("beta* >= 2 leaves theta1 undefined; pass --theta")
        return 1.0 / inv


_SECTIONS = {
    "potential": PotentialSpec,
    "grid": GridConfig,
    "solver": SolverConfig,
    "edge": EdgeSpec,
    "sweep": SweepSpec,
    "test_function": TestFunctionSpec,
    "output": OutputSpec,
}


def _coerce(value, default, key):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected a boolean")
        return value
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        return float(value)
    return value


def _build(cls, data: dict, prefix: str):
    if not isinstance(data, dict):
        raise ConfigError(f"[{prefix}] must be a table")
    names = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(data) - set(names)
    if unknown:
        raise ConfigError(f"unknown keys in [{prefix}]: {sorted(unknown)}")
    base = cls()
    kwargs = {}
    for key, value in data.items():
        kwargs[key] = _coerce(value, getattr(base, key), f"{prefix}.{key}")
    return dataclasses.replace(base, **kwargs)


def from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be a table")
    top = {"n", "beta_star", "theta"} | set(_SECTIONS)
    unknown = set(data) - top
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    cfg = RunConfig()
    for key, cls in _SECTIONS.items():
        if key in data:
            setattr(cfg, key, _build(cls, data[key], key))
    if "n" in data:
        n = data["n"]
        n = [n] if isinstance(n, int) and not isinstance(n, bool) else n
        if not isinstance(n, list) or not n or not all(isinstance(v, int) and not isinstance(v, bool) and v >= 1 for v in n):
            raise ConfigError("n must be a positive integer or a non-empty list of them")
        cfg.n = list(n)
    if "beta_star" in data:
        cfg.beta_star = _coerce(data["beta_star"], 1.0, "beta_star")
    if "theta" in data:
        cfg.theta = _coerce(data["theta"], 1.0, "theta")
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    if not cfg.beta_star > 0:
        raise ConfigError("beta_star must be positive")
    if cfg.theta is not None and not cfg.theta > 0:
        raise ConfigError("theta must be positive")
    if cfg.output.format not in FORMATS:
        raise ConfigError(f"output.format must be one of {FORMATS}")
    if cfg.grid.m < 16:
        raise ConfigError("grid.m must be at least 16")
    if not cfg.grid.rmax_headroom > 0:
        raise ConfigError("grid.rmax_headroom must be positive")
    if not 0 < cfg.solver.alpha0 <= 1:
        raise ConfigError("solver.alpha0 must lie in (0, 1]")
    if not cfg.solver.tol > 0 or cfg.solver.max_iter < 1:
        raise ConfigError("solver.tol must be positive and solver.max_iter >= 1")
    if cfg.edge.u_points < 3 or not cfg.edge.u_min < cfg.edge.u_max:
        raise ConfigError("edge grid needs u_min < u_max and at least 3 points")
    if cfg.sweep.n is not None and (not isinstance(cfg.sweep.n, int) or cfg.sweep.n < 1):
        raise ConfigError("sweep.n must be a positive integer")
    if not cfg.sweep.thetas or any(not t > 0 for t in cfg.sweep.thetas):
        raise ConfigError("sweep.thetas must be positive")


def to_dict(cfg: RunConfig) -> dict:
    data = dataclasses.asdict(cfg)
    if data["theta"] is None:
        del data["theta"]
    if data["sweep"]["n"] is None:
        del data["sweep"]["n"]
    return data


def dumps(cfg: RunConfig) -> str:
    return tomli_w.dumps(to_dict(cfg))


def loads(text: str) -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    return from_dict(data)


def load(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return loads(text)


def config_hash(cfg: RunConfig) -> str:
    """sha256 of the numerical configuration; the output directory is not part of it."""
    data = to_dict(cfg)
    del data["output"]["dir"]
    return hashlib.sha256(tomli_w.dumps(data).encode()).hexdigest()
