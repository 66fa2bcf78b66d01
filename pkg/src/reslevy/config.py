"""Run configuration: a flat ``key = value`` text format with typed values.

Example::

    command = lifetime
    family = stable-subordinator
    alpha = 0.5
    starts = 0.5, 1, 2
    n_paths = 10000
    seed = 20261016

Lists are comma separated and grids use ``start:stop:step`` with both ends
included.  Lines starting with ``#`` are comments.  Unknown keys are
rejected, and the ``RESLEVY_SEED`` environment variable overrides ``seed``.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, fields
from typing import Mapping

import numpy as np

from .errors import ConfigurationError
from .levy_models import PARAMETERS

__all__ = ["Grid", "RunConfig", "COMMANDS", "CHECKS", "MODEL_KEYS", "parse_config", "load_config", "SEED_ENV", "KEY_PARSERS"]

SEED_ENV = "RESLEVY_SEED"
COMMANDS = ("classify", "simulate", "lifetime", "verify", "criteria-map")
CHECKS = (
    "feynman_kac",
    "exponential_law",
    "stochastic_domination",
    "kernel_law",
    "kernel_invariance",
    "lifetime_bound",
    "overshoot",
    "scaling_stable",
    "zero_one_probe",
)
MODEL_KEYS = tuple(sorted({k for spec in PARAMETERS.values() for k in spec}))


@dataclass(frozen=True)
class Grid:
    """Inclusive arithmetic grid ``start:stop:step``."""

    start: float
    stop: float
    step: float

    @classmethod
    def parse(cls, text: str) -> "Grid":
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must look like start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if not step > 0 or stop < start:
            raise ValueError(f"grid {text!r} needs step > 0 and stop >= start")
        return cls(start, stop, step)

    def values(self) -> np.ndarray:
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return np.round(self.start + self.step * np.arange(count), 12)

    def __str__(self) -> str:
        return f"{self.start!r}:{self.stop!r}:{self.step!r}"


def _float_or_none(text: str):
    return None if text.lower() in ("none", "") else float(text)


def _relative(text: str):
    low = text.lower()
    if low in ("auto", "none", "off"):
        return low if low != "off" else "none"
    return float(text)


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _names(text: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in text.split(",") if v.strip())


# key -> parser; model parameters are handled separately
KEY_PARSERS = {
    "command": str,
    "family": str,
    "seed": int,
    "output_dir": str,
    "workers": int,
    "plots": _bool,
    "horizon": _float_or_none,
    "grid_dt": float,
    "truncation_delta": float,
    "relative_truncation": _relative,
    "budget": _float_or_none,
    "n_paths": int,
    "starts": _floats,
    "eps_abs": float,
    "eps_time": float,
    "window": int,
    "n_max": int,
    "wall_time": float,
    "max_time": _float_or_none,
    "checks": _names,
    "t": float,
    "f": str,
    "n_res": int,
    "lam": float,
    "alpha_grid": Grid.parse,
    "rho_grid": Grid.parse,
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    family: str | None = None
    params: Mapping[str, float] = field(default_factory=dict)
    seed: int = 20261016
    output_dir: str = "reslevy-out"
    workers: int = 1
    plots: bool = True
    # simulation
    horizon: float | None = None
    grid_dt: float = 1e-3
    truncation_delta: float = 1e-4
    relative_truncation: float | str = "auto"
    budget: float | None = None
    n_paths: int = 1000
    starts: tuple[float, ...] = (1.0,)
    # absorption policy
    eps_abs: float = 1e-6
    eps_time: float = 1e-8
    window: int = 10
    n_max: int = 100_000
    wall_time: float = 600.0
    max_time: float | None = None
    # verification
    checks: tuple[str, ...] = ()
    t: float = 1.0
    f: str = "min1"
    n_res: int = 20
    lam: float = 1.0
    # criteria map
    alpha_grid: Grid | None = None
    rho_grid: Grid | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigurationError(f"command: unknown command {self.command!r}; choose from {', '.join(COMMANDS)}")
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError("seed: must be a 64-bit unsigned integer")
        if self.n_paths < 1:
            raise ConfigurationError("n_paths: must be >= 1")
        if self.workers < 1:
            raise ConfigurationError("workers: must be >= 1")
        for name in self.checks:
            if name not in CHECKS:
                raise ConfigurationError(f"checks: unknown check {name!r}; choose from {', '.join(CHECKS)}")
        if any(not s > 0 for s in self.starts):
            raise ConfigurationError("starts: levels must be > 0")

    @classmethod
    def from_mapping(cls, raw: Mapping[str, str], env: Mapping[str, str] | None = None) -> "RunConfig":
        """Build from string values, applying the seed override from ``env``."""
        values: dict = {}
        params: dict[str, float] = {}
        for key, text in raw.items():
            key = key.strip().replace("-", "_")
            text = str(text).strip()
            try:
                if key in MODEL_KEYS:
                    params[key] = float(text)
                elif key in KEY_PARSERS:
                    values[key] = KEY_PARSERS[key](text)
                else:
                    raise ConfigurationError(f"{key}: unknown configuration key")
            except ValueError as exc:
                if isinstance(exc, ConfigurationError):
                    raise
                raise ConfigurationError(f"{key}: {exc}") from None
        env = os.environ if env is None else env
        if env.get(SEED_ENV):
            try:
                values["seed"] = int(env[SEED_ENV])
            except ValueError:
                raise ConfigurationError(f"{SEED_ENV}: not an integer") from None
        if "command" not in values:
            raise ConfigurationError("command: missing required key")
        return cls(params=params, **values)

    def serialize(self) -> str:
        """Render as config text; parsing the output gives an equal config."""
        lines = [f"command = {self.command}"]
        if self.family is not None:
            lines.append(f"family = {self.family}")
        for key in sorted(self.params):
            lines.append(f"{key} = {self.params[key]!r}")
        for f in fields(self):
            if f.name in ("command", "family", "params"):
                continue
            value = getattr(self, f.name)
            if value is None:
                if f.name in ("alpha_grid", "rho_grid"):
                    continue
                text = "none"
            elif isinstance(value, bool):
                text = "true" if value else "false"
            elif isinstance(value, tuple):
                text = ", ".join(repr(v) if isinstance(v, float) else str(v) for v in value)
            elif isinstance(value, float):
                text = repr(value)
            else:
                text = str(value)
            lines.append(f"{f.name} = {text}")
        return "\n".join(lines) + "\n"

    def tolerances(self) -> dict:
        """Numerical settings recorded in every report header."""
        return {
            "grid_dt": self.grid_dt,
            "truncation_delta": self.truncation_delta,
            "relative_truncation": self.relative_truncation,
            "budget": self.budget,
            "horizon": self.horizon,
            "eps_abs": self.eps_abs,
            "eps_time": self.eps_time,
            "window": self.window,
            "n_max": self.n_max,
            "wall_time": self.wall_time,
            "max_time": self.max_time,
        }


def parse_config(text: str, env: Mapping[str, str] | None = None) -> RunConfig:
    raw: dict[str, str] = {}
    for number, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {number}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in raw:
            raise ConfigurationError(f"{key}: given twice (line {number})")
        raw[key] = value
    return RunConfig.from_mapping(raw, env)


def load_config(path: str, env: Mapping[str, str] | None = None) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), env)
