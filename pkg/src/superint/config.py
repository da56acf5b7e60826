"""Run configuration for the command-line runner.

A config is ``(command, system, seed, tol, options, out)``. Options are
merged with per-command defaults on construction, so the JSON form always
carries every knob and round-trips exactly.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from typing import Any

from .systems import SpecError, SystemSpec

__all__ = ["COMMANDS", "ConfigError", "RunConfig", "DEFAULTS", "load_config"]


class ConfigError(ValueError):
    """Invalid run configuration (reported as a usage error)."""


_DEFAULT_RADII = [0.3, 0.5, 0.7, 0.9, 1.1, 1.4, 1.8, 2.3, 2.9, 3.6]

# command -> (needs a system, check tolerance, option defaults)
DEFAULTS: dict[str, tuple[bool, float, dict[str, Any]]] = {
    "verify-algebra": (False, 1e-10, {"dim": 3, "kind": "cartesian", "b": None, "num_points": 100}),
    "verify-invariants": (True, 1e-10, {
        "num_points": 50, "relative": True, "axis": 0,
        "t_final": 60.0, "rtol": 1e-12, "drift_tol": 1e-6,
        "init": None, "L": None, "eccentricity": 0.2, "angle": None,
    }),
    "simulate": (True, 1e-6, {
        "t_final": 100.0, "rtol": 1e-12, "energy_tol": 1e-10, "init": None,
        "L": None, "eccentricity": 0.2, "angle": None,
    }),
    "closure": (True, 1e-5, {
        "periods": 12, "rtol": 1e-12, "expect_closed": True, "init": None,
        "L": None, "eccentricity": 0.2, "angle": None,
    }),
    "curvature": (True, 1e-6, {"radii": _DEFAULT_RADII, "h_rel": 1e-2}),
    "spectrum": (True, 1e-5, {"hbar": 1.0, "l": [0], "count": 5, "h": 0.01}),
    "ccm-check": (False, 1e-10, {
        "lam": 0.3, "delta": 0.05, "E": 0.7, "num_points": 20, "relative": True,
        "beta": "1/2", "k": 0.1,
    }),
    "ttw-check": (True, 1e-6, {
        "t_final": 60.0, "rtol": 1e-12, "L": 1.5, "eccentricity": 0.2, "angle": math.pi / 5,
        "quantum_tol": 1e-8, "l": [0, 1, 2], "n_theta": 32, "h": 0.05,
    }),
}
COMMANDS = tuple(DEFAULTS)

_SYSTEM_FAMILIES = {
    "curvature": ("PerlickI",),
    "spectrum": ("PerlickI", "KeplerCurved"),
    "ttw-check": ("TTWCurved",),
}


@dataclass
class RunConfig:
    command: str
    system: SystemSpec | None = None
    seed: int = 0
    tol: float | None = None
    options: dict[str, Any] = field(default_factory=dict)
    out: str = "out"

    def __post_init__(self):
        if self.command not in DEFAULTS:
            raise ConfigError(f"unknown command {self.command!r}; expected one of {', '.join(COMMANDS)}")
        needs_system, tol, defaults = DEFAULTS[self.command]
        if isinstance(self.system, dict):
            try:
                self.system = SystemSpec.from_json(self.system)
            except (SpecError, TypeError) as exc:
                raise ConfigError(f"bad system: {exc}") from exc
        if needs_system and self.system is None:
            raise ConfigError(f"{self.command} needs a system")
        allowed = _SYSTEM_FAMILIES.get(self.command)
        if allowed and self.system is not None and self.system.family not in allowed:
            raise ConfigError(f"{self.command} supports {', '.join(allowed)}, not {self.system.family}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.tol is None:
            self.tol = tol
        if isinstance(self.tol, bool) or not isinstance(self.tol, (int, float)) or not self.tol > 0:
            raise ConfigError("tol must be a positive number")
        self.tol = float(self.tol)
        unknown = set(self.options) - set(defaults)
        if unknown:
            raise ConfigError(f"unknown options for {self.command}: {sorted(unknown)}")
        merged = copy.deepcopy(defaults)
        merged.update(copy.deepcopy(self.options))
        self.options = merged
        if not isinstance(self.out, str) or not self.out:
            raise ConfigError("out must be a non-empty path")

    @property
    def rng_seed(self) -> int:
        """Seed folded into numpy's accepted range."""
        return self.seed % 2**32

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "system": self.system.to_json() if self.system else None,
            "seed": self.seed,
            "tol": self.tol,
            "options": copy.deepcopy(self.options),
            "out": self.out,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict) or "command" not in data:
            raise ConfigError("config must be a JSON object with a 'command' key")
        unknown = set(data) - {"command", "system", "seed", "tol", "options", "out"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        opts = data.get("options") or {}
        if not isinstance(opts, dict):
            raise ConfigError("options must be an object")
        return cls(data["command"], data.get("system"), data.get("seed", 0), data.get("tol"),
                   opts, data.get("out", "out"))

    @classmethod
    def loads(cls, text: str) -> "RunConfig":
        try:
            return cls.from_json(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            return RunConfig.loads(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
