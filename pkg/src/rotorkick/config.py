"""Run configuration: defaults per command, JSON config files, derived reduced parameters.

A config file is a JSON object::

    {
      "schema": "rotorkick.config/1",
      "command": "simulate",
      "molecule": "LiCl",
      "pulse": {"duration": "0.3 ps", "peak_field": "1.5e5 V/cm", "shape": "square"},
      "kicks": 15,
      "N": 4
    }

Without a ``pulse`` entry the reduced ``area`` and ``epsilon`` are used as
given.  A run manifest can be passed anywhere a config is accepted; its
``config`` snapshot is used.
"""

from __future__ import annotations

import json
from pathlib import Path

from .units import ConfigError, PhysicalPulse, get_molecule, kelvin_to_ratio, physical_to_reduced

__all__ = ["SCHEMA", "DEFAULTS", "load_config_file", "resolve", "derive"]

SCHEMA = "rotorkick.config/1"

_COMMON = {"molecule": "LiCl", "registry": None}

DEFAULTS: dict[str, dict] = {
    "targets": {"n_min": 1, "n_max": 10, "m": 0, "threshold": 0.5},
    "simulate": {
        **_COMMON,
        "area": 1.0,
        "epsilon": 0.01,
        "pulse": None,
        "kicks": 15,
        "N": 4,
        "m": 0,
        "l0": None,
        "l_max": None,
        "mode": "global",
        "convergence_tol": 1e-4,
        "threshold": 0.5,
    },
    "thermal": {
        **_COMMON,
        "area": 2.0,
        "epsilon": 0.01,
        "pulse": None,
        "kicks": 15,
        "N": 7,
        "temperature": 5.0,
        "weight_floor": 1e-6,
        "mode": "global",
        "convergence_tol": 1e-4,
        "threshold": 0.5,
        "diagnostics": False,
    },
    "leakage": {"areas": [1.0], "ns": [4], "m": 0, "l_max": None, "worst_case": False},
    "validate-sudden": {
        "area": 1.0,
        "epsilons": [0.04, 0.02, 0.01, 0.005],
        "steps": 4000,
        "l_max": 24,
    },
    "sweep": {
        **_COMMON,
        "areas": [0.5, 1.0, 1.5],
        "ns": [4],
        "kicks": [15],
        "temperatures": [0.0],
        "epsilon": 0.01,
        "mode": "global",
        "workers": 1,
    },
}

_TYPES = {
    "n_min": int, "n_max": int, "m": int, "N": int, "kicks": int, "l0": int, "l_max": int,
    "steps": int, "workers": int,
    "threshold": float, "area": float, "epsilon": float, "convergence_tol": float,
    "temperature": float, "weight_floor": float,
    "molecule": str, "registry": str, "mode": str,
    "diagnostics": bool, "worst_case": bool,
}
_LISTS = {"areas": float, "ns": int, "epsilons": float, "temperatures": float}


def load_config_file(path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    if "config" in data and "manifest_version" in data:
        data = data["config"]
    schema = data.get("schema", SCHEMA)
    if schema != SCHEMA:
        raise ConfigError(f"unsupported schema {schema!r}", "schema")
    return data


def _coerce(key: str, value, as_list: bool = False):
    if value is None:
        return None
    if key in _LISTS or as_list:
        kind = _LISTS.get(key, _TYPES.get(key))
        if not isinstance(value, (list, tuple)):
            value = [value]
        try:
            return [kind(v) for v in value]
        except (TypeError, ValueError):
            raise ConfigError(f"expected a list of {kind.__name__}", key) from None
    if key == "pulse":
        if not isinstance(value, dict):
            raise ConfigError("expected an object with duration, peak_field, shape", key)
        unknown = set(value) - {"duration", "peak_field", "shape"}
        if unknown:
            raise ConfigError(f"unknown entries {sorted(unknown)}", key)
        if "duration" not in value or "peak_field" not in value:
            raise ConfigError("needs duration and peak_field", key)
        return dict(value)
    kind = _TYPES.get(key)
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError("expected true or false", key)
        return value
    if kind is int and isinstance(value, float) and not value.is_integer():
        raise ConfigError("expected an integer", key)
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"expected {kind.__name__}, got {value!r}", key) from None


def resolve(command: str, file_config: dict | None = None, overrides: dict | None = None) -> dict:
    """Merge defaults < config file < explicit overrides and validate every field."""
    if command not in DEFAULTS:
        raise ConfigError(f"unknown command {command!r}", "command")
    cfg = dict(DEFAULTS[command])
    for source in (file_config or {}, overrides or {}):
        for key, value in source.items():
            if key in ("schema", "command"):
                if key == "command" and value != command:
                    raise ConfigError(f"config is for {value!r}, not {command!r}", key)
                continue
            if key not in cfg:
                raise ConfigError(f"not a setting of '{command}'", key)
            if value is not None or source is file_config:
                cfg[key] = _coerce(key, value, isinstance(DEFAULTS[command][key], list))
    if cfg.get("mode") not in (None, "global", "first-local"):
        raise ConfigError("must be 'global' or 'first-local'", "mode")
    return {"schema": SCHEMA, "command": command, **cfg}


def derive(cfg: dict) -> dict:
    """Reduced parameters (area, epsilon, temperature ratio) and time scale of a resolved config."""
    out: dict = {}
    molecule = None
    if cfg.get("molecule"):
        molecule = get_molecule(cfg["molecule"], cfg.get("registry"))
        out["T_rot_ps"] = molecule.rotational_period * 1e12
        out["B_cm"] = molecule.B
    if cfg.get("pulse"):
        p = cfg["pulse"]
        pulse = PhysicalPulse.from_units(p["duration"], p["peak_field"], p.get("shape", "square"))
        out["area"], out["epsilon"] = physical_to_reduced(molecule, pulse)
    else:
        if "area" in cfg:
            out["area"] = cfg["area"]
        if "epsilon" in cfg:
            out["epsilon"] = cfg["epsilon"]
    if cfg.get("temperature") is not None and molecule is not None:
        out["temperature_ratio"] = kelvin_to_ratio(molecule, cfg["temperature"])
    return out
