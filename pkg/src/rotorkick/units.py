"""Laboratory units <-> the reduced parameters used by the simulations.

The simulations only see the kick area A, the pulse-length parameter
epsilon = tau*B and the ratio B/(k_B T).  Everything with a physical unit is
converted here.
"""

from __future__ import annotations

import configparser
import os
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from scipy import constants as sc

__all__ = [
    "ConfigError",
    "MoleculeParams",
    "PhysicalPulse",
    "SHAPE_MEAN_FACTOR",
    "parse_quantity",
    "physical_to_reduced",
    "kelvin_to_ratio",
    "load_registry",
    "get_molecule",
]

DEBYE = 1e-21 / sc.c  # C m

# mean field over the pulse divided by its peak value
SHAPE_MEAN_FACTOR = {"square": 1.0, "sin2": 0.5}

_TIME_UNITS = {"s": 1.0, "ns": 1e-9, "ps": 1e-12, "fs": 1e-15, "au": sc.physical_constants["atomic unit of time"][0]}
_FIELD_UNITS = {
    "V/m": 1.0,
    "V/cm": 1e2,
    "kV/cm": 1e5,
    "MV/cm": 1e8,
    "au": sc.physical_constants["atomic unit of electric field"][0],
}
_DEFAULT_UNIT = {"time": "ps", "field": "V/cm"}


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending entry."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(f"field '{field}': {message}" if field else message)


def parse_quantity(value, kind: str, field: str | None = None) -> float:
    """Convert ``0.3``, ``"0.3 ps"`` or ``"1.5e5 V/cm"`` to SI.

    Bare numbers take the default unit of ``kind`` (ps for time, V/cm for field).
    """
    table = _TIME_UNITS if kind == "time" else _FIELD_UNITS
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        number, unit = float(value), _DEFAULT_UNIT[kind]
    else:
        match = re.fullmatch(r"\s*([-+0-9.eE]+)\s*(\S*)\s*", str(value))
        if not match:
            raise ConfigError(f"cannot parse quantity {value!r}", field)
        try:
            number = float(match.group(1))
        except ValueError:
            raise ConfigError(f"cannot parse number in {value!r}", field) from None
        unit = match.group(2) or _DEFAULT_UNIT[kind]
    if unit not in table:
        raise ConfigError(f"unknown {kind} unit {unit!r} (known: {', '.join(table)})", field)
    if number < 0:
        raise ConfigError("must be non-negative", field)
    return number * table[unit]


@dataclass(frozen=True)
class MoleculeParams:
    name: str
    B: float  # cm^-1
    mu0: float  # Debye

    def __post_init__(self):
        if not self.B > 0 or not self.mu0 > 0:
            raise ConfigError(f"molecule {self.name}: B and mu0 must be positive")

    @property
    def angular_frequency(self) -> float:
        """B/hbar in rad/s."""
        return 2 * np.pi * sc.c * 100 * self.B

    @property
    def energy(self) -> float:
        """B in joules."""
        return sc.h * sc.c * 100 * self.B

    @property
    def rotational_period(self) -> float:
        """T_rot = pi/B in seconds."""
        return np.pi / self.angular_frequency


@dataclass(frozen=True)
class PhysicalPulse:
    duration: float  # s
    peak_field: float  # V/m
    shape: str = "square"

    def __post_init__(self):
        if not self.duration > 0:
            raise ConfigError("pulse duration must be positive", "duration")
        if self.peak_field < 0:
            raise ConfigError("peak field must be non-negative", "peak_field")
        if self.shape not in SHAPE_MEAN_FACTOR:
            raise ConfigError(f"unknown shape {self.shape!r}", "shape")

    @classmethod
    def from_units(cls, duration, peak_field, shape: str = "square") -> "PhysicalPulse":
        return cls(parse_quantity(duration, "time", "duration"),
                   parse_quantity(peak_field, "field", "peak_field"), shape)


def physical_to_reduced(molecule: MoleculeParams, pulse: PhysicalPulse) -> tuple[float, float]:
    """Return (A, epsilon) with A = mu0 * tau * mean field / hbar and epsilon = tau*B."""
    mean_field = SHAPE_MEAN_FACTOR[pulse.shape] * pulse.peak_field
    area = molecule.mu0 * DEBYE * mean_field * pulse.duration / sc.hbar
    return float(area), float(pulse.duration * molecule.angular_frequency)


def kelvin_to_ratio(molecule: MoleculeParams, T: float) -> float:
    """B / (k_B T), dimensionless."""
    if not T > 0:
        raise ConfigError("temperature must be positive", "temperature")
    return float(molecule.energy / (sc.k * T))


def _registry_text(path) -> str:
    if path is None:
        path = os.environ.get("ROTORKICK_MOLECULES")
    if path is None:
        return resources.files("rotorkick").joinpath("data/molecules.ini").read_text()
    return Path(path).read_text()


def load_registry(path=None) -> dict[str, MoleculeParams]:
    parser = configparser.ConfigParser()
    parser.optionxform = str
    parser.read_string(_registry_text(path))
    out = {}
    for name in parser.sections():
        sec = parser[name]
        try:
            out[name] = MoleculeParams(name, float(sec["B_cm"]), float(sec["mu0_debye"]))
        except KeyError as exc:
            raise ConfigError(f"molecule {name} lacks {exc.args[0]}", f"{name}.{exc.args[0]}") from None
    return out


def get_molecule(name: str, path=None) -> MoleculeParams:
    registry = load_registry(path)
    if name not in registry:
        raise ConfigError(f"unknown molecule {name!r} (known: {', '.join(registry)})", "molecule")
    return registry[name]
