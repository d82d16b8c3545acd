"""
JSON configuration with explicit units.

Every dimensional value is written as ``{"value": <number>, "unit": "<label>"}``
and converted to SI on load; a bare number where a unit is expected is
rejected. Dimensionless entries (cycle counts, usable fraction) are plain
numbers. A list of values may share one label: ``{"values": [...], "unit": ...}``.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Union

from .actuator import (
    AIR,
    NITI,
    ActuatorSpec,
    AmbientMedium,
    BareActuatorSpec,
    DriveSpec,
    EncapsulatedActuatorSpec,
)
from .errors import ConfigError, SMAThermalError
from .power import EnergyBudget, SweepGrid
from .simulator import IntegratorConfig
from .thermal import MaterialProps

_Conv = Union[float, Callable[[float], float]]

UNITS: Dict[str, Dict[str, _Conv]] = {
    "length": {"m": 1.0, "mm": 1e-3, "um": 1e-6, "µm": 1e-6},
    "mass": {"kg": 1.0, "g": 1e-3, "mg": 1e-6},
    "temperature": {"K": lambda v: v, "degC": lambda v: v + 273.15, "C": lambda v: v + 273.15},
    "temperature_difference": {"K": 1.0, "degC": 1.0, "C": 1.0},
    "heat_transfer_coefficient": {"W/(m^2*K)": 1.0},
    "conductivity": {"W/(m*K)": 1.0},
    "specific_heat": {"J/(kg*K)": 1.0},
    "density": {"kg/m^3": 1.0},
    "resistance": {"ohm": 1.0, "Ohm": 1.0, "Ω": 1.0},
    "current": {"A": 1.0, "mA": 1e-3},
    "voltage": {"V": 1.0, "mV": 1e-3},
    "frequency": {"Hz": 1.0},
    "percent": {"percent": 1.0, "%": 1.0},
    "time": {"s": 1.0, "ms": 1e-3, "min": 60.0},
    "power": {"W": 1.0, "mW": 1e-3},
    "charge": {"mAh": 1.0, "Ah": 1e3},
}


def _normalize_unit(label: str) -> str:
    return (
        label.replace(" ", "")
        .replace("·", "*")
        .replace("²", "^2")
        .replace("³", "^3")
        .replace("°C", "degC")
    )


def convert(value: float, unit: str, kind: str) -> float:
    table = UNITS[kind]
    conv = table.get(_normalize_unit(unit))
    if conv is None:
        raise ConfigError(f"unit {unit!r} is not a valid {kind} unit (expected one of {sorted(table)})")
    return conv(value) if callable(conv) else value * conv


def read_quantity(section: Dict[str, Any], key: str, kind: str, default: Optional[float] = None,
                  required: bool = True) -> Optional[float]:
    """SI value of ``section[key]``, which must carry a unit label."""
    if key not in section:
        if default is not None or not required:
            return default
        raise ConfigError(f"missing required quantity {key!r}")
    q = section[key]
    if not isinstance(q, dict) or "unit" not in q or "value" not in q:
        raise ConfigError(f"{key!r} must be written as {{\"value\": ..., \"unit\": ...}} (got {q!r})")
    try:
        value = float(q["value"])
    except (TypeError, ValueError):
        raise ConfigError(f"{key!r}: value {q['value']!r} is not a number") from None
    return convert(value, str(q["unit"]), kind)


def read_quantity_list(section: Dict[str, Any], key: str, kind: str) -> List[float]:
    q = section.get(key)
    if not isinstance(q, dict) or "unit" not in q or "values" not in q:
        raise ConfigError(f"{key!r} must be written as {{\"values\": [...], \"unit\": ...}}")
    return [convert(float(v), str(q["unit"]), kind) for v in q["values"]]


def _section(cfg: Dict[str, Any], name: str) -> Dict[str, Any]:
    sec = cfg.get(name)
    if not isinstance(sec, dict):
        raise ConfigError(f"config has no {name!r} section")
    return sec


def bundled_config_path(name: str) -> Path:
    return Path(str(resources.files("smathermal").joinpath("data", name)))


def resolve_config_path(path: Union[str, Path]) -> Path:
    """A filesystem path, or the name of a bundled config such as ``paper-bare.json``."""
    p = Path(path)
    if p.exists():
        return p
    bundled = bundled_config_path(p.name)
    if bundled.exists():
        return bundled
    raise ConfigError(f"config file not found: {path}")


def load_config(path: Union[str, Path]) -> Dict[str, Any]:
    p = resolve_config_path(path)
    try:
        with open(p) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{p}: top level must be an object")
    return data


def actuator_from_config(cfg: Dict[str, Any]) -> ActuatorSpec:
    sec = _section(cfg, "actuator")
    kind = sec.get("type")
    try:
        material = MaterialProps(
            thermal_conductivity=read_quantity(sec, "wire_conductivity", "conductivity",
                                               default=NITI.thermal_conductivity),
            specific_heat=read_quantity(sec, "wire_specific_heat", "specific_heat"),
            density=read_quantity(sec, "wire_density", "density", default=NITI.density),
        )
        wire = BareActuatorSpec(
            wire_radius=read_quantity(sec, "wire_radius", "length"),
            length=read_quantity(sec, "length", "length"),
            material=material,
            wire_mass=read_quantity(sec, "wire_mass", "mass", required=False),
            transition_temperature=read_quantity(sec, "transition_temperature", "temperature",
                                                 default=363.15),
        )
        if kind == "bare":
            return wire
        if kind == "encapsulated":
            air_material = MaterialProps(
                thermal_conductivity=AIR.thermal_conductivity,
                specific_heat=read_quantity(sec, "air_specific_heat", "specific_heat"),
                density=read_quantity(sec, "air_density", "density", default=AIR.density),
            )
            return EncapsulatedActuatorSpec(
                wire=wire,
                air_gap=read_quantity(sec, "air_gap", "length"),
                membrane_thickness=read_quantity(sec, "membrane_thickness", "length"),
                membrane_conductivity=read_quantity(sec, "membrane_conductivity", "conductivity"),
                internal_h=read_quantity(sec, "internal_h", "heat_transfer_coefficient"),
                air_material=air_material,
                air_mass=read_quantity(sec, "air_mass", "mass", required=False),
            )
    except ConfigError:
        raise
    except SMAThermalError as exc:
        raise ConfigError(f"actuator: {exc}") from exc
    raise ConfigError(f"actuator.type must be 'bare' or 'encapsulated', got {kind!r}")


def medium_from_config(cfg: Dict[str, Any]) -> AmbientMedium:
    sec = _section(cfg, "medium")
    return AmbientMedium(
        name=str(sec.get("name", "")),
        temperature=read_quantity(sec, "temperature", "temperature"),
        h_external=read_quantity(sec, "h_external", "heat_transfer_coefficient"),
    )


def drive_from_config(cfg: Dict[str, Any]) -> DriveSpec:
    sec = _section(cfg, "drive")
    f = read_quantity(sec, "frequency", "frequency")
    dc = read_quantity(sec, "duty_cycle", "percent")
    r_sma = read_quantity(sec, "sma_resistance", "resistance")
    r_t = read_quantity(sec, "tether_resistance", "resistance", default=0.0)
    v = read_quantity(sec, "on_voltage", "voltage", required=False)
    current = read_quantity(sec, "on_current", "current", required=False)
    if current is None:
        if v is None:
            raise ConfigError("drive needs on_current or on_voltage")
        return DriveSpec.from_voltage(f, dc, v, r_sma, r_t)
    return DriveSpec(f, dc, current, r_sma, r_t, v)


def integrator_from_config(cfg: Dict[str, Any], **overrides) -> IntegratorConfig:
    sec = cfg.get("integrator", {})
    kwargs = {
        "method": sec.get("method", "exact"),
        "dt": read_quantity(sec, "dt", "time", default=1e-8),
        "sample_rate": read_quantity(sec, "sample_rate", "frequency", default=1e4),
        "horizon": read_quantity(sec, "horizon", "time", required=False),
        "cycles": int(sec["cycles"]) if "cycles" in sec else 1,
        "allow_large_trace": bool(sec.get("allow_large_trace", False)),
    }
    given = {k: v for k, v in overrides.items() if v is not None}
    kwargs.update(given)
    if "cycles" in given:
        kwargs["horizon"] = None
    elif kwargs["horizon"] is not None:
        kwargs["cycles"] = None
    return IntegratorConfig(**kwargs)


def sweep_from_config(cfg: Dict[str, Any]) -> Dict[str, Any]:
    sec = cfg.get("sweep", {})
    out = {
        "window": read_quantity(sec, "window", "time", default=30.0),
        "repetitions": int(sec.get("repetitions", 5)),
        "supply_side": bool(sec.get("supply_side", False)),
        "grid": None,
    }
    if "frequencies" in sec or "duty_cycles" in sec:
        out["grid"] = SweepGrid.matched(
            read_quantity_list(sec, "frequencies", "frequency"),
            read_quantity_list(sec, "duty_cycles", "percent"),
        )
    return out


def budget_from_config(cfg: Dict[str, Any]) -> EnergyBudget:
    sec = _section(cfg, "budget")
    loads_sec = sec.get("loads")
    if not isinstance(loads_sec, dict) or not loads_sec:
        raise ConfigError("budget.loads must name at least one consumer")
    loads = {name: read_quantity(loads_sec, name, "power") for name in loads_sec}
    return EnergyBudget(
        capacity_mah=read_quantity(sec, "capacity", "charge"),
        voltage=read_quantity(sec, "voltage", "voltage"),
        loads=loads,
        usable_fraction=float(sec.get("usable_fraction", 1.0)),
    )
