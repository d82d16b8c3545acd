"""
Actuator architectures (bare wire, air-encapsulated wire) and their PWM drive.

``build_network`` turns an actuator spec plus an ambient medium into a
:class:`BuiltNetwork`: an ordered list of lumped nodes and the series
resistance chains that couple them to each other and to the ambient sink.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List, Optional, Tuple, Union

import numpy as np

from .errors import InvalidGeometryError, InvalidParameterError
from .thermal import (
    ConvectionSurface,
    CylindricalShell,
    MaterialProps,
    ResistanceElement,
    ThermalNode,
    c_to_k,
    series_equivalent,
)

# Dynalloy 90 C HT, 0.0381 mm diameter
NITI = MaterialProps(thermal_conductivity=18.0, specific_heat=836.8, density=6450.0)
AIR = MaterialProps(thermal_conductivity=0.026, specific_heat=1005.0, density=1.225)
KAPTON_CONDUCTIVITY = 0.2

H_AIR = 210.0
H_WATER = 5000.0


@dataclass(frozen=True)
class DriveSpec:
    """PWM excitation of the SMA wire.

    Attributes:
        frequency: PWM frequency (Hz)
        duty_cycle: on-fraction of the period in percent, 0 < DC <= 100
        on_current: current through the wire during the on-state (A)
        sma_resistance: electrical resistance of the wire (ohm)
        tether_resistance: lead/tether resistance in series with the wire (ohm)
        on_voltage: supply on-height (V), informational
    """

    frequency: float
    duty_cycle: float
    on_current: float
    sma_resistance: float
    tether_resistance: float = 0.0
    on_voltage: Optional[float] = None

    def __post_init__(self):
        if not self.frequency > 0:
            raise InvalidParameterError(f"PWM frequency must be positive, got {self.frequency}")
        if not 0 < self.duty_cycle <= 100:
            raise InvalidParameterError(f"duty cycle must be in (0, 100] %, got {self.duty_cycle}")
        if not self.on_current >= 0:
            raise InvalidParameterError("on-current must be >= 0")
        if not self.sma_resistance > 0:
            raise InvalidParameterError("SMA resistance must be positive")
        if not self.tether_resistance >= 0:
            raise InvalidParameterError("tether resistance must be >= 0")

    @classmethod
    def from_voltage(cls, frequency, duty_cycle, on_voltage, sma_resistance, tether_resistance=0.0):
        """Drive whose on-current is set by a voltage across wire + tether."""
        current = on_voltage / (sma_resistance + tether_resistance)
        return cls(frequency, duty_cycle, current, sma_resistance, tether_resistance, on_voltage)

    @property
    def period(self) -> float:
        return 1.0 / self.frequency

    @property
    def on_time(self) -> float:
        return self.period * self.duty_cycle / 100.0

    def with_pwm(self, frequency: float, duty_cycle: float) -> "DriveSpec":
        return replace(self, frequency=frequency, duty_cycle=duty_cycle)


def joule_on_phase(drive: DriveSpec) -> float:
    """Heat dissipated in the wire while the PWM is on, R_sma * I^2 (W)."""
    return drive.sma_resistance * drive.on_current**2


def joule_cycle_average(drive: DriveSpec) -> float:
    """Cycle-averaged Joule heating, 1e-2 * DC * R_sma * I^2 (W)."""
    return 1e-2 * drive.duty_cycle * drive.sma_resistance * drive.on_current**2


def supply_on_power(drive: DriveSpec) -> float:
    """On-state power drawn from the supply, including the tether (W)."""
    return (drive.sma_resistance + drive.tether_resistance) * drive.on_current**2


@dataclass(frozen=True)
class AmbientMedium:
    name: str
    temperature: float
    h_external: float

    def __post_init__(self):
        if not self.h_external > 0:
            raise InvalidParameterError("external heat-transfer coefficient must be positive")
        if not self.temperature > 0:
            raise InvalidParameterError("ambient temperature must be > 0 K")


def water(temperature_c: float = 20.0, h: float = H_WATER) -> AmbientMedium:
    return AmbientMedium("water", c_to_k(temperature_c), h)


def air(temperature_c: float = 20.0, h: float = H_AIR) -> AmbientMedium:
    return AmbientMedium("air", c_to_k(temperature_c), h)


@dataclass(frozen=True)
class BareActuatorSpec:
    """A bare SMA wire of radius ``wire_radius`` and length ``length`` (m).

    ``wire_mass`` may be omitted when the material carries a density.
    """

    wire_radius: float
    length: float
    material: MaterialProps = NITI
    wire_mass: Optional[float] = None
    transition_temperature: float = c_to_k(90.0)

    def __post_init__(self):
        if not (self.wire_radius > 0 and self.length > 0):
            raise InvalidGeometryError("wire radius and length must be positive")
        if self.wire_mass is None and self.material.density is None:
            raise InvalidParameterError("wire mass or material density is required")
        if self.wire_mass is not None and not self.wire_mass > 0:
            raise InvalidParameterError("wire mass must be positive")

    @property
    def mass(self) -> float:
        if self.wire_mass is not None:
            return self.wire_mass
        return self.material.density * math.pi * self.wire_radius**2 * self.length

    def wire_node(self, temperature: float) -> ThermalNode:
        return ThermalNode("sma", self.mass, self.material.specific_heat, temperature)


@dataclass(frozen=True)
class EncapsulatedActuatorSpec:
    """SMA wire inside an annular air pocket sealed by a thin membrane.

    Radii: r_sma = wire radius, r_a = r_sma + air_gap, r_k = r_a + membrane_thickness.
    """

    wire: BareActuatorSpec
    air_gap: float
    membrane_thickness: float
    membrane_conductivity: float = KAPTON_CONDUCTIVITY
    internal_h: float = H_AIR
    air_material: MaterialProps = AIR
    air_mass: Optional[float] = None

    def __post_init__(self):
        if not (self.air_gap > 0 and self.membrane_thickness > 0):
            raise InvalidGeometryError(
                "encapsulation radii must be strictly increasing "
                f"(air gap {self.air_gap} m, membrane {self.membrane_thickness} m)"
            )
        if not (self.membrane_conductivity > 0 and self.internal_h > 0):
            raise InvalidParameterError("membrane conductivity and internal h must be positive")
        if self.air_mass is None and self.air_material.density is None:
            raise InvalidParameterError("air mass or air density is required")

    @property
    def transition_temperature(self) -> float:
        return self.wire.transition_temperature

    @property
    def r_sma(self) -> float:
        return self.wire.wire_radius

    @property
    def r_a(self) -> float:
        return self.r_sma + self.air_gap

    @property
    def r_k(self) -> float:
        return self.r_a + self.membrane_thickness

    @property
    def length(self) -> float:
        return self.wire.length

    @property
    def air_pocket_mass(self) -> float:
        if self.air_mass is not None:
            return self.air_mass
        return self.air_material.density * math.pi * (self.r_a**2 - self.r_sma**2) * self.length


ActuatorSpec = Union[BareActuatorSpec, EncapsulatedActuatorSpec]


@dataclass(frozen=True)
class ThermalLink:
    """Series chain between node ``a`` and node ``b`` (``b is None`` means ambient)."""

    a: int
    b: Optional[int]
    elements: Tuple[ResistanceElement, ...]

    @property
    def resistance(self) -> float:
        return series_equivalent(self.elements)


@dataclass(frozen=True)
class BuiltNetwork:
    nodes: Tuple[ThermalNode, ...]
    links: Tuple[ThermalLink, ...]
    ambient_temperature: float
    transition_temperature: float
    medium: str = ""
    architecture: str = ""

    def __post_init__(self):
        if not self.links:
            raise InvalidParameterError("network needs at least one resistance")
        n = len(self.nodes)
        for link in self.links:
            if not (0 <= link.a < n) or (link.b is not None and not 0 <= link.b < n):
                raise InvalidParameterError("link refers to an unknown node")
            if not link.resistance > 0:
                raise InvalidParameterError("every link needs a positive total resistance")

    @property
    def chain(self) -> List[ResistanceElement]:
        """All resistance elements in link order (SMA outward)."""
        return [e for link in self.links for e in link.elements]

    @property
    def heat_capacities(self) -> np.ndarray:
        return np.array([n.heat_capacity for n in self.nodes])

    def conductance_matrix(self) -> Tuple[np.ndarray, np.ndarray]:
        """Return (G, g_ambient) such that C dT/dt = -G T + g_ambient * T_amb + q."""
        n = len(self.nodes)
        g = np.zeros((n, n))
        g_amb = np.zeros(n)
        for link in self.links:
            c = 1.0 / link.resistance
            g[link.a, link.a] += c
            if link.b is None:
                g_amb[link.a] += c
            else:
                g[link.b, link.b] += c
                g[link.a, link.b] -= c
                g[link.b, link.a] -= c
        return g, g_amb

    def parallel_resistances(self) -> np.ndarray:
        """Per node, the parallel combination of every resistance touching it."""
        g, _ = self.conductance_matrix()
        return 1.0 / np.diag(g)

    def time_constants(self) -> np.ndarray:
        """Per-node m*C_p*R_parallel (s), the explicit-Euler stability scale."""
        return self.heat_capacities * self.parallel_resistances()

    def end_to_end_resistance(self, node: int = 0) -> float:
        """Steady temperature rise of ``node`` per watt injected into it (K/W)."""
        g, _ = self.conductance_matrix()
        e = np.zeros(len(self.nodes))
        e[node] = 1.0
        return float(np.linalg.solve(g, e)[node])

    def dominant_time_constant(self) -> float:
        """Slowest decay time (s) of the unforced network."""
        g, _ = self.conductance_matrix()
        a = -g / self.heat_capacities[:, None]
        return float(-1.0 / np.max(np.linalg.eigvals(a).real))


def build_network(spec: ActuatorSpec, medium: AmbientMedium) -> BuiltNetwork:
    """Lumped network for ``spec`` immersed in ``medium``; nodes start at ambient."""
    t_amb = medium.temperature
    if isinstance(spec, BareActuatorSpec):
        surface = ConvectionSurface.cylinder(medium.h_external, spec.wire_radius, spec.length)
        r_conv = ResistanceElement.convection(surface, "R_conv")
        return BuiltNetwork(
            nodes=(spec.wire_node(t_amb),),
            links=(ThermalLink(0, None, (r_conv,)),),
            ambient_temperature=t_amb,
            transition_temperature=spec.transition_temperature,
            medium=medium.name,
            architecture="bare",
        )
    if isinstance(spec, EncapsulatedActuatorSpec):
        if not spec.r_sma < spec.r_a < spec.r_k:
            raise InvalidGeometryError("radii must satisfy r_sma < r_a < r_k")
        length = spec.length
        r_conv_a = ResistanceElement.convection(
            ConvectionSurface.cylinder(spec.internal_h, spec.r_sma, length), "R_conv,a"
        )
        r_cond_k = ResistanceElement.conduction(
            CylindricalShell(spec.r_a, spec.r_k, length), spec.membrane_conductivity, "R_cond,k"
        )
        r_conv_f = ResistanceElement.convection(
            ConvectionSurface.cylinder(medium.h_external, spec.r_k, length), "R_conv,f"
        )
        air_node = ThermalNode("air", spec.air_pocket_mass, spec.air_material.specific_heat, t_amb)
        return BuiltNetwork(
            nodes=(spec.wire.wire_node(t_amb), air_node),
            links=(ThermalLink(0, 1, (r_conv_a,)), ThermalLink(1, None, (r_cond_k, r_conv_f))),
            ambient_temperature=t_amb,
            transition_temperature=spec.transition_temperature,
            medium=medium.name,
            architecture="encapsulated",
        )
    raise TypeError(f"unsupported actuator spec {type(spec).__name__}")


def paper_bare_spec() -> BareActuatorSpec:
    return BareActuatorSpec(wire_radius=0.01905e-3, length=10e-3, wire_mass=7.35e-8)


def paper_encapsulated_spec() -> EncapsulatedActuatorSpec:
    return EncapsulatedActuatorSpec(
        wire=paper_bare_spec(),
        air_gap=0.1e-3,
        membrane_thickness=0.0127e-3,
        membrane_conductivity=KAPTON_CONDUCTIVITY,
        internal_h=H_AIR,
        air_mass=5.31e-10,
    )


def paper_drive(frequency: float = 1.0, duty_cycle: float = 7.0) -> DriveSpec:
    """125 mA through the 8.9 ohm wire."""
    return DriveSpec(frequency, duty_cycle, on_current=0.125, sma_resistance=8.9)
