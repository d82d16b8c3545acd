"""
Lumped thermal primitives: cylindrical-shell conduction, surface convection,
series composition, and the single-node energy balance.

All quantities are SI (m, K, W, kg, J). Temperatures are kelvin internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import InvalidGeometryError, InvalidParameterError

ZERO_CELSIUS = 273.15


def c_to_k(t_c: float) -> float:
    return t_c + ZERO_CELSIUS


def k_to_c(t_k: float) -> float:
    return t_k - ZERO_CELSIUS


@dataclass(frozen=True)
class MaterialProps:
    """Bulk material properties.

    Attributes:
        thermal_conductivity: k (W/(m*K))
        specific_heat: C_p (J/(kg*K))
        density: kg/m^3, optional; only needed to derive a mass from a volume
    """

    thermal_conductivity: float
    specific_heat: float
    density: Optional[float] = None

    def __post_init__(self):
        if not self.thermal_conductivity > 0 or not self.specific_heat > 0:
            raise InvalidParameterError("material properties must be strictly positive")
        if self.density is not None and not self.density > 0:
            raise InvalidParameterError("density must be strictly positive")


@dataclass(frozen=True)
class CylindricalShell:
    """Coaxial tube of inner radius r_in, outer radius r_out and length L (m)."""

    r_in: float
    r_out: float
    length: float

    def __post_init__(self):
        if not (self.r_in > 0 and self.r_out > 0 and self.length > 0):
            raise InvalidGeometryError(
                f"shell dimensions must be positive (r_in={self.r_in}, "
                f"r_out={self.r_out}, L={self.length})"
            )
        if self.r_out < self.r_in:
            raise InvalidGeometryError(f"r_out={self.r_out} < r_in={self.r_in}")

    @property
    def outer_area(self) -> float:
        return 2.0 * math.pi * self.r_out * self.length

    @property
    def inner_area(self) -> float:
        return 2.0 * math.pi * self.r_in * self.length

    @property
    def volume(self) -> float:
        return math.pi * (self.r_out**2 - self.r_in**2) * self.length


@dataclass(frozen=True)
class ConvectionSurface:
    """Surface with mean heat-transfer coefficient h_bar (W/(m^2*K)) over area (m^2)."""

    h_bar: float
    area: float

    def __post_init__(self):
        if not (self.h_bar > 0 and self.area > 0):
            raise InvalidParameterError(
                f"h_bar and contact area must be positive (h={self.h_bar}, A={self.area})"
            )

    @classmethod
    def cylinder(cls, h_bar: float, radius: float, length: float) -> "ConvectionSurface":
        if not (radius > 0 and length > 0):
            raise InvalidGeometryError("cylinder radius and length must be positive")
        return cls(h_bar, 2.0 * math.pi * radius * length)


@dataclass(frozen=True)
class ThermalNode:
    """Lumped mass at a uniform temperature (K)."""

    label: str
    mass: float
    specific_heat: float
    temperature: float = c_to_k(20.0)

    def __post_init__(self):
        if not (self.mass > 0 and self.specific_heat > 0):
            raise InvalidParameterError(f"node {self.label!r}: mass and C_p must be positive")
        if not self.temperature > 0:
            raise InvalidParameterError(f"node {self.label!r}: temperature must be > 0 K")

    @property
    def heat_capacity(self) -> float:
        """m * C_p in J/K."""
        return self.mass * self.specific_heat


def conduction_resistance(shell: CylindricalShell, k: float) -> float:
    """Radial conduction resistance of a cylindrical shell, ln(r_out/r_in)/(2 pi L k).

    A zero-thickness shell returns 0 so that an absent layer composes in series.
    """
    if not k > 0:
        raise InvalidParameterError(f"thermal conductivity must be positive, got {k}")
    if shell.r_out == shell.r_in:
        return 0.0
    # log1p keeps full relative precision for thin shells
    return math.log1p((shell.r_out - shell.r_in) / shell.r_in) / (2.0 * math.pi * shell.length * k)


def convection_resistance(surface: ConvectionSurface) -> float:
    """1 / (h_bar * A_c) in K/W."""
    return 1.0 / (surface.h_bar * surface.area)


@dataclass(frozen=True)
class ResistanceElement:
    """One thermal resistance in a chain.

    Built through :meth:`conduction` / :meth:`convection` so that ``value`` is
    always the formula output for the stored geometry.
    """

    kind: str
    value: float
    label: str = ""
    source: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in ("conduction", "convection"):
            raise InvalidParameterError(f"unknown resistance kind {self.kind!r}")
        if not self.value >= 0 or not math.isfinite(self.value):
            raise InvalidParameterError(f"resistance must be finite and >= 0, got {self.value}")

    @classmethod
    def conduction(cls, shell: CylindricalShell, k: float, label: str = "") -> "ResistanceElement":
        return cls("conduction", conduction_resistance(shell, k), label, (shell, k))

    @classmethod
    def convection(cls, surface: ConvectionSurface, label: str = "") -> "ResistanceElement":
        return cls("convection", convection_resistance(surface), label, surface)


def series_equivalent(elements: Iterable) -> float:
    """Sum of series resistances; accepts ResistanceElement or plain floats."""
    values = [e.value if isinstance(e, ResistanceElement) else float(e) for e in elements]
    if not values:
        raise InvalidParameterError("series_equivalent needs at least one element")
    return math.fsum(values)


def heat_outflow(t_hot: float, t_cold: float, r_eq: float) -> float:
    """Heat flow (W) from t_hot to t_cold through r_eq; negative if t_hot < t_cold."""
    if not r_eq > 0:
        raise InvalidParameterError(f"equivalent resistance must be positive, got {r_eq}")
    return (t_hot - t_cold) / r_eq


def node_derivative(node: ThermalNode, q_in: float, q_out: float) -> float:
    """dT/dt = (Q_in - Q_out) / (m C_p) in K/s."""
    return (q_in - q_out) / node.heat_capacity
