import numpy as np
import pytest

from smathermal.actuator import (
    AmbientMedium,
    BareActuatorSpec,
    DriveSpec,
    EncapsulatedActuatorSpec,
    air,
    build_network,
    joule_cycle_average,
    joule_on_phase,
    paper_bare_spec,
    paper_drive,
    paper_encapsulated_spec,
    supply_on_power,
    water,
)
from smathermal.errors import InvalidGeometryError, InvalidParameterError
from smathermal.thermal import (
    ConvectionSurface,
    CylindricalShell,
    conduction_resistance,
    convection_resistance,
)


def test_joule_on_phase():
    assert joule_on_phase(paper_drive()) == pytest.approx(0.1390625, rel=1e-15)
    assert joule_on_phase(DriveSpec(1, 7, 0.0, 8.9)) == 0.0
    d2 = DriveSpec(1, 7, 0.25, 8.9)
    assert joule_on_phase(d2) == pytest.approx(4 * joule_on_phase(paper_drive()))


def test_joule_cycle_average():
    assert joule_cycle_average(paper_drive()) == pytest.approx(0.009734375, rel=1e-14)
    full = paper_drive(duty_cycle=100)
    assert joule_cycle_average(full) == pytest.approx(joule_on_phase(full), rel=1e-15)


@pytest.mark.parametrize("dc", [0.5, 7, 33.3, 100])
def test_cycle_average_is_scaled_on_phase(dc):
    d = paper_drive(duty_cycle=dc)
    assert joule_cycle_average(d) == pytest.approx(dc / 100 * joule_on_phase(d), rel=1e-15)


@pytest.mark.parametrize(
    "kwargs",
    [dict(frequency=0), dict(duty_cycle=0), dict(duty_cycle=101), dict(on_current=-1),
     dict(sma_resistance=0), dict(tether_resistance=-0.1)],
)
def test_drive_validation(kwargs):
    base = dict(frequency=1, duty_cycle=7, on_current=0.125, sma_resistance=8.9)
    base.update(kwargs)
    with pytest.raises(InvalidParameterError):
        DriveSpec(**base)


def test_drive_from_voltage():
    d = DriveSpec.from_voltage(1, 7, 2.7, 8.9, 3.1)
    assert d.on_current == pytest.approx(0.225)
    assert supply_on_power(d) == pytest.approx(2.7 * 0.225)
    assert joule_on_phase(d) == pytest.approx(8.9 * 0.225**2)


def test_encapsulated_water_chain():
    net = build_network(paper_encapsulated_spec(), water())
    values = [e.value for e in net.chain]
    assert values == pytest.approx([3978.3762802623506, 8.066180570289423, 24.160143163855079], rel=1e-12)
    assert [e.label for e in net.chain] == ["R_conv,a", "R_cond,k", "R_conv,f"]
    assert len(net.nodes) == 2
    assert net.ambient_temperature == pytest.approx(293.15)


def test_bare_water_single_resistance():
    net = build_network(paper_bare_spec(), water())
    assert len(net.nodes) == 1
    assert [e.value for e in net.chain] == pytest.approx([167.09180377101873], rel=1e-12)


def test_network_matches_primitives():
    spec = paper_encapsulated_spec()
    net = build_network(spec, air())
    r_a = convection_resistance(ConvectionSurface.cylinder(210, spec.r_sma, spec.length))
    r_k = conduction_resistance(CylindricalShell(spec.r_a, spec.r_k, spec.length), 0.2)
    r_f = convection_resistance(ConvectionSurface.cylinder(210, spec.r_k, spec.length))
    assert [e.value for e in net.chain] == [r_a, r_k, r_f]


def test_zero_width_layers_rejected():
    with pytest.raises(InvalidGeometryError):
        EncapsulatedActuatorSpec(wire=paper_bare_spec(), air_gap=0.0, membrane_thickness=0.0)
    with pytest.raises(InvalidGeometryError):
        EncapsulatedActuatorSpec(wire=paper_bare_spec(), air_gap=1e-4, membrane_thickness=0.0)


def test_internal_resistance_dominates_external():
    net = build_network(paper_encapsulated_spec(), water())
    r_int = net.links[0].resistance
    r_ext = net.links[1].resistance
    assert r_int > 100 * r_ext


def test_mass_from_density_matches_paper_values():
    spec = BareActuatorSpec(wire_radius=1.905e-5, length=0.01)
    assert spec.mass == pytest.approx(7.35e-8, rel=2e-3)
    enc = EncapsulatedActuatorSpec(wire=spec, air_gap=1e-4, membrane_thickness=1.27e-5)
    assert enc.air_pocket_mass == pytest.approx(5.31e-10, rel=2e-2)


def test_conductance_matrix_symmetry(enc_water):
    g, g_amb = enc_water.conductance_matrix()
    assert np.allclose(g, g.T)
    assert g_amb[0] == 0 and g_amb[1] > 0
    # row sums equal the conductance to ambient
    assert np.allclose(g.sum(axis=1), g_amb)


def test_end_to_end_resistance(enc_water, bare_water):
    assert enc_water.end_to_end_resistance() == pytest.approx(3978.3762802623506 + 8.066180570289423 + 24.160143163855079, rel=1e-12)
    assert bare_water.end_to_end_resistance() == pytest.approx(167.09180377101873, rel=1e-12)


def test_time_constants(enc_water):
    tau = enc_water.time_constants()
    assert tau[0] == pytest.approx(7.35e-8 * 836.8 * 3978.3762802623506, rel=1e-12)
    assert tau[1] == pytest.approx(1.7e-5, rel=0.05)


def test_medium_validation():
    with pytest.raises(InvalidParameterError):
        AmbientMedium("water", 293.15, 0.0)
