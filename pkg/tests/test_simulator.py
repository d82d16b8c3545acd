import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_trace
from smathermal.actuator import (
    DriveSpec,
    build_network,
    joule_cycle_average,
    paper_bare_spec,
    paper_drive,
    paper_encapsulated_spec,
    water,
)
from smathermal.errors import InvalidParameterError, SimulationError, StabilityError
from smathermal.simulator import (
    TRACE_HEADER,
    IntegratorConfig,
    detect_transitions,
    integrate,
    pwm_is_on,
    run_cycles_to_steady_state,
    write_trace_csv,
)

T_TR = 363.15


def closed_form(t, t0, q, r, tau):
    """T(t) = T_inf (1 - exp(-t/tau)) + T0 with T_inf = Q R the steady rise."""
    return q * r * (1.0 - np.exp(-t / tau)) + t0


@pytest.mark.parametrize("method", ["euler", "exact"])
def test_single_node_matches_exponential(bare_air, method):
    drive = DriveSpec(20.0, 100.0, 0.125, 8.9)  # always on, 50 ms horizon
    trace = integrate(bare_air, drive, IntegratorConfig(method=method, dt=1e-8, sample_rate=2e3, cycles=1))
    r = bare_air.end_to_end_resistance()
    tau = bare_air.heat_capacities[0] * r
    expected = closed_form(trace.time, 293.15, 8.9 * 0.125**2, r, tau)
    assert np.max(np.abs(trace.t_sma - expected)) < 0.1
    if method == "exact":
        assert np.max(np.abs(trace.t_sma - expected)) < 1e-9


@pytest.mark.parametrize("method", ["euler", "exact"])
def test_zero_current_stays_at_ambient(enc_water, method):
    drive = DriveSpec(50.0, 7.0, 0.0, 8.9)
    trace = integrate(enc_water, drive, IntegratorConfig(method=method, sample_rate=1e3, cycles=2))
    assert np.all(trace.temperatures == pytest.approx(293.15, abs=1e-12))


def test_paper_configuration_properties(enc_water, drive):
    trace = integrate(enc_water, drive, IntegratorConfig(method="exact", cycles=1))
    assert trace.t_sma.max() > T_TR
    assert np.max(np.abs(trace.t_air - 293.15)) < 5.0
    assert np.all(np.diff(trace.time) > 0)
    assert np.all(np.isfinite(trace.temperatures))
    assert trace.time[0] == 0.0 and trace.time[-1] == pytest.approx(1.0)
    events = detect_transitions(trace, T_TR)
    assert events.up_times.size == 1
    assert events.up_in_on_phase.all()
    assert events.cycle_up[0] < drive.on_time
    assert events.cycle_down[0] > events.cycle_up[0]


def test_euler_agrees_with_exact(enc_water, drive):
    exact = integrate(enc_water, drive, IntegratorConfig(method="exact", cycles=1))
    euler = integrate(enc_water, drive, IntegratorConfig(method="euler", dt=1e-8, cycles=1))
    assert np.array_equal(exact.time, euler.time)
    assert np.max(np.abs(exact.temperatures - euler.temperatures)) < 0.1


def test_grid_refinement(enc_water):
    drive = paper_drive(frequency=5.0, duty_cycle=10.0)
    fine = integrate(enc_water, drive, IntegratorConfig(method="euler", dt=1e-8, cycles=1))
    coarse = integrate(enc_water, drive, IntegratorConfig(method="euler", dt=2e-8, cycles=1))
    assert np.max(np.abs(fine.temperatures - coarse.temperatures)) < 0.01


@pytest.mark.parametrize("method", ["euler", "exact"])
def test_energy_balance(enc_water, method):
    drive = paper_drive(frequency=5.0, duty_cycle=10.0)
    trace = integrate(enc_water, drive, IntegratorConfig(method=method, cycles=2))
    expected_in = 2 * drive.on_time * 8.9 * 0.125**2
    assert trace.energy_in == pytest.approx(expected_in, rel=1e-9)
    assert abs(trace.energy_residual()) < 1e-3 * trace.energy_in
    assert trace.energy_out > 0


def test_stability_guard_names_node(enc_water, drive):
    with pytest.raises(StabilityError, match="air"):
        integrate(enc_water, drive, IntegratorConfig(method="euler", dt=5e-5))


def test_non_finite_state_reports_time(bare_air, drive):
    with pytest.raises(SimulationError) as err:
        integrate(bare_air, drive, IntegratorConfig(method="exact", sample_rate=10),
                  initial_temperatures=[np.inf])
    assert err.value.last_valid_time == 0.0


def test_horizon_shorter_than_period_rejected(enc_water, drive):
    with pytest.raises(InvalidParameterError):
        integrate(enc_water, drive, IntegratorConfig(horizon=0.5, cycles=None))


def test_full_rate_trace_guard(enc_water, drive):
    with pytest.raises(InvalidParameterError, match="allow_large_trace"):
        integrate(enc_water, drive, IntegratorConfig(sample_rate=1e8))


@pytest.mark.parametrize("kwargs", [dict(dt=0), dict(method="rk4"), dict(sample_rate=0.5), dict(cycles=0)])
def test_integrator_config_validation(kwargs):
    with pytest.raises(InvalidParameterError):
        IntegratorConfig(**kwargs)


def test_method_aliases():
    assert IntegratorConfig(method="explicit-euler").kind == "euler"
    assert IntegratorConfig(method="exact-linear-segment").kind == "exact"


def test_pwm_schedule_samples():
    t = np.array([0.0, 0.069, 0.07, 0.5, 0.999, 1.0, 1.05])
    assert pwm_is_on(t, 1.0, 0.07).tolist() == [True, True, False, False, False, True, True]
    assert pwm_is_on(t, 1.0, 1.0).all()


def test_heat_input_follows_pwm(enc_water, drive):
    trace = integrate(enc_water, drive, IntegratorConfig(sample_rate=1e3))
    assert trace.pwm.sum() == 70 + 1  # 70 on samples plus the t = 1 s sample opening cycle 2
    assert set(np.unique(trace.heat_input)) == {0.0, 0.1390625}


def test_odd_frequency_schedule_energy(enc_water):
    # switch instants off the sample grid
    drive = paper_drive(frequency=3.0, duty_cycle=9.0)
    trace = integrate(enc_water, drive, IntegratorConfig(method="exact", sample_rate=1e3, cycles=3))
    assert trace.energy_in == pytest.approx(3 * drive.on_time * 0.1390625, rel=1e-9)


def test_continuation_matches_single_run(enc_water, drive):
    cfg = IntegratorConfig(method="exact", sample_rate=1e3, cycles=1)
    first = integrate(enc_water, drive, cfg)
    second = integrate(enc_water, drive, cfg, initial_temperatures=first.final_temperatures, start_time=1.0)
    both = integrate(enc_water, drive, IntegratorConfig(method="exact", sample_rate=1e3, cycles=2))
    assert np.allclose(both.temperatures[1000:], second.temperatures, atol=1e-9)


def test_steady_state_detection(enc_water, drive):
    cfg = IntegratorConfig(method="exact", sample_rate=1e3)
    trace = run_cycles_to_steady_state(enc_water, drive, cfg, tol=1e-3)
    assert trace.converged
    i0 = trace.steady_state_index
    assert i0 is not None and 0 < i0 < trace.time.size
    assert trace.time[i0] == pytest.approx(round(trace.time[i0]))  # starts on a cycle boundary
    # periodic steady state: the cycle mean equals the DC response to the averaged input
    last = trace.time >= trace.time[-1] - 1.0
    mean_t = np.trapezoid(trace.t_sma[last], trace.time[last]) / 1.0
    expected = 293.15 + joule_cycle_average(drive) * enc_water.end_to_end_resistance()
    assert mean_t == pytest.approx(expected, abs=0.05)


def test_steady_state_cap_warns(enc_water, drive):
    cfg = IntegratorConfig(method="exact", sample_rate=100)
    trace = run_cycles_to_steady_state(enc_water, drive, cfg, tol=1e-12, max_cycles=2)
    assert trace.converged is False
    assert "warning" in trace.status
    with pytest.raises(InvalidParameterError):
        run_cycles_to_steady_state(enc_water, drive, cfg, tol=0)


def cycle_mean_sma(h, architecture):
    spec = paper_encapsulated_spec() if architecture == "encapsulated" else paper_bare_spec()
    net = build_network(spec, water(h=h))
    drive = paper_drive(frequency=5.0, duty_cycle=10.0)
    tr = run_cycles_to_steady_state(net, drive, IntegratorConfig(method="exact", sample_rate=2e3), tol=1e-4)
    last = tr.time >= tr.time[-1] - drive.period
    return np.trapezoid(tr.t_sma[last], tr.time[last]) / drive.period


@settings(max_examples=15, deadline=None)
@given(st.floats(50, 20000), st.floats(1.01, 10.0), st.sampled_from(["bare", "encapsulated"]))
def test_raising_external_h_never_heats(h, factor, architecture):
    assert cycle_mean_sma(h * factor, architecture) <= cycle_mean_sma(h, architecture) + 1e-9


def test_bare_water_cools_much_faster(bare_water, enc_water):
    assert enc_water.dominant_time_constant() >= 20 * bare_water.dominant_time_constant()


def test_triangle_wave_crossings():
    # rises 0 -> 2 over [0, 0.5), falls back over [0.5, 1); threshold 1.5
    t = np.linspace(0, 3, 301)
    phase = t % 1.0
    y = np.where(phase < 0.5, 4 * phase, 4 * (1 - phase))
    events = detect_transitions(make_trace(t, y, period=1.0, on_time=0.5), 1.5)
    assert events.up_times == pytest.approx([0.375, 1.375, 2.375], abs=1e-12)
    assert events.down_times == pytest.approx([0.625, 1.625, 2.625], abs=1e-12)
    assert events.cycles.tolist() == [0, 1, 2]
    assert events.fraction_above == pytest.approx([0.25, 0.25, 0.25], abs=1e-12)
    assert (events.cycle_up < events.cycle_down).all()


def test_constant_trace_has_no_events():
    t = np.linspace(0, 2, 21)
    events = detect_transitions(make_trace(t, np.full(21, 293.15)), T_TR)
    assert events.empty
    assert np.isnan(events.cycle_up).all()
    assert (events.fraction_above == 0).all()


def test_trace_csv(tmp_path, enc_water, drive, bare_air):
    path = tmp_path / "trace.csv"
    trace = integrate(enc_water, drive, IntegratorConfig(sample_rate=100))
    assert write_trace_csv(trace, path) == 101
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(TRACE_HEADER)
    assert lines[1] == "0,20,20,1,0.1390625"
    assert len(lines) == 102
    bare = integrate(bare_air, drive, IntegratorConfig(sample_rate=100))
    write_trace_csv(bare, path)
    assert path.read_text().splitlines()[1].split(",")[2] == ""
