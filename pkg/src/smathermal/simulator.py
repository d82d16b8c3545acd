"""
Time integration of the lumped network under PWM Joule heating.

Two fixed-step methods are available:

* ``euler`` (alias ``explicit-euler``): forward Euler at step ``dt``, the
  high-fidelity reference. Subject to the stability bound
  dt < 2 * m * C_p * R_parallel for every node.
* ``exact`` (alias ``exact-linear-segment``): between PWM switch instants
  the system is linear with constant input, so each segment is advanced
  with a matrix exponential. Unconditionally stable; used for sweeps.

Heat is injected into the SMA node (node 0) at R_sma * I^2 while the PWM
is on and zero while it is off. All nodes start at ambient unless an
initial state is given.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.linalg import expm

from . import _kernels
from .actuator import BuiltNetwork, DriveSpec, joule_on_phase
from .errors import InvalidParameterError, SimulationError, StabilityError
from .thermal import ZERO_CELSIUS

log = logging.getLogger(__name__)

METHOD_ALIASES = {
    "euler": "euler",
    "explicit-euler": "euler",
    "exact": "exact",
    "exact-linear-segment": "exact",
}

FULL_RATE_SAMPLE_LIMIT = 5_000_000


@dataclass(frozen=True)
class IntegratorConfig:
    """Integration settings.

    Attributes:
        dt: Euler step (s); ignored by the exact method except for bookkeeping
        method: "euler" or "exact" (long aliases accepted)
        sample_rate: recorded samples per second (Hz), >= 1
        horizon: simulated time (s); mutually exclusive with ``cycles``
        cycles: simulated PWM periods
        allow_large_trace: lift the recorded-sample cap
    """

    dt: float = 1e-8
    method: str = "exact"
    sample_rate: float = 1e4
    horizon: Optional[float] = None
    cycles: Optional[int] = 1
    allow_large_trace: bool = False

    def __post_init__(self):
        if not self.dt > 0:
            raise InvalidParameterError(f"step size must be positive, got {self.dt}")
        if self.method not in METHOD_ALIASES:
            raise InvalidParameterError(
                f"unknown method {self.method!r}; expected one of {sorted(METHOD_ALIASES)}"
            )
        if not self.sample_rate >= 1.0:
            raise InvalidParameterError("trace decimation must be at least 1 sample/s")
        if self.horizon is not None and not self.horizon > 0:
            raise InvalidParameterError("horizon must be positive")
        if self.horizon is None and (self.cycles is None or self.cycles < 1):
            raise InvalidParameterError("give a positive horizon or cycle count")

    @property
    def kind(self) -> str:
        return METHOD_ALIASES[self.method]

    def horizon_for(self, drive: DriveSpec) -> float:
        if self.horizon is not None:
            return float(self.horizon)
        return self.cycles * drive.period


@dataclass
class SimTrace:
    """Decimated simulation output. Temperatures are kelvin, shape (samples, nodes)."""

    time: np.ndarray
    temperatures: np.ndarray
    pwm: np.ndarray
    heat_input: np.ndarray
    node_labels: List[str]
    period: float
    on_time: float
    ambient_temperature: float
    heat_capacities: np.ndarray
    energy_in: float
    energy_out: float
    method: str
    steady_state_index: Optional[int] = None
    converged: Optional[bool] = None
    status: str = "ok"

    @property
    def t_sma(self) -> np.ndarray:
        return self.temperatures[:, 0]

    @property
    def t_air(self) -> Optional[np.ndarray]:
        if "air" in self.node_labels:
            return self.temperatures[:, self.node_labels.index("air")]
        return None

    @property
    def final_temperatures(self) -> np.ndarray:
        return self.temperatures[-1].copy()

    @property
    def stored_energy(self) -> float:
        """Sum of m*C_p*(T_end - T_start) over nodes (J)."""
        return float(np.dot(self.heat_capacities, self.temperatures[-1] - self.temperatures[0]))

    def energy_residual(self) -> float:
        """Stored energy minus (input - output); zero for exact bookkeeping."""
        return self.stored_energy - (self.energy_in - self.energy_out)


def pwm_is_on(t, period: float, on_time: float):
    """PWM state on [t, t+) for a schedule whose cycles start at integer periods."""
    t = np.asarray(t, dtype=float)
    if on_time >= period:
        return np.ones(t.shape, dtype=bool)
    # tiny forward nudge so a sample sitting on a switch instant reports the new state
    tn = t + 1e-12 * period
    phase = tn - np.floor(tn / period) * period
    return phase < on_time


def _schedule(t_start, horizon, drive, sample_rate):
    """Breakpoints covering [t_start, t_start + horizon]: samples plus PWM switches."""
    t_end = t_start + horizon
    n_intervals = int(math.ceil(horizon * sample_rate - 1e-9))
    samples = t_start + np.arange(n_intervals) / sample_rate
    samples = np.append(samples, t_end)

    period, on_time = drive.period, drive.on_time
    switches = []
    if on_time < period:
        k0 = int(math.floor(t_start / period))
        k1 = int(math.ceil(t_end / period))
        ks = np.arange(k0, k1 + 1, dtype=float)
        switches = np.concatenate([ks * period, ks * period + on_time])
        switches = switches[(switches > t_start) & (switches < t_end)]
    pts = np.concatenate([samples, switches])
    flags = np.concatenate([np.ones(samples.size, bool), np.zeros(len(switches), bool)])
    order = np.argsort(pts, kind="stable")
    pts, flags = pts[order], flags[order]

    tol = 1e-12 * max(1.0, abs(t_end))
    new_group = np.empty(pts.size, bool)
    new_group[0] = True
    new_group[1:] = np.diff(pts) > tol
    starts = np.flatnonzero(new_group)
    merged_flags = np.maximum.reduceat(flags.astype(np.int8), starts).astype(bool)
    # prefer the sample instant when a switch coincides with it
    merged_pts = pts[starts].copy()
    group = np.cumsum(new_group) - 1
    sample_idx = np.flatnonzero(flags)
    merged_pts[group[sample_idx]] = pts[sample_idx]
    t_a, t_b = merged_pts[:-1], merged_pts[1:]
    on = pwm_is_on(0.5 * (t_a + t_b), period, on_time)
    record = merged_flags[1:]
    return merged_pts[merged_flags], t_a, t_b, on, record


def _system(network: BuiltNetwork, drive: DriveSpec):
    g, g_amb = network.conductance_matrix()
    cap = network.heat_capacities
    a_mat = -g / cap[:, None]
    q_on = joule_on_phase(drive)
    u_on = np.zeros(len(network.nodes))
    u_on[0] = q_on / cap[0]
    return a_mat, u_on, q_on, g_amb, cap


def check_stability(network: BuiltNetwork, dt: float) -> None:
    """Raise StabilityError if forward Euler at ``dt`` would be unstable."""
    taus = network.time_constants()
    i = int(np.argmin(taus))
    if not dt < 2.0 * taus[i]:
        raise StabilityError(
            f"explicit Euler step {dt:g} s exceeds stability bound 2*tau = {2 * taus[i]:g} s "
            f"of node {network.nodes[i].label!r} (tau = m*C_p*R_parallel = {taus[i]:g} s)"
        )


def _augmented_propagator(a_mat, u, q, g_amb, h):
    """expm of the system augmented with [E_in, E_out, 1] over a step h."""
    n = a_mat.shape[0]
    m = np.zeros((n + 3, n + 3))
    m[:n, :n] = a_mat
    m[:n, n + 2] = u
    m[n, n + 2] = q
    m[n + 1, :n] = g_amb
    return expm(m * h)


def integrate(
    network: BuiltNetwork,
    drive: DriveSpec,
    cfg: IntegratorConfig,
    initial_temperatures: Optional[Sequence[float]] = None,
    start_time: float = 0.0,
) -> SimTrace:
    """Simulate ``network`` under ``drive`` and return the decimated trace."""
    horizon = cfg.horizon_for(drive)
    if horizon < drive.period * (1 - 1e-9):
        raise InvalidParameterError(
            f"horizon {horizon:g} s is shorter than one PWM period ({drive.period:g} s)"
        )
    method = cfg.kind
    if method == "euler":
        check_stability(network, cfg.dt)

    n_samples = int(math.ceil(horizon * cfg.sample_rate - 1e-9)) + 1
    if n_samples > FULL_RATE_SAMPLE_LIMIT and not cfg.allow_large_trace:
        raise InvalidParameterError(
            f"trace would hold {n_samples} samples; lower sample_rate or set allow_large_trace"
        )

    t_amb = network.ambient_temperature
    n = len(network.nodes)
    if initial_temperatures is None:
        theta0 = np.array([node.temperature for node in network.nodes]) - t_amb
    else:
        theta0 = np.asarray(initial_temperatures, dtype=float) - t_amb
        if theta0.shape != (n,):
            raise InvalidParameterError(f"expected {n} initial temperatures")

    times, t_a, t_b, on, record = _schedule(start_time, horizon, drive, cfg.sample_rate)
    a_mat, u_on, q_on, g_amb, cap = _system(network, drive)
    out = np.empty((times.size, n))
    out[0] = theta0

    if method == "euler":
        theta = theta0.copy()
        energy = np.zeros(2)
        status, last_ok, _ = _kernels.euler_intervals(
            theta, a_mat, u_on, q_on, g_amb, t_a, t_b, on, record, cfg.dt, out, energy
        )
        e_in, e_out = energy
    else:
        # interval lengths differ only by rounding noise; share propagators
        lengths = np.round(t_b - t_a, 15)
        keys = np.stack([lengths, on.astype(float)], axis=1)
        uniq, index = np.unique(keys, axis=0, return_inverse=True)
        props = np.empty((uniq.shape[0], n + 3, n + 3))
        for i, (h, is_on) in enumerate(uniq):
            props[i] = _augmented_propagator(
                a_mat, u_on * is_on, q_on * is_on, g_amb, h
            )
        z = np.zeros(n + 3)
        z[:n] = theta0
        z[n + 2] = 1.0
        status, last_ok, _ = _kernels.propagate_intervals(
            z, props, index.ravel().astype(np.int64), t_b, record, n, out
        )
        e_in, e_out = z[n], z[n + 1]

    if status != 0:
        raise SimulationError(
            f"non-finite temperature during {method} integration; last valid time {last_ok:.9g} s",
            last_valid_time=last_ok,
        )

    pwm = pwm_is_on(times, drive.period, drive.on_time)
    return SimTrace(
        time=times,
        temperatures=out + t_amb,
        pwm=pwm,
        heat_input=np.where(pwm, q_on, 0.0),
        node_labels=[node.label for node in network.nodes],
        period=drive.period,
        on_time=drive.on_time,
        ambient_temperature=t_amb,
        heat_capacities=cap,
        energy_in=float(e_in),
        energy_out=float(e_out),
        method=method,
    )


def concatenate(traces: Sequence[SimTrace]) -> SimTrace:
    """Join back-to-back traces, dropping each duplicated boundary sample."""
    first = traces[0]
    parts_t, parts_T, parts_p, parts_q = [first.time], [first.temperatures], [first.pwm], [first.heat_input]
    for tr in traces[1:]:
        parts_t.append(tr.time[1:])
        parts_T.append(tr.temperatures[1:])
        parts_p.append(tr.pwm[1:])
        parts_q.append(tr.heat_input[1:])
    return SimTrace(
        time=np.concatenate(parts_t),
        temperatures=np.concatenate(parts_T),
        pwm=np.concatenate(parts_p),
        heat_input=np.concatenate(parts_q),
        node_labels=list(first.node_labels),
        period=first.period,
        on_time=first.on_time,
        ambient_temperature=first.ambient_temperature,
        heat_capacities=first.heat_capacities,
        energy_in=sum(tr.energy_in for tr in traces),
        energy_out=sum(tr.energy_out for tr in traces),
        method=first.method,
    )


def run_cycles_to_steady_state(
    network: BuiltNetwork,
    drive: DriveSpec,
    cfg: IntegratorConfig,
    tol: float = 1e-3,
    max_cycles: int = 500,
    min_cycles: int = 2,
) -> SimTrace:
    """Repeat single PWM cycles until consecutive cycles differ by less than ``tol`` K.

    The returned trace spans every simulated cycle; ``steady_state_index`` is
    the first sample of the first cycle that matched its predecessor.
    If ``max_cycles`` is reached, ``converged`` is False and ``status``
    carries the warning.
    """
    if not tol > 0:
        raise InvalidParameterError("tolerance must be positive")
    cycle_cfg = IntegratorConfig(
        dt=cfg.dt, method=cfg.method, sample_rate=cfg.sample_rate, cycles=1,
        allow_large_trace=cfg.allow_large_trace,
    )
    traces: List[SimTrace] = []
    state = None
    onset_cycle = None
    for c in range(max_cycles):
        tr = integrate(network, drive, cycle_cfg, initial_temperatures=state, start_time=c * drive.period)
        traces.append(tr)
        state = tr.final_temperatures
        if c >= 1 and c + 1 >= min_cycles:
            prev = traces[-2].temperatures
            if prev.shape == tr.temperatures.shape:
                delta = float(np.max(np.abs(tr.temperatures - prev)))
                if delta < tol:
                    onset_cycle = c
                    break
    result = concatenate(traces)
    samples_per_cycle = traces[0].time.size - 1
    if onset_cycle is None:
        result.converged = False
        result.status = (
            f"warning: no steady state within {max_cycles} cycles (tol {tol:g} K)"
        )
        log.warning(result.status)
    else:
        result.converged = True
        result.steady_state_index = onset_cycle * samples_per_cycle
    return result


@dataclass
class TransitionEvents:
    """Threshold crossings of the SMA temperature.

    Per-cycle arrays are indexed like ``cycles`` (absolute PWM cycle numbers);
    a missing crossing is NaN.
    """

    threshold: float
    up_times: np.ndarray
    down_times: np.ndarray
    cycles: np.ndarray
    cycle_up: np.ndarray
    cycle_down: np.ndarray
    fraction_above: np.ndarray
    up_in_on_phase: np.ndarray

    @property
    def empty(self) -> bool:
        return self.up_times.size == 0 and self.down_times.size == 0

    def to_dict(self) -> Dict:
        def clean(a):
            return [None if not math.isfinite(x) else float(f"{x:.9g}") for x in a]

        return {
            "threshold_C": float(f"{self.threshold - ZERO_CELSIUS:.9g}"),
            "up_crossings_s": clean(self.up_times),
            "down_crossings_s": clean(self.down_times),
            "cycles": [
                {
                    "cycle": int(c),
                    "up_s": clean([u])[0],
                    "down_s": clean([d])[0],
                    "fraction_above": float(f"{f:.9g}"),
                    "up_in_on_phase": bool(p),
                }
                for c, u, d, f, p in zip(
                    self.cycles, self.cycle_up, self.cycle_down, self.fraction_above, self.up_in_on_phase
                )
            ],
        }


def _crossings(t, y, thr):
    s = y - thr
    up = np.flatnonzero((s[:-1] <= 0) & (s[1:] > 0))
    down = np.flatnonzero((s[:-1] > 0) & (s[1:] <= 0))

    def interp(idx):
        frac = (thr - y[idx]) / (y[idx + 1] - y[idx])
        return t[idx] + frac * (t[idx + 1] - t[idx])

    return interp(up), interp(down)


def detect_transitions(trace: SimTrace, threshold: float, node: int = 0) -> TransitionEvents:
    """Locate up/down crossings of ``threshold`` (K) by linear interpolation."""
    t = np.asarray(trace.time, dtype=float)
    y = np.asarray(trace.temperatures, dtype=float)
    y = y[:, node] if y.ndim == 2 else y
    if t.size == 0:
        raise InvalidParameterError("empty trace")
    up, down = _crossings(t, y, threshold)

    period, on_time = trace.period, trace.on_time
    k_first = int(math.floor(t[0] / period + 1e-9))
    k_last = int(math.ceil(t[-1] / period - 1e-9)) - 1
    cycles = np.arange(k_first, max(k_last, k_first) + 1)

    # time above threshold per segment, assigned to the cycle holding its midpoint
    dt = np.diff(t)
    y0, y1 = y[:-1] - threshold, y[1:] - threshold
    above = np.where((y0 > 0) & (y1 > 0), dt, 0.0)
    mixed = (y0 > 0) != (y1 > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        part = np.where(y0 > 0, y0 / (y0 - y1), y1 / (y1 - y0)) * dt
    above = np.where(mixed, part, above)
    seg_cycle = np.floor(0.5 * (t[:-1] + t[1:]) / period).astype(int)

    cyc_up = np.full(cycles.size, np.nan)
    cyc_down = np.full(cycles.size, np.nan)
    frac = np.zeros(cycles.size)
    in_on = np.zeros(cycles.size, bool)
    up_cyc = np.floor(up / period + 1e-12).astype(int)
    down_cyc = np.floor(down / period + 1e-12).astype(int)
    for i, k in enumerate(cycles):
        ups = up[up_cyc == k]
        if ups.size:
            cyc_up[i] = ups[0]
            in_on[i] = ups[0] - k * period <= on_time * (1 + 1e-9)
            downs = down[(down_cyc == k) & (down > ups[0])]
            if downs.size:
                cyc_down[i] = downs[0]
        frac[i] = above[seg_cycle == k].sum() / period
    return TransitionEvents(threshold, up, down, cycles, cyc_up, cyc_down, frac, in_on)


TRACE_HEADER = ["t_s", "T_sma_C", "T_air_C", "pwm", "on_W"]


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def write_trace_csv(trace: SimTrace, path) -> int:
    """Write ``t_s,T_sma_C,T_air_C,pwm,on_W``; T_air_C is blank for bare wires."""
    t_air = trace.t_air
    rows = 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for i in range(trace.time.size):
            w.writerow([
                _fmt(trace.time[i]),
                _fmt(trace.t_sma[i] - ZERO_CELSIUS),
                "" if t_air is None else _fmt(t_air[i] - ZERO_CELSIUS),
                "1" if trace.pwm[i] else "0",
                _fmt(trace.heat_input[i]),
            ])
            rows += 1
    return rows
