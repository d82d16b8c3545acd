"""
Electrical power characterization under PWM drive.

Peak power is the mean of per-cycle maxima over a steady window; average
power is the mean of the instantaneous power over the same window. A window
is repeated ``repetitions`` times back to back and the per-repetition values
are summarized by their mean and sample standard deviation (ESD, n-1).
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .actuator import ActuatorSpec, AmbientMedium, BuiltNetwork, DriveSpec, build_network
from .errors import InvalidParameterError
from .simulator import IntegratorConfig, SimTrace, integrate, run_cycles_to_steady_state

PAPER_FREQUENCIES = (1.0, 2.0, 3.0, 4.0, 5.0)
PAPER_DUTY_CYCLES = (7.0, 8.0, 9.0, 10.0, 10.0)


@dataclass(frozen=True)
class CurrentTrace:
    """Sampled current (A) through a known reference resistance (ohm)."""

    time: np.ndarray
    current: np.ndarray
    reference_resistance: float

    def __post_init__(self):
        t = np.asarray(self.time, dtype=float)
        i = np.asarray(self.current, dtype=float)
        if t.shape != i.shape or t.ndim != 1:
            raise InvalidParameterError("time and current must be 1-D arrays of equal length")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise InvalidParameterError("time grid must be strictly increasing")
        if not np.all(np.isfinite(i)):
            raise InvalidParameterError("current samples must be finite")
        if not self.reference_resistance > 0:
            raise InvalidParameterError("reference resistance must be positive")
        object.__setattr__(self, "time", t)
        object.__setattr__(self, "current", i)


def instantaneous_power(trace: CurrentTrace) -> np.ndarray:
    """P(t) = I(t)^2 * R_reference (W)."""
    return trace.current**2 * trace.reference_resistance


def current_from_trace(trace: SimTrace, drive: DriveSpec, supply_side: bool = False) -> CurrentTrace:
    """Current waveform implied by a simulated PWM state sequence."""
    r_ref = drive.sma_resistance + (drive.tether_resistance if supply_side else 0.0)
    current = np.where(trace.pwm, drive.on_current, 0.0)
    return CurrentTrace(trace.time, current, r_ref)


@dataclass
class PowerSummary:
    """Peak/average power (W) of one PWM configuration over repeated windows."""

    frequency: float
    duty_cycle: float
    peak_values: np.ndarray
    average_values: np.ndarray
    window: float

    @property
    def repetitions(self) -> int:
        return int(self.peak_values.size)

    @property
    def peak_power(self) -> float:
        return float(np.mean(self.peak_values))

    @property
    def average_power(self) -> float:
        return float(np.mean(self.average_values))

    @property
    def peak_esd(self) -> float:
        return _esd(self.peak_values)

    @property
    def average_esd(self) -> float:
        return _esd(self.average_values)

    def to_dict(self) -> Dict:
        return {
            "f_hz": self.frequency,
            "dc_pct": self.duty_cycle,
            "p_peak_w": self.peak_power,
            "p_avg_w": self.average_power,
            "p_peak_esd_w": self.peak_esd,
            "p_avg_esd_w": self.average_esd,
            "window_s": self.window,
            "repetitions": self.repetitions,
        }


def _esd(values: np.ndarray) -> float:
    # a single repetition has no spread to report
    if values.size < 2:
        return 0.0
    return float(np.std(values, ddof=1))


def _window_metrics(t, p, t0, window, period):
    """(peak, average) for samples in [t0, t0 + window)."""
    eps = 1e-9 * period
    sel = (t >= t0 - eps) & (t < t0 + window - eps)
    tw, pw = t[sel], p[sel]
    # bins aligned to absolute PWM cycles; keep only cycles fully inside the window
    k = np.floor((tw + eps) / period).astype(np.int64)
    k_lo = int(math.ceil((t0 - eps) / period))
    k_hi = int(math.floor((t0 + window + eps) / period)) - 1
    if k_hi < k_lo:
        raise InvalidParameterError(
            f"window [{t0:g}, {t0 + window:g}) s holds no complete PWM cycle of {period:g} s"
        )
    full = (k >= k_lo) & (k <= k_hi)
    kk, pk = k[full] - k_lo, pw[full]
    maxima = np.full(k_hi - k_lo + 1, -np.inf)
    np.maximum.at(maxima, kk, pk)
    if not np.all(np.isfinite(maxima)):
        raise InvalidParameterError("a PWM cycle in the window has no samples")
    return float(np.mean(maxima)), float(np.mean(pw))


def summarize_power(
    time: Sequence[float],
    power: Sequence[float],
    drive: DriveSpec,
    window: float = 30.0,
    repetitions: int = 5,
    start: Optional[float] = None,
) -> PowerSummary:
    """Peak/average power over ``repetitions`` consecutive windows of ``window`` s.

    The first window starts at ``start`` (default: the first sample). Samples
    are assumed uniform inside each window so that the sample mean is the
    time average.
    """
    t = np.asarray(time, dtype=float)
    p = np.asarray(power, dtype=float)
    if t.shape != p.shape or t.size == 0:
        raise InvalidParameterError("time and power must be non-empty and aligned")
    if repetitions < 1:
        raise InvalidParameterError("need at least one repetition")
    period = drive.period
    if window < period * (1 - 1e-9):
        raise InvalidParameterError(f"window {window:g} s is shorter than one PWM cycle")
    t0 = float(t[0]) if start is None else float(start)
    # a half-open window may end one sample interval after the last sample
    spacing = float(np.median(np.diff(t))) if t.size > 1 else 0.0
    if t[-1] + spacing < t0 + repetitions * window - 1e-9 * window:
        raise InvalidParameterError(
            f"series ends at {t[-1]:g} s, before {repetitions} windows of {window:g} s"
        )
    peaks, avgs = [], []
    for r in range(repetitions):
        pk, av = _window_metrics(t, p, t0 + r * window, window, period)
        peaks.append(pk)
        avgs.append(av)
    return PowerSummary(drive.frequency, drive.duty_cycle, np.array(peaks), np.array(avgs), window)


@dataclass(frozen=True)
class SweepGrid:
    """Matched (frequency Hz, duty cycle %) pairs, evaluated pairwise."""

    pairs: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        if not self.pairs:
            raise InvalidParameterError("sweep grid is empty")

    @classmethod
    def matched(cls, frequencies: Sequence[float], duty_cycles: Sequence[float]) -> "SweepGrid":
        if len(frequencies) != len(duty_cycles):
            raise InvalidParameterError(
                f"frequency and duty-cycle lists must match pairwise "
                f"({len(frequencies)} vs {len(duty_cycles)})"
            )
        return cls(tuple((float(f), float(d)) for f, d in zip(frequencies, duty_cycles)))

    @classmethod
    def paper(cls) -> "SweepGrid":
        return cls.matched(PAPER_FREQUENCIES, PAPER_DUTY_CYCLES)

    def __iter__(self):
        return iter(self.pairs)

    def __len__(self):
        return len(self.pairs)


def steady_power_summary(
    network: BuiltNetwork,
    drive: DriveSpec,
    cfg: IntegratorConfig,
    window: float = 30.0,
    repetitions: int = 5,
    supply_side: bool = False,
    tol: float = 1e-3,
) -> PowerSummary:
    """Settle the network, then simulate back-to-back windows and summarize power."""
    settled = run_cycles_to_steady_state(network, drive, cfg, tol=tol)
    start = settled.time[-1]
    n_cycles = int(math.ceil(repetitions * window / drive.period - 1e-9))
    run_cfg = IntegratorConfig(
        dt=cfg.dt, method=cfg.method, sample_rate=cfg.sample_rate, cycles=n_cycles,
        allow_large_trace=True,
    )
    trace = integrate(network, drive, run_cfg, initial_temperatures=settled.final_temperatures,
                      start_time=start)
    p = instantaneous_power(current_from_trace(trace, drive, supply_side))
    return summarize_power(trace.time, p, drive, window, repetitions, start=start)


def run_sweep(
    spec: ActuatorSpec,
    medium: AmbientMedium,
    grid: SweepGrid,
    drive: DriveSpec,
    cfg: IntegratorConfig,
    window: float = 30.0,
    repetitions: int = 5,
    supply_side: bool = False,
    workers: int = 1,
) -> List[PowerSummary]:
    """One PowerSummary per grid pair, in grid order regardless of completion order."""
    network = build_network(spec, medium)
    drives = [drive.with_pwm(f, dc) for f, dc in grid]

    def one(d):
        return steady_power_summary(network, d, cfg, window, repetitions, supply_side)

    if workers <= 1:
        return [one(d) for d in drives]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, drives))


SWEEP_HEADER = ["f_hz", "dc_pct", "p_peak_mw", "p_avg_mw", "p_peak_esd_mw", "p_avg_esd_mw"]


def write_sweep_csv(summaries: Sequence[PowerSummary], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for s in summaries:
            w.writerow([
                f"{s.frequency:.9g}",
                f"{s.duty_cycle:.9g}",
                f"{s.peak_power * 1e3:.9g}",
                f"{s.average_power * 1e3:.9g}",
                f"{s.peak_esd * 1e3:.9g}",
                f"{s.average_esd * 1e3:.9g}",
            ])


def holding_power(network: BuiltNetwork, target: Optional[float] = None) -> float:
    """Constant heat (W) into the SMA node that holds it at ``target`` K in steady state.

    Defaults to the network's transition temperature. Equals
    (T_target - T_ambient) * end-to-end conductance.
    """
    if target is None:
        target = network.transition_temperature
    return (target - network.ambient_temperature) / network.end_to_end_resistance(0)


def supply_holding_power(network: BuiltNetwork, drive: DriveSpec, target: Optional[float] = None) -> float:
    """Holding power seen at the supply, including tether dissipation."""
    scale = (drive.sma_resistance + drive.tether_resistance) / drive.sma_resistance
    return holding_power(network, target) * scale


@dataclass(frozen=True)
class EnergyBudget:
    """Battery and load description.

    Attributes:
        capacity_mah: rated capacity (mAh)
        voltage: nominal cell voltage (V)
        loads: consumer name -> average power (W)
        usable_fraction: share of rated energy that can be drawn
    """

    capacity_mah: float
    voltage: float
    loads: Dict[str, float] = field(default_factory=dict)
    usable_fraction: float = 1.0

    def __post_init__(self):
        if not (self.capacity_mah > 0 and self.voltage > 0):
            raise InvalidParameterError("capacity and voltage must be positive")
        if not 0 < self.usable_fraction <= 1:
            raise InvalidParameterError("usable fraction must be in (0, 1]")
        if any(v < 0 for v in self.loads.values()):
            raise InvalidParameterError("load powers must be >= 0")

    @property
    def energy_j(self) -> float:
        # mAh * V -> mWh -> J
        return self.usable_fraction * self.capacity_mah * 1e-3 * self.voltage * 3600.0

    @property
    def total_load(self) -> float:
        return math.fsum(self.loads.values())


def runtime_estimate(budget: EnergyBudget) -> float:
    """Continuous runtime in seconds: usable energy / total load."""
    total = budget.total_load
    if not total > 0:
        raise InvalidParameterError("total load must be positive")
    return budget.energy_j / total


def load_current_trace(csv_path, sidecar_path=None) -> CurrentTrace:
    """Read ``t_s,i_a`` samples plus a JSON sidecar giving the reference resistance.

    The sidecar defaults to the CSV path with a ``.json`` suffix and must hold
    ``{"reference_resistance": {"value": ..., "unit": "ohm"}}``.
    """
    from .config import read_quantity

    csv_path = Path(csv_path)
    sidecar_path = Path(sidecar_path) if sidecar_path else csv_path.with_suffix(".json")
    with open(sidecar_path) as fh:
        meta = json.load(fh)
    r_ref = read_quantity(meta, "reference_resistance", "resistance")
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"t_s", "i_a"} <= set(reader.fieldnames):
            raise InvalidParameterError(f"{csv_path}: expected columns t_s,i_a")
        rows = [(float(r["t_s"]), float(r["i_a"])) for r in reader]
    arr = np.array(rows, dtype=float).reshape(-1, 2)
    return CurrentTrace(arr[:, 0], arr[:, 1], r_ref)
