"""
Post-processing of bench and swimming measurements: laser displacement
correction, trajectory speed estimation, body-length normalization and
turning bias.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Dict

import numpy as np

from .errors import InvalidParameterError

DISPLACEMENT_CORRECTION = 1.58
DEFAULT_BODY_LENGTH_MM = 40.65


def correct_displacement(d_p, factor: float = DISPLACEMENT_CORRECTION):
    """True displacement from a reading attenuated by acrylic and water: factor * d_p."""
    if not factor > 0:
        raise InvalidParameterError("correction factor must be positive")
    return factor * np.asarray(d_p, dtype=float) if np.ndim(d_p) else factor * float(d_p)


@dataclass(frozen=True)
class Trajectory2D:
    """Planar path sampled at ``time`` (s), positions in mm."""

    time: np.ndarray
    x: np.ndarray
    y: np.ndarray
    body_length: float = DEFAULT_BODY_LENGTH_MM

    def __post_init__(self):
        t, x, y = (np.asarray(a, dtype=float) for a in (self.time, self.x, self.y))
        if not (t.shape == x.shape == y.shape) or t.ndim != 1:
            raise InvalidParameterError("time, x and y must be 1-D arrays of equal length")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise InvalidParameterError("trajectory time must be strictly increasing")
        if not self.body_length > 0:
            raise InvalidParameterError("body length must be positive")
        object.__setattr__(self, "time", t)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)


@dataclass(frozen=True)
class SpeedSeries:
    time: np.ndarray
    speed: np.ndarray
    body_length: float

    @property
    def normalized(self) -> np.ndarray:
        return self.speed / self.body_length

    @property
    def average(self) -> float:
        return float(np.mean(self.speed))

    @property
    def maximum(self) -> float:
        return float(np.max(self.speed))

    def report(self) -> Dict:
        return {
            "samples": int(self.speed.size),
            "body_length_mm": float(f"{self.body_length:.9g}"),
            "avg_speed_mm_s": float(f"{self.average:.9g}"),
            "max_speed_mm_s": float(f"{self.maximum:.9g}"),
            "avg_speed_bl_s": float(f"{normalize_speed(self.average, self.body_length):.9g}"),
            "max_speed_bl_s": float(f"{normalize_speed(self.maximum, self.body_length):.9g}"),
        }


def moving_average(t: np.ndarray, values: np.ndarray, window: float) -> np.ndarray:
    """Centered moving average over |t_j - t_i| <= window/2, truncated at the ends."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    half = 0.5 * window * (1 + 1e-9)
    lo = np.searchsorted(t, t - half, side="left")
    hi = np.searchsorted(t, t + half, side="right")
    csum = np.concatenate([[0.0], np.cumsum(v)])
    return (csum[hi] - csum[lo]) / (hi - lo)


def derivative(t: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Second-order central difference on a possibly nonuniform grid.

    Written in terms of increments so a constant signal gives exactly zero.
    Endpoints fall back to one-sided first differences.
    """
    t = np.asarray(t, dtype=float)
    f = np.asarray(f, dtype=float)
    h = np.diff(t)
    df = np.diff(f)
    out = np.empty_like(f)
    out[0] = df[0] / h[0]
    out[-1] = df[-1] / h[-1]
    h0, h1 = h[:-1], h[1:]
    out[1:-1] = (h0 * h0 * df[1:] + h1 * h1 * df[:-1]) / (h0 * h1 * (h0 + h1))
    return out


def estimate_speed(traj: Trajectory2D, filter_window: float = 1.0) -> SpeedSeries:
    """Speed magnitude from central differences, smoothed by a centered moving average.

    Endpoints use one-sided differences; the filter window shrinks near the ends.
    """
    t = traj.time
    if t.size < 2:
        raise InvalidParameterError("need at least two samples")
    if not filter_window >= np.min(np.diff(t)) * (1 - 1e-9):
        raise InvalidParameterError("filter window must be at least one sample interval")
    vx = derivative(t, traj.x)
    vy = derivative(t, traj.y)
    raw = np.hypot(vx, vy)
    return SpeedSeries(t, moving_average(t, raw, filter_window), traj.body_length)


def normalize_speed(v, body_length: float):
    """Speed in body lengths per second."""
    if not body_length > 0:
        raise InvalidParameterError("body length must be positive")
    return v / body_length


def turning_bias(traj: Trajectory2D) -> float:
    """Mean signed curvature (1/mm); negative means the path bends to the right."""
    if traj.time.size < 3:
        raise InvalidParameterError("need at least three samples")
    t = traj.time
    dx, dy = derivative(t, traj.x), derivative(t, traj.y)
    ddx, ddy = derivative(t, dx), derivative(t, dy)
    speed2 = dx * dx + dy * dy
    moving = speed2 > 0
    if not np.any(moving):
        return 0.0
    kappa = (dx * ddy - dy * ddx)[moving] / speed2[moving] ** 1.5
    return float(np.mean(kappa))


def load_trajectory(path, body_length: float = DEFAULT_BODY_LENGTH_MM) -> Trajectory2D:
    """Read a ``t_s,x_mm,y_mm`` CSV."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        need = {"t_s", "x_mm", "y_mm"}
        if reader.fieldnames is None or not need <= set(reader.fieldnames):
            raise InvalidParameterError(f"{path}: expected columns t_s,x_mm,y_mm")
        rows = [(float(r["t_s"]), float(r["x_mm"]), float(r["y_mm"])) for r in reader]
    arr = np.array(rows, dtype=float).reshape(-1, 3)
    return Trajectory2D(arr[:, 0], arr[:, 1], arr[:, 2], body_length)
