"""Lumped thermal simulation and power analysis for SMA-wire microactuators."""

__version__ = "0.1.0"
