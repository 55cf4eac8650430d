"""DASH-style embodied pick-and-place engine."""

__version__ = "0.1.0"
