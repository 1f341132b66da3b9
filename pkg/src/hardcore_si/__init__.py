"""Hardcore model, Glauber dynamics and l-infinity spectral independence checks."""

__version__ = "0.1.0"
