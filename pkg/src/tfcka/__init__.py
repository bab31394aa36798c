"""Simulation and verification tools for twin-field conference key agreement."""

__version__ = "0.1.0"
