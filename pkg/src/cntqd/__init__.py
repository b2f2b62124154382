"""Simulator of a single-electron carbon-nanotube quantum-dot qubit."""

__version__ = "0.1.0"
