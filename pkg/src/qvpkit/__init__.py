"""Toolkit for quantum verification procedures: simulation, spectra, reductions and problem instances."""

__version__ = "0.1.0"
