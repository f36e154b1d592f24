"""Thermal equilibrium measures, determinantal one-point functions and
fluctuation corrections for 2D Coulomb gases with radial potentials."""

__version__ = "0.1.0"
