"""Numerical workbench for the cutoff Boltzmann collision operator near equilibrium."""

__version__ = "0.1.0"
