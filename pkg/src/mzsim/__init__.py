"""Simulation of monitored Mach-Zehnder interferometry on superconducting qubit lattices."""

__version__ = "0.1.0"
