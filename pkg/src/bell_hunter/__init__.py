"""Adaptive CHSH maximization for entanglement detection of unknown two-qubit states."""

__version__ = "0.1.0"
