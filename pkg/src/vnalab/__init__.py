"""Entropy and entanglement laboratory for finite-dimensional von Neumann algebras."""

__version__ = "0.1.0"
