"""Numerical laboratory for stationary Euler flows, stable Hamiltonian structures and stabilizing 1-forms."""

__version__ = "0.1.0"
