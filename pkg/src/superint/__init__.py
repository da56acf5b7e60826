"""Superintegrable Hamiltonian systems built from sl(2) coalgebra realizations."""

__version__ = "0.1.0"
