"""Mild-solution laboratory for chemotaxis-fluid systems on the periodic box."""

__version__ = "0.1.0"
