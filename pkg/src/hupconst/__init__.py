"""Numerical toolkit for the sharp constants, extremals and stability
constants of hydrogen-type and Heisenberg-type uncertainty principles."""

__version__ = "0.1.0"
