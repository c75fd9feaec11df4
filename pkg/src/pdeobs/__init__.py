"""Partial observability of PDE initial states through ODE discretizations."""

__version__ = "0.1.0"
