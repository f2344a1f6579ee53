"""Rigorous integration of periodic parabolic PDEs on finite and infinite time."""

__version__ = "0.1.0"
