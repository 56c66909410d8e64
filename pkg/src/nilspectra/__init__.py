"""Spectral computations for oscillators on graded nilpotent Lie groups."""

__version__ = "0.1.0"
