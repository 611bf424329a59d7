"""Generalized Steinberg cross-sections over finite rings and Z."""

__version__ = "0.1.0"
