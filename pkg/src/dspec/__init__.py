"""Spectral analysis of half-line Schrodinger operators with delta-prime interactions."""

__version__ = "0.1.0"
