"""Numerical laboratory for decoherence, measurement and collapse models."""

__version__ = "0.1.0"
