"""Diffuse-domain approximation laboratory for two-sided transmission problems."""

__version__ = "0.1.0"
