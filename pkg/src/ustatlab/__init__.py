"""Generalized U-statistics over graph-indexed kernels."""

__version__ = "0.1.0"
