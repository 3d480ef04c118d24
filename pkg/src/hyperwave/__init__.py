"""Radial shifted wave experiments on three-dimensional hyperbolic space."""

__version__ = "0.1.0"
