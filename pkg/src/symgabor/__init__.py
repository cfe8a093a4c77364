"""Symplectic lattice classification, metaplectic operators and Gaussian Gabor frames."""

__version__ = "0.1.0"
