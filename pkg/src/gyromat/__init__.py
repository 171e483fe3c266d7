"""Gyrovector-space operations on SPD and Grassmann matrix manifolds."""

__version__ = "0.1.0"
