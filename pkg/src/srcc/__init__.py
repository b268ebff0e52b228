"""Coupled-cluster propagation of quantum superpositions on a
three-level/three-electron model, with a numerically exact unitary
reference engine."""

from .model import ModelParams

__all__ = ["ModelParams"]
__version__ = "0.1.0"
