"""Statevector simulation and quantum-walk / Grover-based note generators."""

from .kernels import BACKEND

__all__ = ["BACKEND"]
__version__ = "0.1.0"
