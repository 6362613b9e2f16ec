"""Engineered pointer states of a pulsed qubit or qubit pair coupled to a spin bath."""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
