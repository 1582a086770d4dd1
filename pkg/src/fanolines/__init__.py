"""Explicit low-degree del Pezzo models over prime fields, with line-space
fiber equations, brute-force oracles, and point-count census tooling."""

from ._kernels import BACKEND, available_backends
from .field import PrimeField, is_prime
from .poly import WeightedPoly

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "PrimeField",
    "WeightedPoly",
    "available_backends",
    "is_prime",
    "__version__",
]
