"""Hybrid quantum-classical sequence models on an exact statevector simulator."""

from .tensor import ContractError, DomainError, ShapeError, Tape, Tensor

__version__ = "0.1.0"

__all__ = ["ContractError", "DomainError", "ShapeError", "Tape", "Tensor", "__version__"]
