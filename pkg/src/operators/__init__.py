"""Operators module - symmetric-subspace collective spin operators and Hamiltonians."""
from .symspace import EnsembleHamiltonian, EnsembleOperator, collective_op, hamiltonian

__all__ = ["EnsembleHamiltonian", "EnsembleOperator", "collective_op", "hamiltonian"]
