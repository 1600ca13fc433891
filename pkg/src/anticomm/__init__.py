"""Anticommutation structure, Taylor-series error bounds and LCU plans for Pauli-sum Hamiltonians."""

from .errors import (AnticommError, BudgetExceeded, DenseCapError, EmptyHamiltonianError,
                     FormulaDomainError, MissingStructureError, NonHermitianError,
                     NotAnticommutingError, ParseError, WidthMismatchError)
from .pauli import PauliString, commutes, multiply, to_dense
from .hamiltonian import FermionIntegrals, Hamiltonian, jordan_wigner, load_hamiltonian, parse_hamiltonian, serialize
from .structure import (CancellationReport, CommutationStructure, SymbolicOperator, analyze,
                        cancellation_order3, cancellation_order4, cancellation_report,
                        select_extra_unitaries, symbolic_power)

__version__ = "0.1.0"

__all__ = [
    "AnticommError", "BudgetExceeded", "DenseCapError", "EmptyHamiltonianError", "FormulaDomainError",
    "MissingStructureError", "NonHermitianError", "NotAnticommutingError", "ParseError", "WidthMismatchError",
    "PauliString", "commutes", "multiply", "to_dense",
    "FermionIntegrals", "Hamiltonian", "jordan_wigner", "load_hamiltonian", "parse_hamiltonian", "serialize",
    "CancellationReport", "CommutationStructure", "SymbolicOperator", "analyze", "cancellation_order3",
    "cancellation_order4", "cancellation_report", "select_extra_unitaries", "symbolic_power",
]
