"""Clifford circuit simulation on a packed stabilizer tableau."""

from .circuit import GATE_KINDS, MEASURE, RESET, Circuit, MeasurementRecord, Op, random_clifford_circuit
from .compile import append_controlled_pauli, diagonalize, z_readout_value
from .pauli import PauliString
from .rules import CLIFFORD, ONE_QUBIT, TWO_QUBIT
from .tableau import (
    StabilizerTableau,
    apply_clifford,
    apply_pauli_error,
    measure_z,
    new_tableau,
    pauli_expectation,
    reset,
    run_tableau,
)

__all__ = [
    "CLIFFORD",
    "Circuit",
    "GATE_KINDS",
    "MEASURE",
    "MeasurementRecord",
    "ONE_QUBIT",
    "Op",
    "PauliString",
    "RESET",
    "StabilizerTableau",
    "TWO_QUBIT",
    "apply_clifford",
    "append_controlled_pauli",
    "apply_pauli_error",
    "diagonalize",
    "measure_z",
    "new_tableau",
    "pauli_expectation",
    "random_clifford_circuit",
    "reset",
    "run_tableau",
    "z_readout_value",
]
