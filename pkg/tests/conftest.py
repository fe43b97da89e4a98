"""Shared fixtures and independent oracles for the test suite."""

from functools import reduce

import numpy as np
import pytest

from varsaw import Hamiltonian

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# 4 qubits, 10 terms: 7 bases, 21 sliding windows, 9 after reduction.
FOUR_QUBIT_TERMS = ["IZIX", "XIIZ", "XIXX", "XIZX", "XZXZ", "ZIXX", "ZXIZ", "ZXXZ", "ZXZX", "ZZXZ"]
FOUR_QUBIT_COEFFS = [0.5, -0.25, 0.8, -0.1, 0.3, 0.7, -0.45, 0.15, -0.6, 0.2]


def pauli_matrix(label: str) -> np.ndarray:
    """Kronecker product with qubit 0 as the most significant factor."""
    return reduce(np.kron, [PAULI_MATRICES[c] for c in label])


def closure_oracle(subsets):
    """Distinct subsets not strictly dominated by another one, as a set of pair-sets."""
    distinct = {frozenset(zip(s.qubits, s.bases)) for s in subsets}
    return {a for a in distinct if not any(a < b for b in distinct)}


def dense_hamiltonian(h: Hamiltonian) -> np.ndarray:
    return sum(t.coeff * pauli_matrix(t.pauli) for t in h.terms)


def random_state(num_qubits: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=2**num_qubits) + 1j * rng.normal(size=2**num_qubits)
    return v / np.linalg.norm(v)


@pytest.fixture
def four_qubit_hamiltonian() -> Hamiltonian:
    return Hamiltonian(4, list(zip(FOUR_QUBIT_TERMS, FOUR_QUBIT_COEFFS)))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


# Acceptance tests append one line each; printed after the run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
