from functools import reduce

import numpy as np
import pytest

from kagome_vqe.lattice import build_kagome_cell, dimer, triangle
from kagome_vqe.pauli import heisenberg_hamiltonian

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_pauli(num_qubits, factors):
    """Dense Pauli string via Kronecker products (qubit 0 is the rightmost factor)."""
    ops = [PAULI[dict(factors).get(q, "I")] for q in reversed(range(num_qubits))]
    return reduce(np.kron, ops)


def dense_oracle(h):
    """Dense matrix built from Kronecker products, independent of the bit-mask kernels."""
    return sum(c * kron_pauli(h.num_qubits, p.factors) for c, p in h.terms)


@pytest.fixture(scope="session")
def kagome():
    return build_kagome_cell()


@pytest.fixture(scope="session")
def kagome_h(kagome):
    return heisenberg_hamiltonian(kagome, 1.0)


@pytest.fixture(scope="session")
def dimer_h():
    return heisenberg_hamiltonian(dimer(), 1.0)


@pytest.fixture(scope="session")
def triangle_h():
    return heisenberg_hamiltonian(triangle(), 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# -- acceptance reporting ---------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Call ``criterion(n, ok, detail)`` to log one acceptance line."""

    def log(number, ok, detail):
        ACCEPTANCE_LINES.append(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return log


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def kagome_dense(kagome_h):
    from kagome_vqe.exact import dense_ground_energy

    return dense_ground_energy(kagome_h)


@pytest.fixture(scope="session")
def kagome_lanczos(kagome_h):
    from kagome_vqe.exact import lanczos_ground_energy

    return lanczos_ground_energy(kagome_h)
