import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import dense_oracle
from kagome_vqe.pauli import PauliSum, apply_pauli_sum
from kagome_vqe.statevector import (
    Gate,
    StateVector,
    apply_gate,
    apply_gates,
    estimate_energy_shots,
    expectation,
    measurement_settings,
    sample_counts,
    zero_state,
)

SINGLET = np.array([0, 1, -1, 0]) / np.sqrt(2)


def embed_1q(u, q, n):
    """Oracle: I (x) ... (x) u (x) ... (x) I with qubit 0 rightmost."""
    out = np.eye(1)
    for k in reversed(range(n)):
        out = np.kron(out, u if k == q else np.eye(2))
    return out


def cnot_matrix(c, t, n):
    dim = 1 << n
    m = np.zeros((dim, dim))
    for i in range(dim):
        m[i ^ (1 << t) if i >> c & 1 else i, i] = 1
    return m


def random_gate(rng, n):
    kind = rng.choice(["RX", "RY", "RZ", "H", "X", "CNOT", "CZ"])
    if kind in ("CNOT", "CZ"):
        a, b = rng.choice(n, size=2, replace=False)
        return Gate(kind, (int(a), int(b)))
    q = int(rng.integers(n))
    angle = float(rng.uniform(-2 * np.pi, 2 * np.pi)) if kind.startswith("R") else None
    return Gate(kind, (q,), angle)


def test_zero_state():
    np.testing.assert_array_equal(zero_state(1).amplitudes, [1, 0])
    np.testing.assert_array_equal(zero_state(2).amplitudes, [1, 0, 0, 0])
    with pytest.raises(ValueError, match="qubit count exceeds limit"):
        zero_state(21)
    with pytest.raises(ValueError, match="qubit count exceeds limit"):
        zero_state(0)


def test_ry_pi_flips():
    out = apply_gate(zero_state(1), Gate("RY", (0,), math.pi))
    assert abs(abs(out.amplitudes[1]) - 1) < 1e-15
    assert abs(out.amplitudes[0]) < 1e-15


def test_bell_state():
    out = apply_gates(zero_state(2), [Gate("H", (0,)), Gate("CNOT", (0, 1))])
    np.testing.assert_allclose(out.amplitudes, [2**-0.5, 0, 0, 2**-0.5], atol=1e-15)


def test_little_endian():
    out = apply_gate(zero_state(3), Gate("X", (0,)))
    assert out.amplitudes[1] == 1  # qubit 0 is the least significant bit


@pytest.mark.parametrize("theta", [0.0, 0.3, -2.1, 7.0])
def test_rz_keeps_probabilities(theta):
    psi = apply_gate(zero_state(1), Gate("RZ", (0,), theta))
    np.testing.assert_allclose(psi.probabilities(), [1, 0])


def test_rotation_matrices():
    t = 0.7
    c, s = math.cos(t / 2), math.sin(t / 2)
    np.testing.assert_allclose(Gate("RY", (0,), t).matrix(), [[c, -s], [s, c]])
    np.testing.assert_allclose(Gate("RZ", (0,), t).matrix(), np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)]))
    np.testing.assert_allclose(Gate("RX", (0,), t).matrix(), [[c, -1j * s], [-1j * s, c]])


def test_gate_index_out_of_range():
    with pytest.raises(IndexError):
        apply_gate(zero_state(2), Gate("H", (2,)))
    with pytest.raises(ValueError):
        Gate("CNOT", (1, 1))
    with pytest.raises(ValueError):
        Gate("RY", (0,), float("inf"))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(2, 5))
def test_gates_match_dense_oracle(seed, n):
    rng = np.random.default_rng(seed)
    psi = StateVector.random(n, rng)
    gate = random_gate(rng, n)
    if gate.kind == "CNOT":
        m = cnot_matrix(*gate.qubits, n)
    elif gate.kind == "CZ":
        m = np.diag([-1.0 if (i >> gate.qubits[0]) & (i >> gate.qubits[1]) & 1 else 1.0 for i in range(1 << n)])
    else:
        m = embed_1q(gate.matrix(), gate.qubits[0], n)
    np.testing.assert_allclose(apply_gate(psi, gate).amplitudes, m @ psi.amplitudes, atol=1e-13)


def test_unitarity_over_many_gates(rng):
    psi = StateVector.random(8, rng)
    out = apply_gates(psi, [random_gate(rng, 8) for _ in range(1000)])
    assert abs(out.norm() - 1) < 1e-9


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), theta=st.floats(-10, 10, allow_nan=False))
def test_ry_inverse(seed, theta):
    rng = np.random.default_rng(seed)
    psi = StateVector.random(4, rng)
    q = int(rng.integers(4))
    back = apply_gates(psi, [Gate("RY", (q,), theta), Gate("RY", (q,), -theta)])
    assert np.max(np.abs(back.amplitudes - psi.amplitudes)) < 1e-12


def test_inplace_flag(rng):
    psi = StateVector.random(3, rng)
    before = psi.amplitudes.copy()
    apply_gates(psi, [Gate("H", (1,))])
    np.testing.assert_array_equal(psi.amplitudes, before)
    apply_gates(psi, [Gate("H", (1,))], inplace=True)
    assert not np.array_equal(psi.amplitudes, before)


def test_expectation_examples(dimer_h):
    assert expectation(zero_state(2), dimer_h) == pytest.approx(0.25, abs=1e-15)
    assert expectation(StateVector.from_amplitudes(SINGLET), dimer_h) == pytest.approx(-0.75, abs=1e-15)


def test_expectation_matches_matvec(kagome_h, rng):
    psi = StateVector.random(12, rng)
    ref = psi.inner(apply_pauli_sum(kagome_h, psi))
    assert abs(expectation(psi, kagome_h) - ref.real) < 1e-10


def test_expectation_matches_kron(triangle_h, rng):
    psi = StateVector.random(3, rng)
    ref = np.vdot(psi.amplitudes, dense_oracle(triangle_h) @ psi.amplitudes).real
    assert abs(expectation(psi, triangle_h) - ref) < 1e-12


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), phi=st.floats(-np.pi, np.pi))
def test_global_phase_invariance(seed, phi):
    rng = np.random.default_rng(seed)
    from kagome_vqe.lattice import random_graph
    from kagome_vqe.pauli import heisenberg_hamiltonian

    h = heisenberg_hamiltonian(random_graph(5, rng), 1.0)
    psi = StateVector.random(5, rng)
    rotated = StateVector(5, np.exp(1j * phi) * psi.amplitudes)
    assert abs(expectation(psi, h) - expectation(rotated, h)) < 1e-12


def test_expectation_dimension_mismatch(dimer_h):
    with pytest.raises(ValueError, match="dimension mismatch"):
        expectation(zero_state(3), dimer_h)


def test_expectation_units(dimer_h):
    assert expectation(zero_state(2), dimer_h, units="Hartree").units == "Hartree"


def test_settings_kagome(kagome_h):
    groups = measurement_settings(kagome_h)
    assert [g.basis for g in groups] == ["Z", "X", "Y"]
    assert [len(g.terms) for g in groups] == [18, 18, 18]


def test_settings_single_term():
    assert len(measurement_settings(PauliSum.from_labels(2, [(1.0, "Z0Z1")]))) == 1


def test_settings_reject_mixed():
    with pytest.raises(ValueError, match="ungroupable term"):
        measurement_settings(PauliSum.from_labels(2, [(1.0, "X0Z1")]))


@pytest.mark.parametrize("basis", ["X", "Y"])
def test_rotations_diagonalise(basis, rng):
    """Rotated-state Z parity equals the original-axis expectation."""
    h = PauliSum.from_labels(3, [(1.0, f"{basis}0{basis}2")])
    zz = PauliSum.from_labels(3, [(1.0, "Z0Z2")])
    setting = measurement_settings(h)[0]
    psi = StateVector.random(3, rng)
    assert abs(expectation(psi, h) - expectation(apply_gates(psi, setting.rotation), zz)) < 1e-12


def test_sample_basis_state():
    res = sample_counts(zero_state(1), (), 100, 5)
    assert res.counts == {"0": 100}


def test_sample_bell():
    bell = apply_gates(zero_state(2), [Gate("H", (0,)), Gate("CNOT", (0, 1))])
    res = sample_counts(bell, (), 20000, 11)
    assert set(res.counts) <= {"00", "11"}
    assert sum(res.counts.values()) == 20000


def test_sample_plus_binomial():
    plus = apply_gate(zero_state(1), Gate("H", (0,)))
    shots = 100_000
    res = sample_counts(plus, (), shots, 7)
    assert abs(res.frequency("0") - 0.5) < 5 * 0.5 / math.sqrt(shots)


def test_bitstring_order():
    res = sample_counts(apply_gate(zero_state(3), Gate("X", (0,))), (), 10, 0)
    assert res.counts == {"001": 10}


def test_sampling_deterministic(rng):
    psi = StateVector.random(4, rng)
    assert sample_counts(psi, (), 500, 3).counts == sample_counts(psi, (), 500, 3).counts


def test_shot_estimate_singlet(dimer_h):
    est = estimate_energy_shots(StateVector.from_amplitudes(SINGLET), dimer_h, 1_000_000, 3)
    assert abs(est + 0.75) < 0.01


def test_shot_estimate_single_shot_bounded(kagome_h, rng):
    psi = StateVector.random(12, rng)
    for seed in range(5):
        e = estimate_energy_shots(psi, kagome_h, 1, seed)
        assert math.isfinite(e) and abs(e) <= kagome_h.one_norm + 1e-12


def test_shot_estimate_zero_state(dimer_h):
    shots = 4000
    sigma = 0.25 * math.sqrt(2) / math.sqrt(shots)  # X and Y settings each contribute 0.25 * (+-1 mean)
    for seed in range(10):
        assert abs(estimate_energy_shots(zero_state(2), dimer_h, shots, seed) - 0.25) < 4 * sigma


def test_shot_estimate_converges(kagome_h, rng):
    shots = 1_000_000
    for _ in range(2):
        psi = StateVector.random(12, rng)
        delta = abs(estimate_energy_shots(psi, kagome_h, shots, int(rng.integers(1 << 30))) - expectation(psi, kagome_h))
        assert delta < 5 * kagome_h.one_norm / math.sqrt(shots)


def test_dump(tmp_path):
    path = tmp_path / "psi.txt"
    StateVector.from_amplitudes([0.6, 0.8j]).dump(path)
    rows = [line.split() for line in path.read_text().splitlines()]
    assert rows == [["0", "0.6", "0.0"], ["1", "0.0", "0.8"]]
