"""Dense statevector simulation with exact and sampled expectation values.

Qubit ordering is little-endian throughout: qubit 0 is the least significant
bit of a basis index. Bitstrings (``ShotResult`` keys) are printed with qubit
``n-1`` leftmost, so index 1 on two qubits reads ``"01"``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from os import PathLike
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .pauli import EnergyValue, PauliSum

__all__ = [
    "MAX_QUBITS",
    "StateVector",
    "Gate",
    "ShotResult",
    "MeasurementSetting",
    "zero_state",
    "apply_gate",
    "apply_gates",
    "expectation",
    "measurement_settings",
    "sample_counts",
    "estimate_energy_shots",
]

MAX_QUBITS = 20
ROTATIONS = ("RX", "RY", "RZ")
ONE_QUBIT = ROTATIONS + ("H", "X")
TWO_QUBIT = ("CNOT", "CZ")
_INV_SQRT2 = 1.0 / math.sqrt(2.0)


class StateVector:
    """``2**num_qubits`` complex amplitudes.

    Mutated only through :func:`apply_gates` with ``inplace=True``; every
    other operation returns a fresh state.
    """

    __slots__ = ("num_qubits", "amplitudes")

    def __init__(self, num_qubits: int, amplitudes: np.ndarray):
        if not 1 <= num_qubits <= MAX_QUBITS:
            raise ValueError(f"qubit count exceeds limit: {num_qubits} not in [1, {MAX_QUBITS}]")
        amps = np.ascontiguousarray(amplitudes, dtype=np.complex128)
        if amps.shape != (1 << num_qubits,):
            raise ValueError(f"expected {1 << num_qubits} amplitudes, got shape {amps.shape}")
        self.num_qubits = num_qubits
        self.amplitudes = amps

    @classmethod
    def from_amplitudes(cls, amplitudes: Sequence[complex], normalize: bool = False) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=np.complex128)
        n = int(amps.shape[0]).bit_length() - 1
        if n < 1 or amps.shape[0] != 1 << n:
            raise ValueError("amplitude count must be a power of two >= 2")
        if normalize:
            amps = amps / np.linalg.norm(amps)
        return cls(n, amps)

    @classmethod
    def random(cls, num_qubits: int, rng: np.random.Generator) -> "StateVector":
        """Haar-distributed pure state."""
        amps = rng.normal(size=1 << num_qubits) + 1j * rng.normal(size=1 << num_qubits)
        return cls(num_qubits, amps / np.linalg.norm(amps))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())

    def inner(self, other: "StateVector") -> complex:
        """``<self|other>``."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def dump(self, path: str | PathLike) -> None:
        """Debug dump, one ``index real imag`` line per amplitude."""
        with open(path, "w", encoding="utf-8") as fh:
            for i, a in enumerate(self.amplitudes):
                fh.write(f"{i} {float(a.real)!r} {float(a.imag)!r}\n")

    def __repr__(self) -> str:
        return f"StateVector(num_qubits={self.num_qubits})"


@dataclass(frozen=True)
class Gate:
    """One gate: ``kind`` acting on ``qubits``; rotations also carry ``angle`` (radians).

    For ``CNOT`` the qubits are ``(control, target)``. A rotation with
    ``angle=None`` is an unbound parameter slot and cannot be applied.
    """

    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        qubits = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "qubits", qubits)
        if kind in ONE_QUBIT:
            arity = 1
        elif kind in TWO_QUBIT:
            arity = 2
        else:
            raise ValueError(f"unknown gate kind {kind!r}")
        if len(qubits) != arity:
            raise ValueError(f"{kind} acts on {arity} qubit(s), got {qubits}")
        if len(set(qubits)) != arity or min(qubits) < 0:
            raise ValueError(f"invalid qubits {qubits} for {kind}")
        if kind in ROTATIONS:
            if self.angle is not None and not math.isfinite(self.angle):
                raise ValueError("rotation angle must be finite")
        elif self.angle is not None:
            raise ValueError(f"{kind} takes no angle")

    @property
    def is_rotation(self) -> bool:
        return self.kind in ROTATIONS

    @property
    def is_entangling(self) -> bool:
        return self.kind in TWO_QUBIT

    def bound(self, angle: float) -> "Gate":
        return Gate(self.kind, self.qubits, float(angle))

    def matrix(self) -> np.ndarray:
        """2x2 unitary of a one-qubit gate."""
        k, t = self.kind, self.angle
        if k in ROTATIONS and t is None:
            raise ValueError(f"unbound {k} on qubit {self.qubits[0]}")
        if k == "RX":
            c, s = math.cos(t / 2), math.sin(t / 2)
            return np.array([[c, -1j * s], [-1j * s, c]])
        if k == "RY":
            c, s = math.cos(t / 2), math.sin(t / 2)
            return np.array([[c, -s], [s, c]], dtype=np.complex128)
        if k == "RZ":
            return np.array([[np.exp(-0.5j * t), 0], [0, np.exp(0.5j * t)]])
        if k == "H":
            return np.array([[1, 1], [1, -1]], dtype=np.complex128) * _INV_SQRT2
        if k == "X":
            return np.array([[0, 1], [1, 0]], dtype=np.complex128)
        raise ValueError(f"{k} is not a one-qubit gate")


def zero_state(n: int) -> StateVector:
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"qubit count exceeds limit: {n} not in [1, {MAX_QUBITS}]")
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n, amps)


def _apply_inplace(psi: np.ndarray, n: int, gate: Gate) -> None:
    if max(gate.qubits) >= n:
        raise IndexError(f"{gate.kind} on qubits {gate.qubits} out of range for {n} qubits")
    if gate.kind == "CNOT":
        kernels.apply_cnot(psi, gate.qubits[0], gate.qubits[1])
    elif gate.kind == "CZ":
        kernels.apply_cz(psi, gate.qubits[0], gate.qubits[1])
    elif gate.kind == "X":
        kernels.apply_1q(psi, gate.qubits[0], 0j, 1 + 0j, 1 + 0j, 0j)
    else:
        u = gate.matrix()
        kernels.apply_1q(psi, gate.qubits[0], u[0, 0], u[0, 1], u[1, 0], u[1, 1])


def apply_gates(state: StateVector, gates: Iterable[Gate], inplace: bool = False) -> StateVector:
    out = state if inplace else state.copy()
    for gate in gates:
        _apply_inplace(out.amplitudes, out.num_qubits, gate)
    return out


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    return apply_gates(state, (gate,))


def expectation(state: StateVector, observable: PauliSum, units: str = "J") -> EnergyValue:
    """Exact ``<psi|H|psi>``, term by term, never forming the matrix."""
    if state.num_qubits != observable.num_qubits:
        raise ValueError(
            f"dimension mismatch: {observable.num_qubits}-qubit observable on {state.num_qubits}-qubit state"
        )
    val = complex(kernels.pauli_expectation(state.amplitudes, *observable.packed))
    scale = max(1.0, observable.one_norm)
    if abs(val.imag) > 1e-10 * scale:
        raise ValueError(f"expectation has imaginary part {val.imag:.3e}; observable is not Hermitian")
    return EnergyValue(val.real, units)


@dataclass(frozen=True)
class ShotResult:
    counts: dict[str, int]
    shots: int
    basis: str = "Z"

    def __post_init__(self):
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts do not sum to shots")

    def frequency(self, bitstring: str) -> float:
        return self.counts.get(bitstring, 0) / self.shots


@dataclass(frozen=True)
class MeasurementSetting:
    """A basis change plus the terms it diagonalises (all become Z strings)."""

    basis: str
    rotation: tuple[Gate, ...]
    terms: PauliSum


def measurement_settings(h: PauliSum) -> list[MeasurementSetting]:
    """Group single-axis terms into Z, X and Y settings (empty ones omitted)."""
    n = h.num_qubits
    groups: dict[str, list] = {"Z": [], "X": [], "Y": []}
    for c, p in h.terms:
        axes = p.axes
        if len(axes) > 1:
            raise ValueError(f"ungroupable term {p.label}: mixes axes {sorted(axes)}")
        groups[next(iter(axes)) if axes else "Z"].append((c, p))
    rotations = {
        "Z": (),
        "X": tuple(Gate("H", (q,)) for q in range(n)),
        # RX(pi/2) conjugates Y into Z
        "Y": tuple(Gate("RX", (q,), math.pi / 2) for q in range(n)),
    }
    return [
        MeasurementSetting(basis, rotations[basis], PauliSum(n, tuple(terms)))
        for basis, terms in groups.items()
        if terms
    ]


def _sample_array(state: StateVector, rotation: Sequence[Gate], shots: int, rng: np.random.Generator) -> np.ndarray:
    rotated = apply_gates(state, rotation) if rotation else state
    probs = rotated.probabilities()
    probs /= probs.sum()
    # multinomial is the histogram of `shots` i.i.d. draws
    return rng.multinomial(shots, probs)


def sample_counts(state: StateVector, rotation: Sequence[Gate], shots: int, rng_seed: int, basis: str = "Z") -> ShotResult:
    if shots < 1:
        raise ValueError("shots must be >= 1")
    hist = _sample_array(state, rotation, shots, np.random.default_rng(rng_seed))
    n = state.num_qubits
    counts = {format(int(i), f"0{n}b"): int(hist[i]) for i in np.flatnonzero(hist)}
    return ShotResult(counts, shots, basis)


def estimate_energy_shots(
    state: StateVector, h: PauliSum, shots_per_setting: int, rng_seed: int | Sequence[int], units: str = "J"
) -> EnergyValue:
    """Shot-noise estimate of ``<H>`` from bit parities in each measurement setting.

    Each setting draws from its own child stream of ``SeedSequence(rng_seed)``.
    """
    if shots_per_setting < 1:
        raise ValueError("shots must be >= 1")
    if state.num_qubits != h.num_qubits:
        raise ValueError("dimension mismatch")
    settings = measurement_settings(h)
    streams = np.random.SeedSequence(rng_seed).spawn(len(settings))
    total = 0.0
    for setting, ss in zip(settings, streams):
        hist = _sample_array(state, setting.rotation, shots_per_setting, np.random.default_rng(ss))
        masks = np.array([sum(1 << q for q in p.support) for _, p in setting.terms], dtype=np.int64)
        coeffs = np.array([c for c, _ in setting.terms], dtype=np.float64)
        total += kernels.parity_average(hist.astype(np.float64), masks, coeffs) / shots_per_setting
    return EnergyValue(total, units)
