"""Parameterized trial circuits: hardware-efficient and EfficientSU2 layouts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from os import PathLike
from typing import Sequence

import numpy as np

from .lattice import CouplingGraph
from .pauli import PauliSum
from .statevector import Gate, StateVector, apply_gates, expectation, zero_state

__all__ = [
    "HEA",
    "EFFICIENT_SU2",
    "AnsatzSpec",
    "Circuit",
    "ResourceCount",
    "build_hea",
    "build_efficient_su2",
    "build_circuit",
    "bind_and_prepare",
    "resource_counts",
    "parameter_shift_gradient",
    "entangler_pairs",
]

HEA = "hea"
EFFICIENT_SU2 = "efficient_su2"
PATTERNS = ("coupling_map", "linear", "ring")


@dataclass(frozen=True)
class AnsatzSpec:
    family: str = HEA
    num_qubits: int = 2
    layers: int = 1
    rotation_set: tuple[str, ...] = ("RY", "RZ")
    entangler: str = "CZ"
    entanglement: str = "coupling_map"
    coupling: CouplingGraph | None = field(default=None, compare=False)
    no_entanglers: bool = False

    def __post_init__(self):
        object.__setattr__(self, "family", self.family.lower())
        object.__setattr__(self, "rotation_set", tuple(r.upper() for r in self.rotation_set))
        object.__setattr__(self, "entangler", self.entangler.upper())
        if self.family not in (HEA, EFFICIENT_SU2):
            raise ValueError(f"unknown ansatz family {self.family!r}")
        if self.family == EFFICIENT_SU2:
            # layout is fixed: linear chain regardless of what was asked for
            object.__setattr__(self, "entanglement", "linear")
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be >= 1")
        if self.layers < 0:
            raise ValueError("layers must be >= 0")
        if not self.rotation_set:
            raise ValueError("rotation_set must be non-empty")
        bad = [r for r in self.rotation_set if r not in ("RX", "RY", "RZ")]
        if bad or len(set(self.rotation_set)) != len(self.rotation_set):
            raise ValueError(f"invalid rotation_set {self.rotation_set}")
        if self.entangler not in ("CZ", "CNOT"):
            raise ValueError(f"entangler must be CZ or CNOT, got {self.entangler!r}")
        if self.entanglement not in PATTERNS:
            raise ValueError(f"entanglement must be one of {PATTERNS}, got {self.entanglement!r}")
        uses_map = self.entanglement == "coupling_map" and not self.no_entanglers
        if uses_map and self.coupling is None:
            raise ValueError("entanglement 'coupling_map' needs a coupling graph")
        if self.entanglement == "ring" and self.num_qubits < 3 and not self.no_entanglers:
            raise ValueError("ring entanglement needs at least 3 qubits")


@dataclass(frozen=True)
class ResourceCount:
    depth: int
    parameters: int
    entangling_gates: int


@dataclass(frozen=True)
class Circuit:
    """Gate list in which rotations with ``angle=None`` are parameter slots.

    ``param_slots[k] = (position, k)``: slot ``k`` feeds the gate at ``position``.
    """

    num_qubits: int
    gates: tuple[Gate, ...]
    param_slots: tuple[tuple[int, int], ...]
    name: str = "circuit"

    def __post_init__(self):
        slots = [k for _, k in self.param_slots]
        if slots != list(range(len(slots))):
            raise ValueError("slot indices must be 0..num_params-1 in order")
        positions = [pos for pos, _ in self.param_slots]
        if len(set(positions)) != len(positions):
            raise ValueError("a gate may hold at most one parameter slot")
        for pos in positions:
            if not self.gates[pos].is_rotation or self.gates[pos].angle is not None:
                raise ValueError(f"slot at position {pos} must be an unbound rotation")
        free = {i for i, g in enumerate(self.gates) if g.is_rotation and g.angle is None}
        if free != set(positions):
            raise ValueError("every unbound rotation needs exactly one slot")
        for g in self.gates:
            if max(g.qubits) >= self.num_qubits:
                raise ValueError(f"gate {g} out of range")

    @property
    def num_params(self) -> int:
        return len(self.param_slots)

    def bind(self, theta: Sequence[float]) -> list[Gate]:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.num_params,):
            raise ValueError(f"expected {self.num_params} parameters, got {theta.shape[0] if theta.ndim else 'scalar'}")
        gates = list(self.gates)
        for pos, k in self.param_slots:
            gates[pos] = gates[pos].bound(theta[k])
        return gates

    def to_text(self) -> str:
        """Line-per-gate listing: ``GATE q[,q2][,slot=k|angle=v]``."""
        slot_of = dict(self.param_slots)
        lines = []
        for i, g in enumerate(self.gates):
            line = g.kind + " " + ",".join(str(q) for q in g.qubits)
            if i in slot_of:
                line += f",slot={slot_of[i]}"
            elif g.angle is not None:
                line += f",angle={g.angle!r}"
            lines.append(line)
        return "\n".join(lines) + "\n"

    def write(self, path: str | PathLike) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())


class _Builder:
    def __init__(self, n: int):
        self.n = n
        self.gates: list[Gate] = []
        self.slots: list[tuple[int, int]] = []

    def rotation(self, kind: str, q: int) -> None:
        self.slots.append((len(self.gates), len(self.slots)))
        self.gates.append(Gate(kind, (q,)))

    def entangle(self, kind: str, pairs) -> None:
        for a, b in pairs:
            self.gates.append(Gate(kind, (a, b)))

    def build(self, name: str) -> Circuit:
        return Circuit(self.n, tuple(self.gates), tuple(self.slots), name)


def entangler_pairs(spec: AnsatzSpec, pattern: str | None = None) -> list[tuple[int, int]]:
    """Qubit pairs (control first) that one entangling layer touches."""
    if spec.no_entanglers:
        return []
    n = spec.num_qubits
    pattern = pattern or spec.entanglement
    if pattern == "linear":
        return [(i, i + 1) for i in range(n - 1)]
    if pattern == "ring":
        return [(i, (i + 1) % n) for i in range(n)]
    return [(a, b) for a, b in spec.coupling.edges if a < n and b < n]


def build_hea(spec: AnsatzSpec) -> Circuit:
    """``layers`` blocks of [rotations per qubit, entanglers per edge], then a last rotation block."""
    if spec.family != HEA:
        raise ValueError(f"build_hea needs family 'hea', got {spec.family!r}")
    b = _Builder(spec.num_qubits)
    pairs = entangler_pairs(spec)
    for layer in range(spec.layers + 1):
        for kind in spec.rotation_set:
            for q in range(spec.num_qubits):
                b.rotation(kind, q)
        if layer < spec.layers:
            b.entangle(spec.entangler, pairs)
    return b.build(f"hea-x{spec.layers}")


def build_efficient_su2(spec: AnsatzSpec) -> Circuit:
    """RY and RZ layers with a linear entangler chain between them; rotation set and pattern are fixed."""
    if spec.family != EFFICIENT_SU2:
        raise ValueError(f"build_efficient_su2 needs family 'efficient_su2', got {spec.family!r}")
    b = _Builder(spec.num_qubits)
    pairs = entangler_pairs(spec, "linear")
    for layer in range(spec.layers + 1):
        for kind in ("RY", "RZ"):
            for q in range(spec.num_qubits):
                b.rotation(kind, q)
        if layer < spec.layers:
            b.entangle(spec.entangler, pairs)
    return b.build(f"efficient_su2-x{spec.layers}")


def build_circuit(spec: AnsatzSpec) -> Circuit:
    return build_hea(spec) if spec.family == HEA else build_efficient_su2(spec)


def bind_and_prepare(circuit: Circuit, theta: Sequence[float]) -> StateVector:
    state = zero_state(circuit.num_qubits)
    return apply_gates(state, circuit.bind(theta), inplace=True)


def resource_counts(circuit: Circuit) -> ResourceCount:
    """Depth is the longest per-qubit gate chain, every gate counting 1."""
    level = [0] * circuit.num_qubits
    for g in circuit.gates:
        top = max(level[q] for q in g.qubits) + 1
        for q in g.qubits:
            level[q] = top
    return ResourceCount(
        depth=max(level, default=0),
        parameters=circuit.num_params,
        entangling_gates=sum(g.is_entangling for g in circuit.gates),
    )


def parameter_shift_gradient(circuit: Circuit, h: PauliSum, theta: Sequence[float]) -> np.ndarray:
    """Exact gradient of ``<theta|H|theta>`` via the pi/2 shift rule."""
    theta = np.asarray(theta, dtype=float)
    for pos, _ in circuit.param_slots:
        if circuit.gates[pos].kind not in ("RX", "RY", "RZ"):
            raise ValueError(f"parameter shift needs single-axis rotations, found {circuit.gates[pos].kind}")
    grad = np.empty(circuit.num_params)
    shift = math.pi / 2
    for k in range(circuit.num_params):
        plus = theta.copy()
        plus[k] += shift
        minus = theta.copy()
        minus[k] -= shift
        grad[k] = 0.5 * (expectation(bind_and_prepare(circuit, plus), h) - expectation(bind_and_prepare(circuit, minus), h))
    return grad
