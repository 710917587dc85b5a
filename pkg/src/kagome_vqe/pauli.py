"""Weighted Pauli strings and the Heisenberg Hamiltonian built from them."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property
from os import PathLike
from typing import Iterable, Mapping

import numpy as np

from . import kernels
from .lattice import LatticeGraph

__all__ = [
    "PauliString",
    "PauliSum",
    "EnergyValue",
    "heisenberg_hamiltonian",
    "canonicalize",
    "apply_pauli_sum",
]

AXES = ("X", "Y", "Z")
ZERO_TOL = 1e-12
_LABEL_RE = re.compile(r"([XYZ])(\d+)")


class EnergyValue(float):
    """A finite real energy that remembers its unit label."""

    units: str

    def __new__(cls, value: float, units: str = "J"):
        value = float(value)
        if not math.isfinite(value):
            raise ValueError(f"energy must be finite, got {value}")
        obj = super().__new__(cls, value)
        obj.units = units
        return obj

    def __repr__(self) -> str:
        return f"EnergyValue({float(self)!r}, units={self.units!r})"

    def __reduce__(self):
        return (EnergyValue, (float(self), self.units))


@dataclass(frozen=True, order=True)
class PauliString:
    """Tensor product of X/Y/Z factors on selected qubits; identity elsewhere.

    ``factors`` is kept sorted by qubit, which makes it the canonical key.
    """

    num_qubits: int
    factors: tuple[tuple[int, str], ...] = ()

    def __post_init__(self):
        facs = self.factors.items() if isinstance(self.factors, Mapping) else self.factors
        facs = tuple(sorted((int(q), str(a).upper()) for q, a in facs))
        qubits = [q for q, _ in facs]
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"repeated qubit in Pauli factors {facs}")
        for q, a in facs:
            if a not in AXES:
                raise ValueError(f"unknown Pauli axis {a!r}")
            if not 0 <= q < self.num_qubits:
                raise ValueError(f"qubit {q} out of range for {self.num_qubits} qubits")
        object.__setattr__(self, "factors", facs)

    @classmethod
    def from_label(cls, label: str, num_qubits: int) -> "PauliString":
        """Parse labels like ``"X0X5"`` or ``"I"``."""
        label = label.strip()
        if label in ("", "I"):
            return cls(num_qubits)
        if _LABEL_RE.sub("", label):
            raise ValueError(f"malformed Pauli label {label!r}")
        return cls(num_qubits, tuple((int(q), a) for a, q in _LABEL_RE.findall(label)))

    @property
    def label(self) -> str:
        return "".join(f"{a}{q}" for q, a in self.factors) or "I"

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self.factors)

    @property
    def axes(self) -> frozenset[str]:
        return frozenset(a for _, a in self.factors)

    def masks(self) -> tuple[int, int, int]:
        """``(xmask, zmask, number_of_Y)`` in the kernel convention."""
        xm = zm = ny = 0
        for q, a in self.factors:
            if a in "XY":
                xm |= 1 << q
            if a in "YZ":
                zm |= 1 << q
            ny += a == "Y"
        return xm, zm, ny

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class PauliSum:
    """Real linear combination of Pauli strings on ``num_qubits`` qubits."""

    num_qubits: int
    terms: tuple[tuple[float, PauliString], ...] = ()

    def __post_init__(self):
        terms = tuple((float(c), p) for c, p in self.terms)
        for c, p in terms:
            if p.num_qubits != self.num_qubits:
                raise ValueError("all terms must act on the same number of qubits")
            if not math.isfinite(c):
                raise ValueError("coefficients must be finite")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def from_labels(cls, num_qubits: int, pairs: Iterable[tuple[float, str]]) -> "PauliSum":
        return cls(num_qubits, tuple((c, PauliString.from_label(lab, num_qubits)) for c, lab in pairs))

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if other.num_qubits != self.num_qubits:
            raise ValueError("qubit count mismatch")
        return PauliSum(self.num_qubits, self.terms + other.terms)

    def scaled(self, factor: float) -> "PauliSum":
        return PauliSum(self.num_qubits, tuple((factor * c, p) for c, p in self.terms))

    @property
    def one_norm(self) -> float:
        """Sum of absolute coefficients, a bound on ``|<H>|``."""
        return float(sum(abs(c) for c, _ in self.terms))

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits

    @cached_property
    def packed(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Arrays ``(xmasks, zmasks, phases, coeffs)`` consumed by the kernels."""
        n = len(self.terms)
        xm = np.zeros(n, dtype=np.int64)
        zm = np.zeros(n, dtype=np.int64)
        ph = np.zeros(n, dtype=np.complex128)
        co = np.zeros(n, dtype=np.float64)
        for k, (c, p) in enumerate(self.terms):
            x, z, ny = p.masks()
            xm[k], zm[k], ph[k], co[k] = x, z, 1j**ny, c
        return xm, zm, ph, co

    def matvec(self, vec: np.ndarray) -> np.ndarray:
        """``H @ vec`` for a raw amplitude array, without building ``H``."""
        vec = np.ascontiguousarray(vec, dtype=np.complex128)
        if vec.shape != (self.dim,):
            raise ValueError(f"vector of length {vec.shape} does not match {self.num_qubits} qubits")
        out = np.empty_like(vec)
        kernels.pauli_apply(vec, *self.packed, out)
        return out

    def to_dense(self) -> np.ndarray:
        """The full ``2^n x 2^n`` matrix; real dtype when no term has an odd Y count."""
        xm, zm, ph, co = self.packed
        real = bool(np.all(np.abs(ph.imag) < 0.5))
        mat = np.zeros((self.dim, self.dim), dtype=np.float64 if real else np.complex128)
        idx = np.arange(self.dim, dtype=np.int64)
        for x, z, p, c in zip(xm, zm, ph, co):
            signs = 1 - 2 * (np.bitwise_count(idx & z) & 1).astype(np.int64)
            vals = c * p * signs
            mat[idx ^ x, idx] += vals.real if real else vals
        return mat

    def to_text(self) -> str:
        """One ``coeff label`` line per term, coefficients in round-trip precision."""
        return "".join(f"{c!r} {p.label}\n" for c, p in self.terms)

    @classmethod
    def from_text(cls, text: str, num_qubits: int) -> "PauliSum":
        pairs = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected 'coeff label', got {line!r}")
            pairs.append((float(parts[0]), parts[1]))
        return cls.from_labels(num_qubits, pairs)

    def write(self, path: str | PathLike) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())


def _order_key(p: PauliString) -> tuple:
    return (len(p.factors), p.factors)


def canonicalize(h: PauliSum) -> PauliSum:
    """Merge duplicate strings, drop ``|c| < 1e-12`` terms, sort by weight then factors."""
    merged: dict[PauliString, float] = {}
    for c, p in h.terms:
        merged[p] = merged.get(p, 0.0) + c
    kept = [(c, p) for p, c in merged.items() if abs(c) >= ZERO_TOL]
    kept.sort(key=lambda cp: _order_key(cp[1]))
    return PauliSum(h.num_qubits, tuple(kept))


def heisenberg_hamiltonian(graph: LatticeGraph, J: float = 1.0) -> PauliSum:
    """``J * sum_<p,q> S_p . S_q`` with ``S = sigma / 2``.

    Every bond contributes ``(J/4)(XX + YY + ZZ)``, so the sum carries
    ``3 * len(graph.bonds)`` terms.
    """
    if not math.isfinite(J):
        raise ValueError("J must be finite")
    terms = []
    for a, b in graph.bonds:
        for axis in AXES:
            terms.append((J / 4.0, PauliString(graph.num_sites, ((a, axis), (b, axis)))))
    # bonds are unique by lattice validation, so sorting is all canonical form needs
    terms.sort(key=lambda cp: _order_key(cp[1]))
    return PauliSum(graph.num_sites, tuple(terms))


def apply_pauli_sum(h: PauliSum, state):
    """``H |psi>`` for a :class:`~kagome_vqe.statevector.StateVector` (unnormalized result)."""
    from .statevector import StateVector

    if state.num_qubits != h.num_qubits:
        raise ValueError(f"dimension mismatch: {h.num_qubits}-qubit operator on {state.num_qubits}-qubit state")
    return StateVector(state.num_qubits, h.matvec(state.amplitudes))
