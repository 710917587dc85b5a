"""Exact ground-state energies: dense eigensolver and matrix-free Lanczos."""

from __future__ import annotations

from dataclasses import dataclass, field
from os import PathLike
from typing import Iterable

import numpy as np
import scipy.linalg

from .pauli import EnergyValue, PauliSum

__all__ = [
    "DENSE_MAX_QUBITS",
    "GroundStateResult",
    "LanczosError",
    "dense_ground_energy",
    "lanczos_ground_energy",
    "residual_norm",
    "write_golden",
    "read_golden",
]

DENSE_MAX_QUBITS = 12
LANCZOS_MAX_QUBITS = 20


@dataclass(frozen=True)
class GroundStateResult:
    energy: EnergyValue
    residual: float
    method: str
    iterations: int = 0
    vector: np.ndarray | None = field(default=None, repr=False, compare=False)


class LanczosError(RuntimeError):
    """Lanczos stopped before converging; carries the best estimate."""

    def __init__(self, message: str, energy: float, residual: float):
        super().__init__(message)
        self.energy = energy
        self.residual = residual


def residual_norm(h: PauliSum, energy: float, vector: np.ndarray) -> float:
    """``||H v - E v||`` for a normalized ``v``."""
    return float(np.linalg.norm(h.matvec(vector) - energy * vector))


def dense_ground_energy(h: PauliSum) -> GroundStateResult:
    if h.num_qubits > DENSE_MAX_QUBITS:
        raise ValueError(f"dense diagonalization refused for {h.num_qubits} > {DENSE_MAX_QUBITS} qubits")
    mat = h.to_dense()
    vals, vecs = scipy.linalg.eigh(mat, subset_by_index=[0, 0], overwrite_a=True)
    vec = np.ascontiguousarray(vecs[:, 0], dtype=np.complex128)
    vec /= np.linalg.norm(vec)
    energy = float(vals[0])
    return GroundStateResult(EnergyValue(energy), residual_norm(h, energy, vec), "dense", 0, vec)


def lanczos_ground_energy(
    h: PauliSum, max_krylov: int = 300, tol: float = 1e-10, rng_seed: int = 0
) -> GroundStateResult:
    """Lowest eigenvalue by Lanczos with full reorthogonalization.

    Converged once the true residual of the Ritz pair drops below ``tol``.
    """
    n = h.num_qubits
    if n > LANCZOS_MAX_QUBITS:
        raise ValueError(f"Lanczos limited to {LANCZOS_MAX_QUBITS} qubits")
    dim = 1 << n
    rng = np.random.default_rng(rng_seed)
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    v /= np.linalg.norm(v)
    m = min(max_krylov, dim)
    basis = np.zeros((m, dim), dtype=np.complex128)
    alphas: list[float] = []
    betas: list[float] = []
    best = (np.inf, np.inf)
    for k in range(m):
        basis[k] = v
        w = h.matvec(v)
        alphas.append(float(np.vdot(v, w).real))
        # two passes of classical Gram-Schmidt against the whole basis
        for _ in range(2):
            w -= basis[: k + 1].T @ (basis[: k + 1].conj() @ w)
        beta = float(np.linalg.norm(w))
        ritz, svecs = scipy.linalg.eigh_tridiagonal(np.array(alphas), np.array(betas), select="i", select_range=(0, 0))
        estimate = abs(beta * svecs[-1, 0])
        if estimate < tol or beta < 1e-14 or k == m - 1:
            vec = basis[: k + 1].T @ svecs[:, 0]
            vec /= np.linalg.norm(vec)
            energy = float(ritz[0])
            res = residual_norm(h, energy, vec)
            if res < tol:
                return GroundStateResult(EnergyValue(energy), res, "lanczos", k + 1, vec)
            best = min(best, (res, energy))
            if beta < 1e-14:
                break
        betas.append(beta)
        v = w / beta
    res, energy = best
    raise LanczosError(f"Lanczos did not converge in {m} steps (residual {res:.3e})", energy, res)


def write_golden(rows: Iterable[tuple[int, float, GroundStateResult]], path: str | PathLike) -> None:
    """Write ``num_sites J energy residual method`` lines."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# num_sites J energy residual method\n")
        for num_sites, J, res in rows:
            fh.write(f"{num_sites} {J!r} {float(res.energy)!r} {res.residual:.3e} {res.method}\n")


def read_golden(path: str | PathLike) -> list[tuple[int, float, float, float, str]]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip() and not line.startswith("#"):
                a, b, c, d, e = line.split()
                rows.append((int(a), float(b), float(c), float(d), e))
    return rows
