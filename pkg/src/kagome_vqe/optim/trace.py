"""Per-iteration optimizer records and their file formats."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from os import PathLike

import numpy as np

CSV_HEADER = "iteration,energy,theta_norm,grad_norm,evals,wall_time_s"
STATUSES = ("converged", "max_iter", "stalled", "failed")


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    energy: float
    theta_norm: float
    grad_norm: float | None
    evals: int
    wall_time: float


@dataclass
class OptimizerTrace:
    """Energy-vs-iteration history of one optimization run.

    The best point is tracked as records arrive; on ties the earliest wins.
    """

    optimizer: str
    records: list[TraceRecord] = field(default_factory=list)
    best_theta: np.ndarray | None = None
    best_energy: float = math.inf
    status: str = "max_iter"
    message: str = ""

    def record(
        self,
        iteration: int,
        energy: float,
        theta: np.ndarray,
        evals: int,
        wall_time: float,
        grad_norm: float | None = None,
    ) -> None:
        if self.records and iteration <= self.records[-1].iteration:
            raise ValueError("trace iterations must increase strictly")
        theta = np.asarray(theta, dtype=float)
        self.records.append(
            TraceRecord(int(iteration), float(energy), float(np.linalg.norm(theta)), grad_norm, int(evals), float(wall_time))
        )
        if energy < self.best_energy:
            self.best_energy = float(energy)
            self.best_theta = theta.copy()

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.records])

    @property
    def iterations(self) -> np.ndarray:
        return np.array([r.iteration for r in self.records])

    @property
    def evals(self) -> int:
        return self.records[-1].evals if self.records else 0

    @property
    def best_so_far(self) -> np.ndarray:
        return np.minimum.accumulate(self.energies)

    def to_csv(self, include_wall_time: bool = True) -> str:
        lines = [CSV_HEADER]
        for r in self.records:
            grad = "" if r.grad_norm is None else repr(r.grad_norm)
            wall = f"{r.wall_time:.6f}" if include_wall_time else ""
            lines.append(f"{r.iteration},{r.energy!r},{r.theta_norm!r},{grad},{r.evals},{wall}")
        return "\n".join(lines) + "\n"

    def write_csv(self, path: str | PathLike, include_wall_time: bool = True) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv(include_wall_time))

    def summary(self) -> dict:
        return {
            "optimizer": self.optimizer,
            "status": self.status,
            "iterations": int(self.records[-1].iteration) if self.records else 0,
            "evals": self.evals,
            "best_energy": self.best_energy,
            "best_theta": [] if self.best_theta is None else [float(t) for t in self.best_theta],
            "message": self.message,
        }
