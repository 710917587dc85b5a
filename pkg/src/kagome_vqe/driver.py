"""VQE runs: ansatz + Hamiltonian + optimizer, over seeded restarts."""

from __future__ import annotations

import json
import math
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache

import numpy as np

from . import lattice as lat
from .ansatz import AnsatzSpec, Circuit, ResourceCount, bind_and_prepare, build_circuit, parameter_shift_gradient, resource_counts
from .exact import GroundStateResult, dense_ground_energy, lanczos_ground_energy
from .optim import (
    Objective,
    OptimizerTrace,
    SpsaSchedule,
    bfgs_minimize,
    calibrate_spsa,
    cobyla_minimize,
    finite_difference_gradient,
    spsa_minimize,
)
from .pauli import EnergyValue, PauliSum, heisenberg_hamiltonian
from .statevector import estimate_energy_shots, expectation

__all__ = [
    "LatticeConfig",
    "AnsatzConfig",
    "OptimizerConfig",
    "ExecutionConfig",
    "OutputConfig",
    "VqeConfig",
    "RestartResult",
    "VqeReport",
    "Comparison",
    "build_lattice",
    "ground_state",
    "run_vqe",
    "run_comparison",
    "accuracy",
    "worker_count",
]

OPTIMIZERS = ("spsa", "bfgs", "cobyla")
LATTICES = ("kagome", "dimer", "triangle", "chain", "ring", "custom")
DENSE_CUTOFF = 8


@dataclass(frozen=True)
class LatticeConfig:
    kind: str = "kagome"
    sites: int | None = None
    edges: tuple[tuple[int, int], ...] | None = None
    device: str | None = None


@dataclass(frozen=True)
class AnsatzConfig:
    family: str = "hea"
    layers: int = 1
    rotations: tuple[str, ...] = ("RY", "RZ")
    entangler: str = "CZ"
    entanglement: str = "coupling_map"
    no_entanglers: bool = False


@dataclass(frozen=True)
class OptimizerConfig:
    name: str = "spsa"
    # SPSA; ``a = None`` means calibrate from the first-step target
    spsa_a: float | None = None
    spsa_c: float = 0.1
    spsa_A: float | None = None
    spsa_alpha: float = 0.602
    spsa_gamma: float = 0.101
    spsa_target_step: float = 0.1
    spsa_track_every: int = 1
    # BFGS
    grad_tol: float = 1e-6
    # COBYLA
    rho_beg: float = 0.5
    rho_end: float = 1e-6


@dataclass(frozen=True)
class ExecutionConfig:
    mode: str = "exact"
    shots: int = 1024
    restarts: int = 1
    seed: int = 0
    max_iter: int = 200
    eval_budget: int | None = None
    init: str = "random"
    fd_gradient_on_shots: bool = False
    fd_step: float = 1e-2


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "runs/out"
    plot: bool = True
    units: str = "J"


@dataclass(frozen=True)
class VqeConfig:
    lattice: LatticeConfig = field(default_factory=LatticeConfig)
    J: float = 1.0
    ansatz: AnsatzConfig = field(default_factory=AnsatzConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    execution: ExecutionConfig = field(default_factory=ExecutionConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def validate(self) -> "VqeConfig":
        ex = self.execution
        if self.lattice.kind not in LATTICES:
            raise ValueError(f"lattice.kind must be one of {LATTICES}")
        if self.optimizer.name not in OPTIMIZERS:
            raise ValueError(f"optimizer.name must be one of {OPTIMIZERS}")
        if ex.mode not in ("exact", "shots"):
            raise ValueError("execution.mode must be 'exact' or 'shots'")
        if ex.restarts < 1:
            raise ValueError("execution.restarts must be >= 1")
        if ex.max_iter < 1:
            raise ValueError("execution.max_iter must be >= 1")
        if ex.mode == "shots" and ex.shots < 1:
            raise ValueError("execution.shots must be >= 1")
        if ex.init not in ("random", "zeros"):
            raise ValueError("execution.init must be 'random' or 'zeros'")
        if self.optimizer.name == "bfgs" and ex.mode == "shots" and not ex.fd_gradient_on_shots:
            raise ValueError("BFGS needs exact mode unless execution.fd_gradient_on_shots is set")
        if not math.isfinite(self.J):
            raise ValueError("hamiltonian.J must be finite")
        return self

    @property
    def label(self) -> str:
        return f"{self.ansatz.family}+{self.optimizer.name}"


def accuracy(best: float, e0: float) -> float:
    """``1 - |best - e0| / |e0|``; our definition, the reporting metric throughout."""
    return 1.0 - abs(best - e0) / abs(e0)


def build_lattice(cfg: LatticeConfig) -> lat.LatticeGraph:
    kind = cfg.kind
    if kind == "kagome":
        return lat.build_kagome_cell()
    if kind == "dimer":
        return lat.dimer()
    if kind == "triangle":
        return lat.triangle()
    if kind in ("chain", "ring"):
        if not cfg.sites:
            raise ValueError(f"lattice.sites is required for kind {kind!r}")
        return lat.chain(cfg.sites) if kind == "chain" else lat.ring(cfg.sites)
    if kind == "custom":
        if cfg.edges is None or not cfg.sites:
            raise ValueError("custom lattices need lattice.sites and lattice.edges")
        return lat.LatticeGraph(cfg.sites, tuple(map(tuple, cfg.edges)), name="custom")
    raise ValueError(f"unknown lattice kind {kind!r}")


def _device(cfg: LatticeConfig) -> lat.CouplingGraph:
    return lat.load_coupling_graph(cfg.device) if cfg.device else lat.default_coupling_graph()


@lru_cache(maxsize=32)
def _ground_state_cached(num_qubits: int, text: str) -> GroundStateResult:
    h = PauliSum.from_text(text, num_qubits)
    if num_qubits <= DENSE_CUTOFF:
        return dense_ground_energy(h)
    return lanczos_ground_energy(h, rng_seed=0)


def ground_state(h: PauliSum) -> GroundStateResult:
    """Exact ground state, dense for small systems and Lanczos beyond."""
    return _ground_state_cached(h.num_qubits, h.to_text())


def _ansatz_spec(cfg: VqeConfig, graph: lat.LatticeGraph) -> tuple[AnsatzSpec, lat.SiteMapping | None]:
    a = cfg.ansatz
    coupling = None
    mapping = None
    if a.entanglement == "coupling_map" and not a.no_entanglers and a.family == "hea":
        device = _device(cfg.lattice)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            mapping = lat.map_cell_to_device(graph, device)
        coupling = lat.logical_coupling(graph, device, mapping)
    spec = AnsatzSpec(
        family=a.family,
        num_qubits=graph.num_sites,
        layers=a.layers,
        rotation_set=tuple(a.rotations),
        entangler=a.entangler,
        entanglement=a.entanglement if a.family == "hea" else "linear",
        coupling=coupling,
        no_entanglers=a.no_entanglers,
    )
    return spec, mapping


@dataclass
class RestartResult:
    index: int
    trace: OptimizerTrace
    theta0: np.ndarray
    exact_energy: float
    wall_time: float
    status: str
    message: str = ""


@dataclass
class VqeReport:
    config: VqeConfig
    restarts: list[RestartResult]
    exact: GroundStateResult
    resources: ResourceCount
    circuit: Circuit
    mapping_exact: bool | None
    best_energy: float
    best_restart: int
    accuracy: float
    noisy_best_energy: float | None = None
    noisy_accuracy: float | None = None

    @property
    def exact_E0(self) -> EnergyValue:
        return self.exact.energy

    @property
    def total_evals(self) -> int:
        return sum(r.trace.evals for r in self.restarts)

    @property
    def wall_time(self) -> float:
        return sum(r.wall_time for r in self.restarts)

    def to_dict(self, include_wall_time: bool = True) -> dict:
        out = {
            "label": self.config.label,
            "config": _config_dict(self.config),
            "exact_E0": float(self.exact.energy),
            "exact_method": self.exact.method,
            "exact_residual": self.exact.residual,
            "units": self.config.output.units,
            "best_energy": self.best_energy,
            "best_restart": self.best_restart,
            "accuracy": self.accuracy,
            "noisy_best_energy": self.noisy_best_energy,
            "noisy_accuracy": self.noisy_accuracy,
            "resources": asdict(self.resources),
            "mapping_exact": self.mapping_exact,
            "total_evals": self.total_evals,
            "restarts": [],
        }
        for r in self.restarts:
            entry = {
                "index": r.index,
                "status": r.status,
                "message": r.message,
                "best_energy": r.trace.best_energy if math.isfinite(r.trace.best_energy) else None,
                "exact_energy": r.exact_energy if math.isfinite(r.exact_energy) else None,
                "evals": r.trace.evals,
                "iterations": int(r.trace.records[-1].iteration) if r.trace.records else 0,
                "best_theta": [] if r.trace.best_theta is None else [float(t) for t in r.trace.best_theta],
            }
            if include_wall_time:
                entry["wall_time_s"] = r.wall_time
            out["restarts"].append(entry)
        if include_wall_time:
            out["wall_time_s"] = self.wall_time
        return out

    def to_text(self, include_wall_time: bool = True) -> str:
        return json.dumps(self.to_dict(include_wall_time), indent=2) + "\n"


def _config_dict(cfg: VqeConfig) -> dict:
    d = asdict(cfg)
    if d["lattice"]["edges"] is not None:
        d["lattice"]["edges"] = [list(e) for e in d["lattice"]["edges"]]
    d["ansatz"]["rotations"] = list(d["ansatz"]["rotations"])
    return d


def worker_count() -> int:
    """Worker cap from ``KAGOME_VQE_THREADS`` (0 or unset means one per CPU)."""
    raw = os.environ.get("KAGOME_VQE_THREADS", "0").strip() or "0"
    n = int(raw)
    return n if n > 0 else (os.cpu_count() or 1)


def _restart_seeds(seed: int, index: int) -> np.ndarray:
    return np.random.SeedSequence(seed, spawn_key=(index,)).generate_state(4, dtype=np.uint32)


def _make_objective(cfg: VqeConfig, circuit: Circuit, h: PauliSum, shot_seed: int) -> Objective:
    ex = cfg.execution
    units = cfg.output.units
    m = circuit.num_params

    def exact_energy(theta):
        return expectation(bind_and_prepare(circuit, theta), h, units)

    if ex.mode == "exact":
        grad = lambda theta: parameter_shift_gradient(circuit, h, theta)  # noqa: E731
        return Objective(exact_energy, m, grad, grad_cost=2 * m, max_evals=ex.eval_budget)

    calls = [0]

    def shot_energy(theta):
        # one child stream per evaluation keeps runs reproducible
        calls[0] += 1
        state = bind_and_prepare(circuit, theta)
        return estimate_energy_shots(state, h, ex.shots, [shot_seed, calls[0]], units)

    grad = None
    if ex.fd_gradient_on_shots:
        grad = lambda theta: finite_difference_gradient(shot_energy, theta, ex.fd_step)  # noqa: E731
    return Objective(shot_energy, m, grad, grad_cost=2 * m, max_evals=ex.eval_budget)


def _run_restart(cfg: VqeConfig, circuit: Circuit, h: PauliSum, index: int) -> RestartResult:
    ex, op = cfg.execution, cfg.optimizer
    init_seed, opt_seed, calib_seed, shot_seed = (int(s) for s in _restart_seeds(ex.seed, index))
    m = circuit.num_params
    if ex.init == "zeros":
        theta0 = np.zeros(m)
    else:
        theta0 = np.random.default_rng(init_seed).uniform(-np.pi, np.pi, m)
    obj = _make_objective(cfg, circuit, h, shot_seed)
    start = time.monotonic()
    try:
        if op.name == "spsa":
            if op.spsa_a is None:
                schedule = calibrate_spsa(
                    obj, theta0, ex.max_iter, calib_seed, op.spsa_target_step, op.spsa_c, op.spsa_alpha, op.spsa_gamma
                )
                if op.spsa_A is not None:
                    schedule = replace(schedule, A=op.spsa_A)
            else:
                A = 0.1 * ex.max_iter if op.spsa_A is None else op.spsa_A
                schedule = SpsaSchedule(op.spsa_a, op.spsa_c, A, op.spsa_alpha, op.spsa_gamma)
            trace = spsa_minimize(obj, theta0, schedule, ex.max_iter, opt_seed, op.spsa_track_every)
        elif op.name == "bfgs":
            trace = bfgs_minimize(obj, theta0, op.grad_tol, ex.max_iter)
        else:
            trace = cobyla_minimize(obj, theta0, op.rho_beg, op.rho_end, ex.max_iter)
    except Exception as exc:  # a failed restart must not sink the others
        trace = OptimizerTrace(op.name, status="failed", message=f"{type(exc).__name__}: {exc}")
        return RestartResult(index, trace, theta0, math.inf, time.monotonic() - start, "failed", trace.message)
    wall = time.monotonic() - start
    if trace.best_theta is None:
        exact_e = math.inf
    elif ex.mode == "exact" and math.isfinite(trace.best_energy):
        exact_e = trace.best_energy
    else:
        exact_e = float(expectation(bind_and_prepare(circuit, trace.best_theta), h))
    return RestartResult(index, trace, theta0, exact_e, wall, trace.status, trace.message)


def run_vqe(config: VqeConfig, workers: int | None = None) -> VqeReport:
    """Run every restart of ``config`` and score the best against exact diagonalization."""
    cfg = config.validate()
    graph = build_lattice(cfg.lattice)
    h = heisenberg_hamiltonian(graph, cfg.J)
    spec, mapping = _ansatz_spec(cfg, graph)
    circuit = build_circuit(spec)
    exact = ground_state(h)
    e0 = float(exact.energy)

    workers = worker_count() if workers is None else workers
    indices = range(cfg.execution.restarts)
    if workers > 1 and cfg.execution.restarts > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda i: _run_restart(cfg, circuit, h, i), indices))
    else:
        results = [_run_restart(cfg, circuit, h, i) for i in indices]

    finite = [r for r in results if math.isfinite(r.exact_energy)]
    if finite:
        # ties go to the lowest restart index
        best = min(finite, key=lambda r: (r.exact_energy, r.index))
        best_energy, best_index = best.exact_energy, best.index
        acc = accuracy(best_energy, e0) if e0 != 0 else float("nan")
    else:
        best_energy, best_index, acc = math.inf, -1, float("nan")
    noisy_best = noisy_acc = None
    if cfg.execution.mode == "shots" and finite:
        noisy_best = min(r.trace.best_energy for r in finite)
        noisy_acc = accuracy(noisy_best, e0) if e0 != 0 else float("nan")
    return VqeReport(
        config=cfg,
        restarts=results,
        exact=exact,
        resources=resource_counts(circuit),
        circuit=circuit,
        mapping_exact=None if mapping is None else mapping.exact,
        best_energy=best_energy,
        best_restart=best_index,
        accuracy=acc,
        noisy_best_energy=noisy_best,
        noisy_accuracy=noisy_acc,
    )


@dataclass
class Comparison:
    reports: list[VqeReport]
    errors: list[tuple[VqeConfig, str]] = field(default_factory=list)

    TABLE_HEADER = "ansatz,optimizer,best_energy,accuracy,evals,wall_time_s"

    def rows(self) -> list[dict]:
        rows = [
            {
                "ansatz": r.config.ansatz.family,
                "optimizer": r.config.optimizer.name,
                "best_energy": r.best_energy,
                "accuracy": r.accuracy,
                "evals": r.total_evals,
                "wall_time_s": r.wall_time,
            }
            for r in self.reports
        ]
        for cfg, msg in self.errors:
            rows.append(
                {
                    "ansatz": cfg.ansatz.family,
                    "optimizer": cfg.optimizer.name,
                    "best_energy": math.nan,
                    "accuracy": math.nan,
                    "evals": 0,
                    "wall_time_s": 0.0,
                    "error": msg,
                }
            )
        # stable sort: equal accuracies keep config order; failures sink to the bottom
        rows.sort(key=lambda r: -r["accuracy"] if math.isfinite(r["accuracy"]) else math.inf)
        return rows

    def to_csv(self, include_wall_time: bool = True) -> str:
        lines = [self.TABLE_HEADER]
        for r in self.rows():
            wall = f"{r['wall_time_s']:.6f}" if include_wall_time else ""
            lines.append(f"{r['ansatz']},{r['optimizer']},{r['best_energy']!r},{r['accuracy']!r},{r['evals']},{wall}")
        return "\n".join(lines) + "\n"


def run_comparison(configs: list[VqeConfig], workers: int | None = None) -> Comparison:
    """One report per config plus a table sorted by accuracy; failures are kept inline."""
    if not configs:
        raise ValueError("run_comparison needs at least one config")
    workers = worker_count() if workers is None else workers

    def one(cfg):
        try:
            return run_vqe(cfg, workers=1), None
        except Exception as exc:
            return None, f"{type(exc).__name__}: {exc}"

    if workers > 1 and len(configs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(one, configs))
    else:
        outcomes = [one(c) for c in configs]
    comp = Comparison([])
    for cfg, (report, err) in zip(configs, outcomes):
        if report is not None:
            comp.reports.append(report)
        else:
            comp.errors.append((cfg, err))
    return comp
