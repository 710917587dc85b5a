"""Command-line entry point: ``kagome-vqe run|exact|version``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, Experiment, load_experiment
from .driver import Comparison, VqeReport, build_lattice, run_comparison, run_vqe
from .exact import DENSE_MAX_QUBITS, LanczosError, dense_ground_energy, lanczos_ground_energy, write_golden
from .pauli import heisenberg_hamiltonian
from .plot import emit_convergence_plot

log = logging.getLogger("kagome_vqe")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2
AGREEMENT_TOL = 1e-8


def _load(path: str, overrides: list[str] | None) -> Experiment:
    if not Path(path).is_file():
        raise ConfigError(f"cannot read config file {path!r}: no such file")
    return load_experiment(path, overrides)


def write_report_outputs(report: VqeReport, out: Path, plot: bool) -> None:
    """``report.txt``, ``traces/restart_<k>.csv`` and optionally ``plots/restart_<k>.svg``."""
    (out / "traces").mkdir(parents=True, exist_ok=True)
    (out / "report.txt").write_text(report.to_text(), encoding="utf-8")
    units = report.config.output.units
    for r in report.restarts:
        r.trace.write_csv(out / "traces" / f"restart_{r.index}.csv")
        if plot and r.trace.records:
            (out / "plots").mkdir(exist_ok=True)
            title = f"{report.config.label} restart {r.index}"
            emit_convergence_plot(r.trace, float(report.exact_E0), out / "plots" / f"restart_{r.index}.svg", units, title)


def write_comparison_outputs(comp: Comparison, out: Path, plot: bool) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "table.csv").write_text(comp.to_csv(), encoding="utf-8")
    summary = [r.to_dict() for r in comp.reports]
    summary += [{"label": c.label, "error": msg} for c, msg in comp.errors]
    (out / "report.txt").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    for report in comp.reports:
        write_report_outputs(report, out / "runs" / report.config.label, plot)


def cmd_run(path: str, overrides: list[str] | None = None, out: str | None = None) -> int:
    try:
        exp = _load(path, overrides)
    except (ConfigError, OSError) as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out_dir = Path(out or exp.base.output.directory)
    plot = exp.base.output.plot
    try:
        if exp.is_grid:
            comp = run_comparison(exp.configs())
            write_comparison_outputs(comp, out_dir, plot)
            print(comp.to_csv(), end="")
            if comp.errors:
                return EXIT_RUNTIME
        else:
            report = run_vqe(exp.base)
            write_report_outputs(report, out_dir, plot)
            print(
                f"{report.config.label}: best {report.best_energy:.10f} vs exact {float(report.exact_E0):.10f} "
                f"({report.config.output.units}), accuracy {report.accuracy:.6f}"
            )
            if all(r.status == "failed" for r in report.restarts):
                return EXIT_RUNTIME
    except Exception as exc:
        log.exception("run failed")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"outputs written to {out_dir}")
    return EXIT_OK


def cmd_exact(path: str, overrides: list[str] | None = None, out: str | None = None) -> int:
    """Regenerate ``ground_energy.txt`` with dense and Lanczos rows and check they agree."""
    try:
        exp = _load(path, overrides)
    except (ConfigError, OSError) as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    cfg = exp.base
    graph = build_lattice(cfg.lattice)
    h = heisenberg_hamiltonian(graph, cfg.J)
    rows = []
    dense = None
    if h.num_qubits <= DENSE_MAX_QUBITS:
        dense = dense_ground_energy(h)
        rows.append((graph.num_sites, cfg.J, dense))
    else:
        print(f"dense diagonalization refused for {h.num_qubits} qubits (limit {DENSE_MAX_QUBITS})")
    try:
        lanczos = lanczos_ground_energy(h, max_krylov=500, tol=1e-10, rng_seed=cfg.execution.seed)
    except LanczosError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    rows.append((graph.num_sites, cfg.J, lanczos))
    target = Path(out) if out else Path(cfg.output.directory) / "ground_energy.txt"
    target.parent.mkdir(parents=True, exist_ok=True)
    write_golden(rows, target)
    for _, _, res in rows:
        print(f"{res.method:8s} E0 = {float(res.energy):.12f}  residual {res.residual:.2e}")
    if dense is not None:
        gap = abs(float(dense.energy) - float(lanczos.energy))
        print(f"dense/lanczos agreement: {gap:.2e}")
        if gap > AGREEMENT_TOL:
            print(f"error: oracles disagree by {gap:.3e} > {AGREEMENT_TOL}", file=sys.stderr)
            return EXIT_RUNTIME
    print(f"golden file written to {target}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kagome-vqe", description="VQE experiments on the kagome Heisenberg model")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a VQE experiment or comparison grid")
    run.add_argument("file")
    run.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    run.add_argument("--out", metavar="DIR")

    exact = sub.add_parser("exact", help="regenerate the exact ground-energy golden file")
    exact.add_argument("file")
    exact.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    exact.add_argument("--out", metavar="PATH", help="golden file path (default: <output.directory>/ground_energy.txt)")

    sub.add_parser("version", help="print the package version")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "version":
        from ._accel import backend_name

        print(f"kagome-vqe {__version__} (kernels: {backend_name()})")
        return EXIT_OK
    if args.command == "run":
        return cmd_run(args.file, args.overrides, args.out)
    return cmd_exact(args.file, args.overrides, args.out)


if __name__ == "__main__":
    sys.exit(main())
