"""Time the numba kernels against their numpy fallbacks.

Kernel timings call both flavours in-process. The end-to-end row runs one
kagome-cell energy evaluation per backend in a subprocess, because the
backend is chosen once at import from KAGOME_VQE_NUMBA.

    python benchmarks/bench_kernels.py --qubits 12 --repeat 20
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from kagome_vqe.kernels import FLAVOURS
from kagome_vqe.lattice import build_kagome_cell, chain
from kagome_vqe.pauli import heisenberg_hamiltonian

END_TO_END = """
import timeit, numpy as np
from kagome_vqe.ansatz import AnsatzSpec, bind_and_prepare, build_hea
from kagome_vqe.lattice import build_kagome_cell
from kagome_vqe.pauli import heisenberg_hamiltonian
from kagome_vqe.statevector import expectation
h = heisenberg_hamiltonian(build_kagome_cell())
c = build_hea(AnsatzSpec("hea", 12, 3, ("RY",), "CNOT", "ring"))
theta = np.random.default_rng(0).uniform(-np.pi, np.pi, c.num_params)
f = lambda: expectation(bind_and_prepare(c, theta), h)
f()
print(min(timeit.repeat(f, number=1, repeat={repeat})))
"""


def best_of(fn, repeat):
    fn()  # compile / warm caches
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def kernel_cases(n, rng):
    psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    psi /= np.linalg.norm(psi)
    h = heisenberg_hamiltonian(build_kagome_cell() if n == 12 else chain(n))
    xm, zm, ph, co = h.packed
    u = np.array([[0.6, -0.8], [0.8, 0.6]], dtype=complex)
    counts = rng.multinomial(100_000, np.abs(psi) ** 2).astype(np.float64)
    masks = zm[: len(zm) // 3]
    out = np.empty_like(psi)
    return {
        "apply_1q (all qubits)": lambda k: [k["apply_1q"](psi, q, u[0, 0], u[0, 1], u[1, 0], u[1, 1]) for q in range(n)],
        "apply_cnot (ring)": lambda k: [k["apply_cnot"](psi, q, (q + 1) % n) for q in range(n)],
        "apply_cz (ring)": lambda k: [k["apply_cz"](psi, q, (q + 1) % n) for q in range(n)],
        f"pauli_expectation ({len(co)} terms)": lambda k: k["pauli_expectation"](psi, xm, zm, ph, co),
        f"pauli_apply ({len(co)} terms)": lambda k: k["pauli_apply"](psi, xm, zm, ph, co, out),
        "parity_average (Z terms)": lambda k: k["parity_average"](counts, masks, co[: len(masks)]),
    }


def end_to_end(backend, repeat):
    env = dict(os.environ, KAGOME_VQE_NUMBA="1" if backend == "numba" else "0")
    res = subprocess.run(
        [sys.executable, "-c", END_TO_END.format(repeat=repeat)], env=env, capture_output=True, text=True, check=True
    )
    return float(res.stdout.strip().splitlines()[-1])


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--qubits", type=int, default=12)
    parser.add_argument("--repeat", type=int, default=20)
    parser.add_argument("--skip-end-to-end", action="store_true")
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    print(f"{'kernel':34s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}")
    for name, case in kernel_cases(args.qubits, rng).items():
        t_nb = best_of(lambda: case(FLAVOURS["numba"]), args.repeat)
        t_np = best_of(lambda: case(FLAVOURS["numpy"]), args.repeat)
        print(f"{name:34s} {1e3 * t_nb:10.3f} {1e3 * t_np:10.3f} {t_np / t_nb:8.1f}x")
    if not args.skip_end_to_end:
        t_nb = end_to_end("numba", args.repeat)
        t_np = end_to_end("numpy", args.repeat)
        print(f"{'kagome HEA energy (end to end)':34s} {1e3 * t_nb:10.3f} {1e3 * t_np:10.3f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
