"""Variational quantum eigensolver for the kagome Heisenberg antiferromagnet."""

from ._accel import USE_NUMBA, backend_name
from .ansatz import AnsatzSpec, Circuit, ResourceCount, bind_and_prepare, build_efficient_su2, build_hea, parameter_shift_gradient, resource_counts
from .driver import VqeConfig, VqeReport, run_comparison, run_vqe
from .exact import GroundStateResult, dense_ground_energy, lanczos_ground_energy
from .lattice import CouplingGraph, LatticeGraph, SiteMapping, build_kagome_cell, default_coupling_graph, load_coupling_graph, map_cell_to_device
from .pauli import EnergyValue, PauliString, PauliSum, apply_pauli_sum, canonicalize, heisenberg_hamiltonian
from .statevector import Gate, ShotResult, StateVector, apply_gate, estimate_energy_shots, expectation, measurement_settings, sample_counts, zero_state

__version__ = "0.1.0"
