"""Lattice graphs, device coupling maps and the site-to-qubit embedding."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from itertools import combinations
from os import PathLike
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "LatticeGraph",
    "CouplingGraph",
    "SiteMapping",
    "build_kagome_cell",
    "dimer",
    "chain",
    "ring",
    "triangle",
    "random_graph",
    "load_coupling_graph",
    "default_coupling_graph",
    "find_cycle",
    "map_cell_to_device",
    "logical_coupling",
    "write_edge_list",
]


def _check_pairs(pairs: Iterable[Sequence[int]], size: int, what: str) -> tuple[tuple[int, int], ...]:
    seen: set[frozenset[int]] = set()
    out = []
    for pair in pairs:
        if len(pair) != 2:
            raise ValueError(f"{what} {list(pair)!r} is not a pair")
        a, b = int(pair[0]), int(pair[1])
        if a == b:
            raise ValueError(f"self-loop {what} ({a}, {b})")
        if not (0 <= a < size and 0 <= b < size):
            raise ValueError(f"{what} ({a}, {b}) out of range for {size} nodes")
        key = frozenset((a, b))
        if key in seen:
            raise ValueError(f"duplicate {what} ({a}, {b})")
        seen.add(key)
        out.append((a, b))
    return tuple(out)


def _adjacency(size: int, pairs: Iterable[tuple[int, int]]) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(size)]
    for a, b in pairs:
        adj[a].append(b)
        adj[b].append(a)
    for row in adj:
        row.sort()
    return adj


@dataclass(frozen=True)
class LatticeGraph:
    """Spin sites and the nearest-neighbour bonds between them."""

    num_sites: int
    bonds: tuple[tuple[int, int], ...]
    labels: tuple[str, ...] | None = None
    name: str = "custom"

    def __post_init__(self):
        if self.num_sites < 1:
            raise ValueError("a lattice needs at least one site")
        object.__setattr__(self, "bonds", _check_pairs(self.bonds, self.num_sites, "bond"))
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != self.num_sites:
                raise ValueError("one label per site required")
            object.__setattr__(self, "labels", labels)

    @cached_property
    def adjacency(self) -> list[list[int]]:
        return _adjacency(self.num_sites, self.bonds)

    def degree(self, site: int) -> int:
        return len(self.adjacency[site])

    def has_bond(self, a: int, b: int) -> bool:
        return b in self.adjacency[a]

    @cached_property
    def triangle_list(self) -> tuple[tuple[int, int, int], ...]:
        """All site triples whose three bonds are present, in sorted order."""
        tris = []
        for a in range(self.num_sites):
            for b, c in combinations([n for n in self.adjacency[a] if n > a], 2):
                if self.has_bond(b, c):
                    tris.append((a, b, c))
        return tuple(sorted(tris))

    def label(self, site: int) -> str:
        return self.labels[site] if self.labels else str(site)


def build_kagome_cell() -> LatticeGraph:
    """The 12-site ring of six corner-sharing triangles.

    Sites 0-5 are the hexagon ``h0..h5`` and sites 6-11 the outer tips
    ``o0..o5``; tip ``o_i`` closes the triangle ``(h_i, h_{i+1}, o_i)``.
    """
    bonds = [(i, (i + 1) % 6) for i in range(6)]
    for i in range(6):
        bonds.append((6 + i, i))
        bonds.append((6 + i, (i + 1) % 6))
    labels = tuple(f"h{i}" for i in range(6)) + tuple(f"o{i}" for i in range(6))
    return LatticeGraph(12, tuple(bonds), labels, name="kagome")


def dimer() -> LatticeGraph:
    return LatticeGraph(2, ((0, 1),), name="dimer")


def triangle() -> LatticeGraph:
    return LatticeGraph(3, ((0, 1), (1, 2), (0, 2)), name="triangle")


def chain(n: int) -> LatticeGraph:
    return LatticeGraph(n, tuple((i, i + 1) for i in range(n - 1)), name=f"chain{n}")


def ring(n: int) -> LatticeGraph:
    if n < 3:
        raise ValueError("a ring needs at least 3 sites")
    return LatticeGraph(n, tuple((i, (i + 1) % n) for i in range(n)), name=f"ring{n}")


def random_graph(n: int, rng: np.random.Generator, p: float = 0.5) -> LatticeGraph:
    """Connected random graph: a random spanning tree plus Bernoulli(p) extra edges."""
    order = rng.permutation(n)
    edges = {frozenset((int(order[k]), int(order[rng.integers(0, k)]))) for k in range(1, n)}
    for a, b in combinations(range(n), 2):
        if rng.random() < p:
            edges.add(frozenset((a, b)))
    bonds = sorted(tuple(sorted(e)) for e in edges)
    return LatticeGraph(n, tuple(bonds), name=f"random{n}")


@dataclass(frozen=True)
class CouplingGraph:
    """Device connectivity: which qubit pairs support a two-qubit gate."""

    num_qubits: int
    edges: tuple[tuple[int, int], ...]
    name: str = "device"

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be positive")
        object.__setattr__(self, "edges", _check_pairs(self.edges, self.num_qubits, "edge"))
        if not self._connected():
            raise ValueError(f"coupling graph {self.name!r} is disconnected")

    def _connected(self) -> bool:
        adj = _adjacency(self.num_qubits, self.edges)
        seen = {0}
        stack = [0]
        while stack:
            for nb in adj[stack.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        return len(seen) == self.num_qubits

    @cached_property
    def adjacency(self) -> list[list[int]]:
        return _adjacency(self.num_qubits, self.edges)

    def degree(self, qubit: int) -> int:
        return len(self.adjacency[qubit])

    def has_edge(self, a: int, b: int) -> bool:
        return b in self.adjacency[a]


def load_coupling_graph(source: str | PathLike | Mapping) -> CouplingGraph:
    """Build a :class:`CouplingGraph` from a mapping or a JSON file path.

    The mapping needs ``num_qubits`` and ``edges``; ``name`` is optional.
    """
    if not isinstance(source, Mapping):
        with open(source, encoding="utf-8") as fh:
            source = json.load(fh)
    for key in ("num_qubits", "edges"):
        if key not in source:
            raise ValueError(f"coupling map is missing key {key!r}")
    return CouplingGraph(int(source["num_qubits"]), tuple(map(tuple, source["edges"])), str(source.get("name", "device")))


def default_coupling_graph() -> CouplingGraph:
    """The bundled 16-qubit heavy-hex device (IBM Guadalupe layout)."""
    text = resources.files("kagome_vqe.data").joinpath("guadalupe.json").read_text(encoding="utf-8")
    return load_coupling_graph(json.loads(text))


def find_cycle(adjacency: Sequence[Sequence[int]], length: int, start: int | None = None) -> list[int] | None:
    """Depth-first search for a simple cycle visiting exactly ``length`` nodes.

    Neighbours are explored in ascending order, so the result is deterministic.
    Returns the nodes in cycle order, or ``None``.
    """
    n = len(adjacency)
    if length < 3 or length > n:
        return None
    starts = [start] if start is not None else range(n)
    for s in starts:
        path = [s]
        on_path = [False] * n
        on_path[s] = True

        def extend() -> bool:
            node = path[-1]
            if len(path) == length:
                return s in adjacency[node]
            for nb in adjacency[node]:
                # fixing the start as the smallest node avoids re-finding rotations
                if on_path[nb] or (start is None and nb < s):
                    continue
                path.append(nb)
                on_path[nb] = True
                if extend():
                    return True
                path.pop()
                on_path[nb] = False
            return False

        if extend():
            return list(path)
    return None


@dataclass(frozen=True)
class SiteMapping:
    """Injective placement of lattice sites on device qubits.

    ``exact`` is true when a Hamiltonian cycle of the cell was laid onto a
    cycle of the device, so consecutive cycle sites sit on coupled qubits.
    """

    site_to_qubit: tuple[int, ...]
    exact: bool
    cell_cycle: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if len(set(self.site_to_qubit)) != len(self.site_to_qubit):
            raise ValueError("site mapping is not injective")

    def qubit(self, site: int) -> int:
        return self.site_to_qubit[site]


def map_cell_to_device(cell: LatticeGraph, device: CouplingGraph) -> SiteMapping:
    """Embed ``cell`` into ``device`` along a cycle when both graphs allow it.

    Falls back to the identity placement (``exact=False``, with a warning)
    when the cell has no Hamiltonian cycle or the device no cycle of that size.
    """
    n = cell.num_sites
    if device.num_qubits < n:
        raise ValueError(f"device too small: {device.num_qubits} qubits for {n} sites")
    cell_cycle = find_cycle(cell.adjacency, n, start=0) if n >= 3 else None
    dev_cycle = find_cycle(device.adjacency, n) if cell_cycle else None
    if cell_cycle is None or dev_cycle is None:
        warnings.warn(f"no cycle embedding of {cell.name!r} into {device.name!r}; using identity placement", stacklevel=2)
        return SiteMapping(tuple(range(n)), exact=False)
    placement = [0] * n
    for site, qubit in zip(cell_cycle, dev_cycle):
        placement[site] = qubit
    return SiteMapping(tuple(placement), exact=True, cell_cycle=tuple(cell_cycle))


def logical_coupling(cell: LatticeGraph, device: CouplingGraph, mapping: SiteMapping) -> CouplingGraph:
    """Device connectivity pulled back to lattice-site indices.

    Pairs of sites whose qubits are device neighbours, listed along the
    embedding cycle first (oriented in cycle order), then any remaining ones.
    For an inexact mapping the lattice bonds themselves are returned.
    """
    if not mapping.exact:
        return CouplingGraph(cell.num_sites, cell.bonds, name=f"{cell.name}-bonds")
    inverse = {q: s for s, q in enumerate(mapping.site_to_qubit)}
    cyc = mapping.cell_cycle
    edges = [(cyc[k], cyc[(k + 1) % len(cyc)]) for k in range(len(cyc))]
    seen = {frozenset(e) for e in edges}
    for qa, qb in device.edges:
        if qa in inverse and qb in inverse:
            key = frozenset((inverse[qa], inverse[qb]))
            if key not in seen:
                seen.add(key)
                edges.append((inverse[qa], inverse[qb]))
    return CouplingGraph(cell.num_sites, tuple(edges), name=f"{cell.name}-on-{device.name}")


def write_edge_list(graph: LatticeGraph | CouplingGraph, path: str | PathLike) -> None:
    """Write one ``i j`` line per bond/edge."""
    pairs = graph.bonds if isinstance(graph, LatticeGraph) else graph.edges
    with open(path, "w", encoding="utf-8") as fh:
        for a, b in pairs:
            fh.write(f"{a} {b}\n")
