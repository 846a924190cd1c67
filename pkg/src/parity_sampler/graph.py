"""Finite multigraphs and GF(2) edge-set arithmetic.

An :class:`EdgeSet` is a bit vector over a graph's edge order (bit ``i`` is
edge ``i``); addition is XOR, i.e. symmetric difference. Self-loops and
parallel edges are allowed. A self-loop adds two to its vertex's degree, so
it is an even set by itself and is never a bridge.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import _kernels as K


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class EdgeSet:
    """Subset of a graph's edges stored as an integer bitmask."""

    bits: int
    size: int

    def __post_init__(self):
        if self.size < 0 or self.bits < 0 or self.bits >> self.size:
            raise GraphError(f"bitmask {self.bits:#x} does not fit {self.size} edges")

    @classmethod
    def empty(cls, size: int) -> EdgeSet:
        return cls(0, size)

    @classmethod
    def full(cls, size: int) -> EdgeSet:
        return cls((1 << size) - 1, size)

    @classmethod
    def from_indices(cls, size: int, indices: Iterable[int]) -> EdgeSet:
        bits = 0
        for i in indices:
            if not 0 <= i < size:
                raise GraphError(f"edge index {i} out of range for {size} edges")
            bits |= 1 << int(i)
        return cls(bits, size)

    @classmethod
    def from_array(cls, arr) -> EdgeSet:
        arr = np.asarray(arr)
        if arr.size == 0:
            return cls(0, 0)
        packed = np.packbits(arr.astype(bool), bitorder="little")
        return cls(int.from_bytes(packed.tobytes(), "little"), int(arr.size))

    @classmethod
    def from_hex(cls, text: str, size: int) -> EdgeSet:
        return cls(int(text, 16), size)

    def to_array(self) -> np.ndarray:
        if self.size == 0:
            return np.zeros(0, np.uint8)
        raw = self.bits.to_bytes((self.size + 7) // 8, "little")
        bits = np.unpackbits(np.frombuffer(raw, np.uint8), bitorder="little")
        return bits[: self.size].copy()

    def hex(self) -> str:
        """Lowercase hex, low edge index in the least significant bit."""
        width = max(1, (self.size + 3) // 4)
        return format(self.bits, f"0{width}x")

    def indices(self) -> list[int]:
        out = []
        b = self.bits
        while b:
            low = b & -b
            out.append(low.bit_length() - 1)
            b ^= low
        return out

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices())

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __contains__(self, e: int) -> bool:
        return bool((self.bits >> e) & 1)

    def _check(self, other: EdgeSet):
        if not isinstance(other, EdgeSet):
            return NotImplemented
        if other.size != self.size:
            raise GraphError(f"edge set sizes differ: {self.size} vs {other.size}")
        return None

    def __xor__(self, other: EdgeSet) -> EdgeSet:
        if self._check(other) is NotImplemented:
            return NotImplemented
        return EdgeSet(self.bits ^ other.bits, self.size)

    __add__ = __xor__

    def __or__(self, other: EdgeSet) -> EdgeSet:
        if self._check(other) is NotImplemented:
            return NotImplemented
        return EdgeSet(self.bits | other.bits, self.size)

    def __and__(self, other: EdgeSet) -> EdgeSet:
        if self._check(other) is NotImplemented:
            return NotImplemented
        return EdgeSet(self.bits & other.bits, self.size)

    def __sub__(self, other: EdgeSet) -> EdgeSet:
        if self._check(other) is NotImplemented:
            return NotImplemented
        return EdgeSet(self.bits & ~other.bits, self.size)

    def __invert__(self) -> EdgeSet:
        return EdgeSet(((1 << self.size) - 1) ^ self.bits, self.size)

    def __le__(self, other: EdgeSet) -> bool:
        self._check(other)
        return self.bits & ~other.bits == 0

    def __ge__(self, other: EdgeSet) -> bool:
        return other <= self

    def __repr__(self) -> str:
        return f"EdgeSet({self.indices()}, size={self.size})"


def xor(a: EdgeSet, b: EdgeSet) -> EdgeSet:
    return a ^ b


@dataclass(frozen=True)
class Graph:
    """Immutable multigraph; the edge order is the GF(2) coordinate order.

    ``dual_map`` optionally gives, for each edge, the index of its dual edge
    in a companion planar dual graph.
    """

    n_vertices: int
    edges: tuple[tuple[int, int], ...]
    labels: tuple | None = field(default=None, compare=False)
    dual_map: tuple[int, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.n_vertices < 0:
            raise GraphError("vertex count must be non-negative")
        for i, (u, v) in enumerate(self.edges):
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise GraphError(f"edge {i} = ({u}, {v}) has an endpoint out of range")
        if self.dual_map is not None:
            if sorted(self.dual_map) != list(range(len(self.edges))):
                raise GraphError("dual map must be a bijection onto the dual edge indices")

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def eu(self) -> np.ndarray:
        return np.array([u for u, _ in self.edges], dtype=np.int64)

    @cached_property
    def ev(self) -> np.ndarray:
        return np.array([v for _, v in self.edges], dtype=np.int64)

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(indptr, neighbour, edge id) rows per vertex, edges in index order."""
        n = self.n_vertices
        deg = np.zeros(n + 1, np.int64)
        for u, v in self.edges:
            deg[u + 1] += 1
            deg[v + 1] += 1
        indptr = np.cumsum(deg)
        fill = indptr[:-1].copy()
        nbr = np.empty(2 * self.n_edges, np.int64)
        nbr_e = np.empty(2 * self.n_edges, np.int64)
        for i, (u, v) in enumerate(self.edges):
            nbr[fill[u]] = v
            nbr_e[fill[u]] = i
            fill[u] += 1
            nbr[fill[v]] = u
            nbr_e[fill[v]] = i
            fill[v] += 1
        return indptr, nbr, nbr_e

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_vertices, np.int64)
        np.add.at(deg, self.eu, 1)
        np.add.at(deg, self.ev, 1)
        return deg

    def empty_set(self) -> EdgeSet:
        return EdgeSet.empty(self.n_edges)

    def all_edges(self) -> EdgeSet:
        return EdgeSet.full(self.n_edges)

    def edge_set(self, indices: Iterable[int]) -> EdgeSet:
        return EdgeSet.from_indices(self.n_edges, indices)

    def state(self, s: EdgeSet | None) -> np.ndarray:
        """uint8 view of an edge set for the kernels (``None`` = all edges)."""
        if s is None:
            return np.ones(self.n_edges, np.uint8)
        self._own(s)
        return s.to_array()

    def _own(self, s: EdgeSet):
        if s.size != self.n_edges:
            raise GraphError(f"edge set of size {s.size} does not belong to a graph with {self.n_edges} edges")


def build_graph(vertex_count: int, edge_list: Sequence[tuple[int, int]], labels=None) -> Graph:
    return Graph(int(vertex_count), tuple((int(u), int(v)) for u, v in edge_list), labels=labels)


def odd_vertex_set(g: Graph, s: EdgeSet) -> frozenset[int]:
    """Vertices of odd degree in (V, s); empty exactly when ``s`` is even."""
    arr = g.state(s).astype(bool)
    par = np.zeros(g.n_vertices, np.int64)
    np.add.at(par, g.eu[arr], 1)
    np.add.at(par, g.ev[arr], 1)
    return frozenset(int(v) for v in np.flatnonzero(par % 2))


def is_even(g: Graph, s: EdgeSet) -> bool:
    return not odd_vertex_set(g, s)


def component_count(g: Graph, s: EdgeSet | None = None) -> int:
    """Number of components of (V, s), isolated vertices included."""
    parent = np.empty(g.n_vertices, np.int64)
    return int(K.union_open(g.n_vertices, g.eu, g.ev, g.state(s), -1, parent))


def component_labels(g: Graph, s: EdgeSet | None = None) -> np.ndarray:
    return K.component_labels(g.n_vertices, g.eu, g.ev, g.state(s))


def cycle_space_dim(g: Graph, s: EdgeSet | None = None) -> int:
    """|E| - |V| + k over the (sub)graph; log2 of the number of even subsets."""
    n_open = g.n_edges if s is None else len(s)
    return n_open - g.n_vertices + component_count(g, s)


def spanning_forest(g: Graph, restrict_to: EdgeSet | None = None) -> EdgeSet:
    """Maximal forest, accepting edges greedily in edge order."""
    return EdgeSet.from_array(K.spanning_forest_mask(g.n_vertices, g.eu, g.ev, g.state(restrict_to)))


@dataclass(frozen=True)
class CycleBasis:
    cycles: tuple[EdgeSet, ...]
    chord_edges: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.cycles)

    def combine(self, coefficients: Iterable[int]) -> EdgeSet:
        out = 0
        size = self.cycles[0].size if self.cycles else 0
        for c, cyc in zip(coefficients, self.cycles):
            if c:
                out ^= cyc.bits
        return EdgeSet(out, size)


def fundamental_cycle_basis(g: Graph, forest: EdgeSet | None = None,
                            restrict_to: EdgeSet | None = None) -> CycleBasis:
    """One cycle per non-forest edge: the edge plus the forest path joining its ends."""
    support = g.all_edges() if restrict_to is None else restrict_to
    g._own(support)
    if forest is None:
        forest = spanning_forest(g, support)
    g._own(forest)
    if not forest <= support:
        raise GraphError("forest is not contained in the restricted edge set")
    if cycle_space_dim(g, forest) != 0:
        raise GraphError("forest contains a cycle")
    if component_count(g, forest) != component_count(g, support):
        raise GraphError("forest does not span the restricted subgraph")
    indptr, nbr, nbr_e = g.csr
    farr = forest.to_array()
    cycles, chords = [], []
    for e in (support - forest):
        out = np.zeros(g.n_edges, np.uint8)
        out[e] = 1
        par = np.zeros(g.n_vertices, np.uint8)
        u, v = g.edges[e]
        if u != v:
            par[u] ^= 1
            par[v] ^= 1
        K.complete_on_forest(g.n_vertices, g.eu, g.ev, indptr, nbr, nbr_e, farr, par, out)
        cycles.append(EdgeSet.from_array(out))
        chords.append(e)
    return CycleBasis(tuple(cycles), tuple(chords))


def bridges(g: Graph, s: EdgeSet | None = None) -> EdgeSet:
    indptr, nbr, nbr_e = g.csr
    return EdgeSet.from_array(K.bridge_flags(g.n_vertices, g.eu, g.ev, indptr, nbr, nbr_e, g.state(s)))


def cyclic_edges(g: Graph, s: EdgeSet | None = None) -> EdgeSet:
    """Edges of ``s`` lying on some cycle of (V, s): ``s`` minus its bridges."""
    s = g.all_edges() if s is None else s
    return s - bridges(g, s)


def gf2_rank(rows: Sequence[int]) -> int:
    """Rank over GF(2) of integer bit-vectors."""
    basis: dict[int, int] = {}
    for row in rows:
        x = row
        while x:
            top = x.bit_length() - 1
            if top not in basis:
                basis[top] = x
                break
            x ^= basis[top]
    return len(basis)


def in_span(vec: int, rows: Sequence[int]) -> bool:
    return gf2_rank(list(rows) + [vec]) == gf2_rank(rows)


# --- text formats -------------------------------------------------------------

def parse_edge_list(text: str) -> Graph:
    """First non-blank line ``V E``, then E lines ``u v`` (0-based)."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise GraphError("empty edge-list file")
    head = lines[0].split()
    if len(head) != 2:
        raise GraphError("header must be 'V E'")
    nv, ne = int(head[0]), int(head[1])
    if len(lines) - 1 != ne:
        raise GraphError(f"header announces {ne} edges, found {len(lines) - 1}")
    edges = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise GraphError(f"bad edge line: {ln!r}")
        edges.append((int(parts[0]), int(parts[1])))
    return build_graph(nv, edges)


def format_edge_list(g: Graph) -> str:
    out = [f"{g.n_vertices} {g.n_edges}"]
    out += [f"{u} {v}" for u, v in g.edges]
    return "\n".join(out) + "\n"


def read_edge_list(path, dual_map_path=None) -> Graph:
    g = parse_edge_list(Path(path).read_text())
    if dual_map_path is not None:
        g = Graph(g.n_vertices, g.edges, dual_map=read_dual_map(dual_map_path, g.n_edges))
    return g


def write_edge_list(g: Graph, path) -> None:
    Path(path).write_text(format_edge_list(g))


def read_dual_map(path, n_edges: int) -> tuple[int, ...]:
    """Companion file: one ``edge dual_edge`` pair per line."""
    mapping = {}
    for ln in Path(path).read_text().splitlines():
        ln = ln.split("#", 1)[0].strip()
        if ln:
            e, d = ln.split()
            mapping[int(e)] = int(d)
    if sorted(mapping) != list(range(n_edges)):
        raise GraphError("dual map must list every edge exactly once")
    return tuple(mapping[e] for e in range(n_edges))
