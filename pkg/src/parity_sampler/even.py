"""Random even subgraphs via the random-cluster coupling.

For edge probabilities p_e the even-subgraph law gives an even set F weight
prod_{e in F} p_e prod_{e not in F} (1 - p_e). Edges with p_e > 1/2 form the
set A; flipping them turns the problem into one with all probabilities at
most 1/2, at the price of conditioning the random-cluster side on the
A-odd vertex set W. A sample is then A + gamma + P, where gamma is a uniform
even subset of the random-cluster configuration omega and P is a family of
open paths inside omega pairing up W.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _kernels as K
from .graph import EdgeSet, Graph, GraphError, component_labels, odd_vertex_set, spanning_forest
from .rc import CftpSource, RCSpec

RCSource = Callable[[np.random.Generator], EdgeSet]


@dataclass(frozen=True)
class EvenWeights:
    """Per-edge probabilities with the derived flip set A, weights r_e and set W."""

    graph: Graph
    per_edge_p: tuple[float, ...]

    def __post_init__(self):
        if len(self.per_edge_p) != self.graph.n_edges:
            raise GraphError(f"expected {self.graph.n_edges} probabilities, got {len(self.per_edge_p)}")
        for i, p in enumerate(self.per_edge_p):
            if not 0.0 < p < 1.0:
                raise ValueError(f"p[{i}] = {p} must lie strictly between 0 and 1")

    @classmethod
    def uniform(cls, graph: Graph, p: float) -> EvenWeights:
        return cls(graph, (float(p),) * graph.n_edges)

    @cached_property
    def A(self) -> EdgeSet:
        # p_e = 1/2 stays outside A so that A is as small as possible
        return self.graph.edge_set(i for i, p in enumerate(self.per_edge_p) if p > 0.5)

    @cached_property
    def r(self) -> tuple[float, ...]:
        return tuple(2 * (1 - p) if p > 0.5 else 2 * p for p in self.per_edge_p)

    @cached_property
    def W(self) -> frozenset[int]:
        return odd_vertex_set(self.graph, self.A)

    @cached_property
    def rc_spec(self) -> RCSpec:
        return RCSpec(self.graph, self.r, self.W if self.W else None)


@dataclass(frozen=True)
class PathFamily:
    """Edge-disjoint simple open paths whose endpoints use every W vertex once."""

    paths: tuple[EdgeSet, ...]
    endpoints: tuple[tuple[int, int], ...]

    def union(self, size: int) -> EdgeSet:
        bits = 0
        for p in self.paths:
            bits |= p.bits
        return EdgeSet(bits, size)

    def validate(self, g: Graph, omega: EdgeSet, w: Iterable[int]) -> None:
        w = set(w)
        used = 0
        seen_ends: list[int] = []
        for path, (a, b) in zip(self.paths, self.endpoints, strict=True):
            if not path <= omega:
                raise ValueError("path uses an edge outside omega")
            if used & path.bits:
                raise ValueError("paths share an edge")
            used |= path.bits
            if a == b or a not in w or b not in w:
                raise ValueError(f"bad endpoints ({a}, {b})")
            _check_simple_path(g, path, a, b)
            seen_ends += [a, b]
        if sorted(seen_ends) != sorted(w):
            raise ValueError("W vertices are not matched exactly once")


def _check_simple_path(g: Graph, path: EdgeSet, a: int, b: int) -> None:
    deg: dict[int, int] = {}
    for e in path:
        u, v = g.edges[e]
        if u == v:
            raise ValueError("path contains a self-loop")
        deg[u] = deg.get(u, 0) + 1
        deg[v] = deg.get(v, 0) + 1
    ends = sorted(x for x, d in deg.items() if d == 1)
    if ends != sorted((a, b)) or any(d > 2 for d in deg.values()):
        raise ValueError("edge set is not a simple path between its endpoints")
    # degree pattern alone allows a path plus disjoint cycles; check connectivity
    if len(deg) != len(path) + 1:
        raise ValueError("edge set is not a single path")


def uniform_even(g: Graph, support: EdgeSet | None, rng: np.random.Generator) -> EdgeSet:
    """Uniform even subset of ``support`` (all edges when None).

    Each fundamental cycle of the support's spanning forest is included by a
    fair coin; the sum is formed by taking the chosen chords and completing
    them on the forest, which gives the same set as XOR-ing the cycles.
    """
    indptr, nbr, nbr_e = g.csr
    omega = g.state(support)
    coins = rng.integers(0, 2, size=g.n_edges, dtype=np.uint8)
    out = np.zeros(g.n_edges, np.uint8)
    target = np.zeros(g.n_vertices, np.uint8)
    K.even_from_config(g.n_vertices, g.eu, g.ev, indptr, nbr, nbr_e, omega, target, coins, out)
    return EdgeSet.from_array(out)


def _check_p(p: float, hi: float = 0.5):
    if not 0.0 <= p <= hi:
        raise ValueError(f"p = {p} must lie in [0, {hi}]")


def sample_even_subcritical(g: Graph, p: float, rc_source: RCSource | None,
                            rng: np.random.Generator) -> EdgeSet:
    """Even subgraph with a common p <= 1/2: uniform even subset of a
    random-cluster configuration at r = 2p."""
    _check_p(p)
    if p == 0.0:
        return g.empty_set()
    if p == 0.5:
        omega = g.all_edges()
    else:
        if rc_source is None:
            rc_source = CftpSource(RCSpec.uniform(g, 2 * p))
        omega = rc_source(rng)
    return uniform_even(g, omega, rng)


def pair_paths(g: Graph, omega: EdgeSet, w: Iterable[int]) -> PathFamily:
    """Deterministic family of open paths in ``omega`` pairing up ``w``.

    Inside each open cluster the W vertices are paired consecutively by
    index; the XOR of the forest paths between partners is a forest J whose
    odd vertices are exactly W. J is then peeled: start at the smallest odd
    vertex, keep taking the lowest-index unused J edge until stuck, and
    record the walk. In a forest every such walk is a simple path.
    """
    w = sorted(set(int(v) for v in w))
    if not w:
        return PathFamily((), ())
    if len(w) % 2:
        raise ValueError("|W| must be even")
    labels = component_labels(g, omega)
    if np.any(np.bincount(labels[w], minlength=int(labels.max()) + 1) % 2):
        raise ValueError("omega is not W-even")
    forest = spanning_forest(g, omega)
    # consecutive pairing within a cluster: the forest completion of the
    # target parity W is the same edge set whatever pairing is used
    indptr, nbr, nbr_e = g.csr
    par = np.zeros(g.n_vertices, np.uint8)
    par[w] = 1
    j = np.zeros(g.n_edges, np.uint8)
    K.complete_on_forest(g.n_vertices, g.eu, g.ev, indptr, nbr, nbr_e, forest.to_array(), par, j)

    inc: dict[int, list[int]] = {}
    for e in np.flatnonzero(j):
        u, v = g.edges[e]
        inc.setdefault(u, []).append(int(e))
        inc.setdefault(v, []).append(int(e))
    for lst in inc.values():
        lst.sort()
    unused = set(int(e) for e in np.flatnonzero(j))
    odd = set(w)
    paths, ends = [], []
    while odd:
        start = min(odd)
        cur = start
        walked = []
        while True:
            nxt = next((e for e in inc.get(cur, ()) if e in unused), None)
            if nxt is None:
                break
            unused.discard(nxt)
            walked.append(nxt)
            u, v = g.edges[nxt]
            cur = v if u == cur else u
        if cur == start:
            raise AssertionError("peeling walk did not leave its start vertex")
        odd.discard(start)
        odd.discard(cur)
        paths.append(g.edge_set(walked))
        ends.append((start, cur))
    return PathFamily(tuple(paths), tuple(ends))


def sample_even_general(g: Graph, weights: EvenWeights, rc_source: RCSource | None,
                        rng: np.random.Generator) -> EdgeSet:
    """Even subgraph for arbitrary per-edge probabilities: A + gamma + P(omega)."""
    if weights.graph != g:
        raise GraphError("weights belong to a different graph")
    if rc_source is None:
        rc_source = CftpSource(weights.rc_spec)
    omega = rc_source(rng)
    gamma = uniform_even(g, omega, rng)
    out = gamma ^ weights.A
    if weights.W:
        out = out ^ pair_paths(g, omega, weights.W).union(g.n_edges)
    return out


def rc_from_even(g: Graph, f: EdgeSet, p: float, rng: np.random.Generator) -> EdgeSet:
    """Add each edge outside ``f`` independently with probability p/(1-p).

    If ``f`` is an even subgraph with parameter p, the result is the
    random-cluster configuration at r = 2p, q = 2.
    """
    _check_p(p)
    if odd_vertex_set(g, f):
        raise ValueError("f is not even")
    q = 1.0 if p == 0.5 else p / (1.0 - p)
    add = rng.random(g.n_edges) < q
    return f | EdgeSet.from_array(add)


def _as_weights(g: Graph, p) -> EvenWeights | float:
    if isinstance(p, EvenWeights):
        return p
    if isinstance(p, (int, float)):
        return float(p)
    return EvenWeights(g, tuple(float(x) for x in p))


def make_rc_source(spec: RCSpec, backend: str = "cftp") -> RCSource:
    if backend == "cftp":
        return CftpSource(spec)
    if backend == "exact":
        from .oracle import ExactSource, enumerate_rc
        return ExactSource(enumerate_rc(spec))
    raise ValueError(f"unknown backend {backend!r}")


def even_sampler(g: Graph, p: float | Sequence[float] | EvenWeights,
                 backend: str = "cftp") -> tuple[Callable[[np.random.Generator], EdgeSet], RCSource | None]:
    """Build a one-argument sampler for the even-subgraph law at ``p``.

    Returns (sampler, random-cluster source); the source is None when no
    random-cluster draw is needed (p = 0 or p = 1/2 everywhere).
    """
    w = _as_weights(g, p)
    if isinstance(w, float):
        if w <= 0.5:
            if w in (0.0, 0.5):
                return (lambda rng: sample_even_subcritical(g, w, None, rng)), None
            src = make_rc_source(RCSpec.uniform(g, 2 * w), backend)
            return (lambda rng: sample_even_subcritical(g, w, src, rng)), src
        w = EvenWeights.uniform(g, w)
    src = make_rc_source(w.rc_spec, backend)
    return (lambda rng: sample_even_general(g, w, src, rng)), src


def sample_even(g: Graph, p, n: int, rng: np.random.Generator, backend: str = "cftp") -> list[EdgeSet]:
    """``n`` independent draws from the even-subgraph law at ``p`` (scalar, list or EvenWeights)."""
    draw, _ = even_sampler(g, p, backend)
    return [draw(rng) for _ in range(n)]
