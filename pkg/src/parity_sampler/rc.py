"""q=2 random-cluster measures, optionally conditioned on W-evenness, and an
exact sampler by coupling from the past with a bounding pair.

The conditioned measure lives on the W-even configurations: every open
cluster holds an even number of vertices from W. That set is increasing, so
the all-open configuration always qualifies provided every component of the
graph is W-even. The single-edge heat-bath rule is extended off the support
by taking the largest conditional among supported configurations lying
above the current one; the bounding pair brackets that rule over every
configuration it encloses.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator

import numpy as np

from . import _kernels as K
from .graph import EdgeSet, Graph, GraphError, component_labels

DEFAULT_MAX_UPDATES = 2**30


class CoalescenceError(RuntimeError):
    """The update budget ran out before the bounding pair met."""


@dataclass(frozen=True)
class RCSpec:
    """Random-cluster weights r_e (q = 2) with an optional conditioning set W.

    ``r_e = 0`` is accepted only without conditioning (the edge is then
    always closed); the conditioned chain needs every r_e > 0.
    """

    graph: Graph
    r: tuple[float, ...]
    w: frozenset[int] | None = None

    def __post_init__(self):
        g = self.graph
        if len(self.r) != g.n_edges:
            raise GraphError(f"expected {g.n_edges} edge weights, got {len(self.r)}")
        for i, x in enumerate(self.r):
            if not 0.0 <= x <= 1.0 or (x == 0.0 and self.w):
                raise ValueError(f"weight r[{i}] = {x} outside the admissible range")
        if self.w is not None:
            object.__setattr__(self, "w", frozenset(int(v) for v in self.w))
            if any(not 0 <= v < g.n_vertices for v in self.w):
                raise GraphError("W contains a vertex outside the graph")
            if len(self.w) % 2:
                raise ValueError("|W| must be even")
            if not self.all_open_supported():
                raise ValueError("some component of the graph holds an odd number of W vertices")

    @classmethod
    def uniform(cls, graph: Graph, r: float, w: Iterable[int] | None = None) -> RCSpec:
        return cls(graph, (float(r),) * graph.n_edges, None if w is None else frozenset(w))

    @property
    def has_w(self) -> bool:
        return bool(self.w)

    @cached_property
    def r_array(self) -> np.ndarray:
        return np.asarray(self.r, dtype=np.float64)

    @cached_property
    def wpar(self) -> np.ndarray:
        out = np.zeros(self.graph.n_vertices, np.uint8)
        for v in self.w or ():
            out[v] = 1
        return out

    def all_open_supported(self) -> bool:
        labels = component_labels(self.graph)
        counts = np.bincount(labels[self.wpar.astype(bool)], minlength=labels.max(initial=-1) + 1)
        return bool(np.all(counts % 2 == 0))

    @cached_property
    def _bridge_data(self) -> tuple[np.ndarray, np.ndarray]:
        """Bridges of the whole graph, and whether the eu-side of each holds odd W."""
        g = self.graph
        ne = g.n_edges
        bridge = np.zeros(ne, np.uint8)
        odd = np.zeros(ne, np.uint8)
        if not self.has_w or ne == 0:
            return bridge, odd
        indptr, nbr, nbr_e = g.csr
        bridge = K.bridge_flags(g.n_vertices, g.eu, g.ev, indptr, nbr, nbr_e, np.ones(ne, np.uint8))
        parent = np.empty(g.n_vertices, np.int64)
        oddc = np.empty(g.n_vertices, np.int64)
        full = np.ones(ne, np.uint8)
        for e in np.flatnonzero(bridge):
            K.w_status(g.n_vertices, g.eu, g.ev, full, e, self.wpar, parent, oddc)
            odd[e] = oddc[K.uf_find(parent, g.eu[e])] & 1
        return bridge, odd

    @cached_property
    def kernel_args(self) -> tuple:
        """Positional arguments shared by the CFTP kernels."""
        g = self.graph
        indptr, nbr, nbr_e = g.csr
        bridge, odd = self._bridge_data
        return (g.n_vertices, g.eu, g.ev, indptr, nbr, nbr_e, self.r_array,
                self.has_w, self.wpar, bridge, odd)

    def describe(self) -> dict:
        rs = sorted(set(self.r))
        return {"r": rs[0] if len(rs) == 1 else list(self.r), "W": sorted(self.w or ())}


class _Workspace:
    def __init__(self, n: int):
        self.mark = np.full(n, -1, np.int64)
        self.stamp = np.zeros(1, np.int64)
        self.qa = np.empty(n, np.int64)
        self.qb = np.empty(n, np.int64)
        self.parent = np.empty(n, np.int64)
        self.oddc = np.empty(n, np.int64)

    def tail(self):
        return self.mark, self.stamp, self.qa, self.qb, self.parent, self.oddc


def w_even_support(spec: RCSpec, omega: EdgeSet) -> bool:
    """True iff every open cluster (isolated vertices included) is W-even."""
    if not spec.has_w:
        return True
    labels = component_labels(spec.graph, omega)
    counts = np.bincount(labels[spec.wpar.astype(bool)], minlength=int(labels.max()) + 1)
    return bool(np.all(counts % 2 == 0))


def _check_edge(spec: RCSpec, e: int):
    if not 0 <= e < spec.graph.n_edges:
        raise IndexError(f"edge {e} out of range")


def heat_bath_conditional(spec: RCSpec, xi: EdgeSet, e: int) -> float:
    """Probability that ``e`` is open given ``xi`` off ``e`` (extended off the support)."""
    _check_edge(spec, e)
    n, eu, ev, indptr, nbr, nbr_e, r, has_w, wpar, bridge, odd = spec.kernel_args
    ws = _Workspace(n)
    val, _ = K.conditional(n, eu, ev, indptr, nbr, nbr_e, spec.graph.state(xi), e, r,
                           has_w, wpar, bridge, odd, *ws.tail())
    return float(val)


def gibbs_step(spec: RCSpec, xi: EdgeSet, e: int, u: float) -> EdgeSet:
    """Single-edge heat-bath update: ``e`` opens iff ``u`` <= the conditional."""
    if not 0.0 <= u <= 1.0:
        raise ValueError("u must lie in [0, 1]")
    bit = 1 << e
    if u <= heat_bath_conditional(spec, xi, e):
        return EdgeSet(xi.bits | bit, xi.size)
    return EdgeSet(xi.bits & ~bit, xi.size)


def alpha_beta(spec: RCSpec, lower: EdgeSet, upper: EdgeSet, e: int) -> tuple[float, float]:
    """Bracket of the conditional over every configuration between the bounds."""
    _check_edge(spec, e)
    if not lower <= upper:
        raise ValueError("sandwich violation: lower is not below upper")
    singleton = ((lower.bits ^ upper.bits) & ~(1 << e)) == 0
    n, eu, ev, indptr, nbr, nbr_e, r, has_w, wpar, bridge, odd = spec.kernel_args
    ws = _Workspace(n)
    g = spec.graph
    a, b = K.alpha_beta(n, eu, ev, indptr, nbr, nbr_e, g.state(lower), g.state(upper), e,
                        singleton, r, has_w, wpar, bridge, odd, *ws.tail())
    return float(a), float(b)


# --- coupling from the past ---------------------------------------------------

@dataclass
class CftpState:
    """Bounding pair plus the randomness log shared by every start time.

    Entry ``k`` of the log drives the update from time -(k+1) to -k, so
    starting deeper only appends entries at the far end and the recent past
    is never redrawn.
    """

    spec: RCSpec
    log_e: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))
    log_u: np.ndarray = field(default_factory=lambda: np.empty(0, np.float64))
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        ne = self.spec.graph.n_edges
        if self.lower is None:
            self.lower = np.zeros(ne, np.uint8)
        if self.upper is None:
            self.upper = np.ones(ne, np.uint8)

    def extend(self, rng: np.random.Generator, length: int) -> None:
        extra = length - self.log_e.shape[0]
        if extra <= 0:
            return
        ne = self.spec.graph.n_edges
        new_e = rng.integers(0, ne, size=extra, dtype=np.int64)
        # uniforms on (0, 1]: a zero conditional never opens an edge
        new_u = 1.0 - rng.random(extra)
        self.log_e = np.concatenate([self.log_e, new_e])
        self.log_u = np.concatenate([self.log_u, new_u])

    def run_from(self, depth: int) -> int:
        """Run both bounds from time -depth to 0; returns how many edges still differ."""
        if depth > self.log_e.shape[0]:
            raise ValueError("log shorter than the requested depth")
        return int(K.sandwich_pass(*self.spec.kernel_args, self.log_e, self.log_u, depth,
                                   self.lower, self.upper))

    def coalesced(self) -> bool:
        return bool(np.array_equal(self.lower, self.upper))

    def trace(self, depth: int) -> Iterator[tuple[np.ndarray, np.ndarray, int, float, float]]:
        """Replay from -depth step by step, yielding (lower, upper, e, alpha, beta)
        before each update. Slow; meant for checking brackets."""
        spec = self.spec
        n, eu, ev, indptr, nbr, nbr_e, r, has_w, wpar, bridge, odd = spec.kernel_args
        ws = _Workspace(n)
        lo = np.zeros(spec.graph.n_edges, np.uint8)
        up = np.ones(spec.graph.n_edges, np.uint8)
        for k in range(depth - 1, -1, -1):
            e = int(self.log_e[k])
            u = self.log_u[k]
            diff = lo != up
            diff[e] = False
            a, b = K.alpha_beta(n, eu, ev, indptr, nbr, nbr_e, lo, up, e, not diff.any(), r,
                                has_w, wpar, bridge, odd, *ws.tail())
            yield lo.copy(), up.copy(), e, float(a), float(b)
            lo[e] = 1 if u <= a else 0
            up[e] = 1 if u <= b else 0
            if lo[e] > up[e]:
                raise AssertionError("sandwich order broken")
        self.lower[:] = lo
        self.upper[:] = up


@dataclass(frozen=True)
class CftpResult:
    config: EdgeSet
    depth: int
    updates: int


def cftp_sample(spec: RCSpec, rng: np.random.Generator, max_updates: int = DEFAULT_MAX_UPDATES,
                state: CftpState | None = None) -> CftpResult:
    """Exact draw from the (conditioned) random-cluster measure.

    Start times -1, -2, -4, ... share one log; the first start from which the
    bounding pair meets at time 0 gives the sample and its depth.
    """
    g = spec.graph
    if g.n_edges == 0:
        return CftpResult(g.empty_set(), 0, 0)
    st = state if state is not None else CftpState(spec)
    depth = 1
    done = 0
    while True:
        st.extend(rng, depth)
        status, depth, updates = K.cftp_run(*spec.kernel_args, st.log_e, st.log_u, depth,
                                            max_updates - done, st.lower, st.upper)
        done += int(updates)
        if status == 0:
            return CftpResult(EdgeSet.from_array(st.lower), int(depth), done)
        if status == 2 or done >= max_updates:
            raise CoalescenceError(f"no coalescence within {max_updates} updates (last depth {depth})")
        # status 1: the log is too short for the next start time
        depth = int(depth)


class CftpSource:
    """Callable random-cluster source backed by CFTP; remembers depths drawn."""

    def __init__(self, spec: RCSpec, max_updates: int = DEFAULT_MAX_UPDATES):
        self.spec = spec
        self.max_updates = max_updates
        self.depths: list[int] = []

    def __call__(self, rng: np.random.Generator) -> EdgeSet:
        res = cftp_sample(self.spec, rng, self.max_updates)
        self.depths.append(res.depth)
        return res.config


def coalescence_record(graph_name: str, spec: RCSpec, depth: int, wall_time: float) -> str:
    """One JSON line describing a CFTP run."""
    d = spec.describe()
    return json.dumps({"graph": graph_name, "r": d["r"], "|W|": len(d["W"]), "T": int(depth),
                       "wall_time": round(float(wall_time), 6)}, sort_keys=True)


def timed_cftp(spec: RCSpec, rng: np.random.Generator, **kw) -> tuple[CftpResult, float]:
    t0 = time.perf_counter()
    res = cftp_sample(spec, rng, **kw)
    return res, time.perf_counter() - t0


def depth_histogram(depths: Iterable[int]) -> dict[int, int]:
    hist: dict[int, int] = {}
    for d in depths:
        hist[int(d)] = hist.get(int(d), 0) + 1
    return dict(sorted(hist.items()))
