"""Square-lattice boxes, planar duality and the lattice experiments.

Box geometry: vertices (x, y) with -m <= x <= m, -n <= y <= n; unit cells
are indexed by their lower-left corner. The dual vertex of a cell is the
cell itself; the unwired box has one extra dual vertex for the outer face.
The wired box identifies the boundary ring to a single vertex and drops the
ring edges (they would become self-loops), so its dual is just the grid of
2m x 2n cells. In both cases dual edge i crosses primal edge i.
"""
from __future__ import annotations

import csv
import io
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels as K
from .graph import EdgeSet, Graph, build_graph, odd_vertex_set
from .rc import RCSpec, cftp_sample

P_C = 1.0 / (2.0 + math.sqrt(2.0))
BETA_C = 0.5 * math.log(1.0 + math.sqrt(2.0))

CSV_FIELDS = ["run_id", "m", "n", "lattice", "p", "beta", "seed", "replicate", "open_density",
              "face_count", "max_face_area", "isolated_fraction", "cftp_depth", "wall_ms"]


def dual_beta(p: float) -> float:
    """Inverse temperature of the dual Ising model: (1-2p)/(1-p) = 1 - exp(-2 beta)."""
    if not 0.0 < p <= 0.5:
        raise ValueError(f"p = {p} must lie in (0, 1/2]")
    return 0.5 * math.log((1.0 - p) / p)


@dataclass(frozen=True)
class PlanarBox:
    m: int
    n: int
    wired: bool
    graph: Graph
    dual_graph: Graph
    dual_map: tuple[int, ...]
    coords: tuple[tuple[int, int] | None, ...]
    outer: int | None

    @property
    def n_cells(self) -> int:
        return 4 * self.m * self.n

    def cell_index(self, x: int, y: int) -> int:
        return (y + self.n) * (2 * self.m) + (x + self.m)


def build_box(m: int, n: int, wired: bool = False) -> PlanarBox:
    if m < 1 or n < 1:
        raise ValueError("box half-widths must be at least 1")
    W, H = 2 * m + 1, 2 * n + 1
    ncell_x, ncell_y = 2 * m, 2 * n

    def on_ring(x, y):
        return abs(x) == m or abs(y) == n

    vid: dict[tuple[int, int], int] = {}
    coords: list = []
    for y in range(-n, n + 1):
        for x in range(-m, m + 1):
            if wired and on_ring(x, y):
                continue
            vid[(x, y)] = len(coords)
            coords.append((x, y))
    boundary = None
    if wired:
        boundary = len(coords)
        coords.append(None)  # the identified boundary vertex
        for y in range(-n, n + 1):
            for x in range(-m, m + 1):
                if on_ring(x, y):
                    vid[(x, y)] = boundary

    def cell(x, y):
        if -m <= x < m and -n <= y < n:
            return (y + n) * ncell_x + (x + m)
        return None

    outer = None if wired else ncell_x * ncell_y
    edges, dual_edges = [], []

    def add(a, b, c1, c2):
        if wired and on_ring(*a) and on_ring(*b):
            return
        edges.append((vid[a], vid[b]))
        c1 = outer if c1 is None else c1
        c2 = outer if c2 is None else c2
        dual_edges.append((c1, c2))

    for y in range(-n, n + 1):
        for x in range(-m, m):
            add((x, y), (x + 1, y), cell(x, y - 1), cell(x, y))
    for y in range(-n, n):
        for x in range(-m, m + 1):
            add((x, y), (x, y + 1), cell(x - 1, y), cell(x, y))
    assert len(vid) == W * H
    n_dual = ncell_x * ncell_y + (0 if wired else 1)
    g = Graph(len(coords), tuple(edges), labels=tuple(coords),
              dual_map=tuple(range(len(edges))))
    dual = build_graph(n_dual, dual_edges)
    return PlanarBox(m, n, wired, g, dual, tuple(range(len(edges))), tuple(coords), outer)


def dual_config(box: PlanarBox, omega: EdgeSet) -> EdgeSet:
    """Dual edge open exactly when its primal edge is closed."""
    box.graph._own(omega)
    arr = 1 - omega.to_array()
    out = np.empty_like(arr)
    out[np.asarray(box.dual_map)] = arr
    return EdgeSet.from_array(out)


def primal_config(box: PlanarBox, omega_d: EdgeSet) -> EdgeSet:
    """Inverse of :func:`dual_config`."""
    box.dual_graph._own(omega_d)
    arr = omega_d.to_array()
    return EdgeSet.from_array(1 - arr[np.asarray(box.dual_map)])


def euler_characteristic(box: PlanarBox) -> int:
    """V - E + F of the embedding, with faces = dual vertices."""
    return box.graph.n_vertices - box.graph.n_edges + box.dual_graph.n_vertices


def _sign_edges(box: PlanarBox, sign: np.ndarray) -> np.ndarray:
    d = box.dual_graph
    dm = np.asarray(box.dual_map)
    return (sign[d.eu[dm]] != sign[d.ev[dm]]).astype(np.uint8)


def even_from_spins(box: PlanarBox, sigma) -> EdgeSet:
    """Primal edges whose dual endpoints carry opposite spins (always even)."""
    sigma = np.asarray(getattr(sigma, "spins", sigma))
    if sigma.shape != (box.dual_graph.n_vertices,):
        raise ValueError("one spin per dual vertex expected")
    return EdgeSet.from_array(_sign_edges(box, sigma))


def _dual_cluster_labels(box: PlanarBox, omega: EdgeSet) -> np.ndarray:
    d = box.dual_graph
    return K.component_labels(d.n_vertices, d.eu, d.ev, dual_config(box, omega).to_array())


def sample_even_lattice(box: PlanarBox, p: float, rng: np.random.Generator,
                        return_depth: bool = False):
    """Even subgraph at p <= 1/2 from a random-cluster draw at 2p.

    Each cluster of the dual of the complement gets a fair sign; the edges
    separating opposite signs form the sample.
    """
    if not 0.0 <= p <= 0.5:
        raise ValueError(f"p = {p} must lie in [0, 1/2]")
    g = box.graph
    depth = 0
    if p == 0.0:
        omega = g.empty_set()
    elif p == 0.5:
        omega = g.all_edges()
    else:
        res = cftp_sample(RCSpec.uniform(g, 2 * p), rng)
        omega, depth = res.config, res.depth
    labels = _dual_cluster_labels(box, omega)
    signs = rng.integers(0, 2, size=box.dual_graph.n_vertices, dtype=np.int8)
    out = EdgeSet.from_array(_sign_edges(box, signs[labels]))
    return (out, depth) if return_depth else out


@dataclass(frozen=True)
class FaceStats:
    face_count: int
    face_areas: tuple[int, ...]
    largest_face_area: int
    isolated_vertex_count: int
    open_cycle_count: int
    open_edges: int
    meta: dict | None = None

    def largest_fraction(self, total_area: int) -> float:
        return self.largest_face_area / total_area


def face_statistics(box: PlanarBox, even_set: EdgeSet, meta: dict | None = None) -> FaceStats:
    """Faces of (V, even_set) as clusters of the dual of its complement.

    Areas count unit cells; on the unwired box the face holding the outer
    dual vertex is the unbounded one and its area counts only cells inside
    the box. Areas of all faces add up to 4mn.
    """
    if odd_vertex_set(box.graph, even_set):
        raise ValueError("edge set is not even")
    labels = _dual_cluster_labels(box, even_set)
    k = int(labels.max()) + 1
    cells = labels[: box.n_cells]
    areas = np.bincount(cells, minlength=k)
    deg = np.zeros(box.graph.n_vertices, np.int64)
    arr = even_set.to_array().astype(bool)
    np.add.at(deg, box.graph.eu[arr], 1)
    np.add.at(deg, box.graph.ev[arr], 1)
    return FaceStats(
        face_count=k,
        face_areas=tuple(sorted((int(a) for a in areas), reverse=True)),
        largest_face_area=int(areas.max()),
        isolated_vertex_count=int(np.sum(deg == 0)),
        open_cycle_count=k - 1,
        open_edges=int(arr.sum()),
        meta=meta,
    )


# --- phase scan ------------------------------------------------------------------

def parse_p_grid(text: str) -> list[float]:
    """``start:stop:step`` (stop included within 1e-9) or a comma list."""
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        if step <= 0:
            raise ValueError("step must be positive")
        out = []
        i = 0
        while True:
            v = start + i * step
            if v > stop + 1e-9:
                break
            out.append(round(v, 12))
            i += 1
        return out
    return [float(x) for x in text.split(",") if x.strip()]


def parse_sizes(text: str) -> list[tuple[int, int]]:
    """``AxB`` cell counts per side (even numbers), e.g. 16x16 -> m = n = 8."""
    out = []
    for tok in text.split(","):
        a, b = (int(x) for x in tok.lower().split("x"))
        if a % 2 or b % 2 or a < 2 or b < 2:
            raise ValueError(f"box size {tok!r} needs even side lengths of at least 2")
        out.append((a // 2, b // 2))
    return out


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("PARITY_SAMPLER_THREADS", "1")))
    except ValueError:
        return 1


def replicate_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent PCG64 stream for one replicate, keyed by its position."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def _scan_one(box: PlanarBox, p: float, rng: np.random.Generator, timing: bool) -> dict:
    t0 = time.perf_counter()
    f, depth = sample_even_lattice(box, p, rng, return_depth=True)
    st = face_statistics(box, f)
    wall = (time.perf_counter() - t0) * 1000.0 if timing else 0.0
    return {
        "open_density": st.open_edges / box.graph.n_edges,
        "face_count": st.face_count,
        "max_face_area": st.largest_face_area,
        "isolated_fraction": st.isolated_vertex_count / box.graph.n_vertices,
        "cftp_depth": depth,
        "wall_ms": round(wall, 3),
    }


def phase_scan(sizes: Sequence[tuple[int, int]], p_grid: Sequence[float], replicates: int,
               seed: int, wired: bool = True, mark_pc: bool = False, timing: bool = False,
               threads: int | None = None) -> list[dict]:
    """One record per (size, p, replicate), in that nesting order.

    Replicate streams are keyed by (size index, p index, replicate) so the
    output does not depend on the thread count. Wall time is recorded only
    when ``timing`` is set, so untimed runs are reproducible byte for byte.
    """
    threads = thread_count() if threads is None else threads
    jobs = []
    for si, (m, n) in enumerate(sizes):
        box = build_box(m, n, wired=wired)
        for pi, p in enumerate(p_grid):
            for rep in range(replicates):
                jobs.append((si, pi, rep, box, p))

    def run(job):
        si, pi, rep, box, p = job
        return _scan_one(box, p, replicate_rng(seed, si, pi, rep), timing)

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(run, jobs))
    else:
        results = [run(j) for j in jobs]
    rows = []
    for run_id, ((si, pi, rep, box, p), res) in enumerate(zip(jobs, results)):
        row = {"run_id": run_id, "m": box.m, "n": box.n,
               "lattice": "square-wired" if wired else "square-free",
               "p": p, "beta": dual_beta(p) if p > 0 else math.inf,
               "seed": seed, "replicate": rep}
        row.update(res)
        if mark_pc:
            row["p_c"] = P_C
        rows.append(row)
    return rows


def rows_to_csv(rows: Sequence[dict], header_comment: str | None = None) -> str:
    buf = io.StringIO()
    if header_comment:
        for line in header_comment.splitlines():
            buf.write(f"# {line}\n")
    fields = list(CSV_FIELDS)
    if rows and "p_c" in rows[0]:
        fields.append("p_c")
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


# --- triangular rhombus -------------------------------------------------------------

def triangular_rhombus(n: int) -> Graph:
    """n x n rhombus of the triangular lattice; vertex (i, j) has index j*n + i.

    Edges join (i, j) to (i+1, j), (i, j+1) and, across each rhombic cell,
    (i+1, j) to (i, j+1). Swapping i and j maps the graph to itself while
    exchanging the column sides (i = 0, n-1) with the row sides.
    """
    if n < 1:
        raise ValueError("rhombus side must be at least 1")
    idx = lambda i, j: j * n + i  # noqa: E731
    edges = []
    for j in range(n):
        for i in range(n - 1):
            edges.append((idx(i, j), idx(i + 1, j)))
    for j in range(n - 1):
        for i in range(n):
            edges.append((idx(i, j), idx(i, j + 1)))
    for j in range(n - 1):
        for i in range(n - 1):
            edges.append((idx(i + 1, j), idx(i, j + 1)))
    labels = tuple((i, j) for j in range(n) for i in range(n))
    return Graph(n * n, tuple(edges), labels=labels)


def plus_crossing(g: Graph, n: int, plus: np.ndarray) -> bool:
    """Is there a path of + vertices from column i = 0 to column i = n-1?"""
    plus = plus.astype(bool)
    state = (plus[g.eu] & plus[g.ev]).astype(np.uint8)
    labels = K.component_labels(g.n_vertices, g.eu, g.ev, state)
    left = np.arange(n) * n
    right = left + (n - 1)
    a = set(labels[left[plus[left]]].tolist())
    return any(int(labels[v]) in a for v in right[plus[right]])


def ising_spins(g: Graph, beta: float, rng: np.random.Generator) -> tuple[np.ndarray, int]:
    """Exact Ising draw: random-cluster CFTP at r = 1 - exp(-2 beta), then a fair
    sign per cluster. Returns (True where +1, CFTP depth)."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    r = -math.expm1(-2.0 * beta)
    depth = 0
    if r == 0.0 or g.n_edges == 0:
        state = np.zeros(g.n_edges, np.uint8)
    else:
        res = cftp_sample(RCSpec.uniform(g, r), rng)
        state, depth = res.config.to_array(), res.depth
    labels = K.component_labels(g.n_vertices, g.eu, g.ev, state)
    signs = rng.integers(0, 2, size=g.n_vertices, dtype=np.int8)
    return signs[labels].astype(bool), depth


class CrossingEstimate(NamedTuple):
    estimate: float
    hits: int
    replicates: int
    stderr: float
    mean_depth: float


def rhombus_crossing(n: int, beta: float, replicates: int, rng: np.random.Generator) -> CrossingEstimate:
    """Fraction of Ising samples on the rhombus with a left-right + crossing."""
    g = triangular_rhombus(n)
    hits = 0
    depth_total = 0
    for _ in range(replicates):
        plus, depth = ising_spins(g, beta, rng)
        hits += plus_crossing(g, n, plus)
        depth_total += depth
    est = hits / replicates
    return CrossingEstimate(est, hits, replicates, math.sqrt(est * (1 - est) / replicates),
                            depth_total / replicates)
