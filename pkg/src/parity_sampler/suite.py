"""Verification runs shared by the CLI and the acceptance tests.

Each function returns plain records (dicts) so the caller decides on
thresholds and output format.
"""
from __future__ import annotations

import itertools
from typing import Iterable, Sequence

import numpy as np

from . import oracle
from .corpus import SMALL_CORPUS, named_graph
from .even import EvenWeights, even_sampler
from .graph import EdgeSet, Graph, component_labels, odd_vertex_set
from .rc import CftpState, CoalescenceError, RCSpec, cftp_sample, depth_histogram

EXACT_TOL = 1e-12


def corpus_graphs(names: Iterable[str] | None = None) -> dict[str, Graph]:
    names = list(SMALL_CORPUS) if names is None else list(names)
    return {name: named_graph(name) for name in names}


def mixed_weights(g: Graph, lo: float = 0.2, hi: float = 0.8) -> EvenWeights:
    """Alternating probabilities lo, hi, lo, ... along the edge order."""
    return EvenWeights(g, tuple(lo if i % 2 == 0 else hi for i in range(g.n_edges)))


def high_temp_records(name: str, g: Graph, betas: Sequence[float]) -> list[dict]:
    out = []
    for beta in betas:
        for x, y in itertools.combinations(range(g.n_vertices), 2):
            c = oracle.verify_high_temperature(g, beta, x, y)
            out.append({"check": "high-temp", "graph": name, "beta": beta, "x": x, "y": y,
                        "lhs": c.lhs, "rhs": c.rhs, "deviation": c.diff})
    return out


def cyclic_records(name: str, g: Graph, ps: Sequence[float]) -> list[dict]:
    out = []
    for p in ps:
        for e in range(g.n_edges):
            c = oracle.verify_cyclic_identity(g, p, e)
            out.append({"check": "cyclic", "graph": name, "p": p, "edge": e,
                        "lhs": c.lhs, "rhs": c.rhs, "deviation": c.diff})
    return out


def converse_records(name: str, g: Graph, ps: Sequence[float]) -> list[dict]:
    return [{"check": "converse", "graph": name, "p": p,
             "deviation": oracle.verify_converse_pushforward(g, p)} for p in ps]


def forward_records(name: str, g: Graph, ps: Sequence[float], mixed: bool = True) -> list[dict]:
    out = [{"check": "forward", "graph": name, "p": p,
            "deviation": oracle.verify_coupling_forward(g, p)} for p in ps]
    if mixed and g.n_edges:
        w = mixed_weights(g)
        out.append({"check": "forward", "graph": name, "p": list(w.per_edge_p),
                    "deviation": oracle.verify_coupling_forward(g, w)})
    return out


def exact_identity_suite(graphs: dict[str, Graph] | None = None,
                         betas=(0.2, 0.5, 1.0), cyclic_ps=(0.1, 0.25, 0.4, 0.5),
                         converse_ps=(0.1, 0.3, 0.45), forward_ps=(0.2, 0.7),
                         only: str | None = None) -> list[dict]:
    graphs = corpus_graphs() if graphs is None else graphs
    recs: list[dict] = []
    for name, g in graphs.items():
        if only in (None, "high-temp"):
            recs += high_temp_records(name, g, betas)
        if only in (None, "cyclic"):
            recs += cyclic_records(name, g, cyclic_ps)
        if only in (None, "converse"):
            recs += converse_records(name, g, converse_ps)
        if only in (None, "forward"):
            recs += forward_records(name, g, forward_ps)
    return recs


def valid_w_sets(g: Graph) -> list[frozenset[int]]:
    """Every nonempty W for which each component of g holds an even number of W vertices."""
    labels = component_labels(g)
    out = []
    for size in range(2, g.n_vertices + 1, 2):
        for w in itertools.combinations(range(g.n_vertices), size):
            counts = np.bincount(labels[list(w)], minlength=int(labels.max()) + 1)
            if not np.any(counts % 2):
                out.append(frozenset(w))
    return out


def bracket_suite(graphs: dict[str, Graph] | None = None, trajectories: int = 1000,
                  seed: int = 0, max_edges: int = 6, rs=(0.3, 0.6, 0.9)) -> list[dict]:
    """Replay CFTP runs and compare every bracket met on the way with brute force.

    For each graph and each conditioning choice (none, then every valid W),
    ``trajectories`` runs are drawn with r cycling through ``rs``. Every pass
    of every run (one per start depth) is replayed step by step; each
    distinct (lower, upper, edge) triple is checked once.
    """
    graphs = corpus_graphs() if graphs is None else graphs
    rng = np.random.default_rng(seed)
    recs = []
    for name, g in graphs.items():
        if g.n_edges > max_edges:
            continue
        for w in [None] + valid_w_sets(g):
            specs = [RCSpec.uniform(g, r, w) for r in rs]
            tables = [oracle.conditional_table(s) for s in specs]
            seen: set = set()
            checked = violations = singleton_mismatch = loose = 0
            for t in range(trajectories):
                k = t % len(rs)
                spec, table = specs[k], tables[k]
                state = CftpState(spec)
                res = cftp_sample(spec, rng, state=state)
                depth = 1
                while depth <= res.depth:
                    for lo, up, e, a, b in state.trace(depth):
                        key = (k, lo.tobytes(), up.tobytes(), e)
                        if key in seen:
                            continue
                        seen.add(key)
                        L, U = EdgeSet.from_array(lo), EdgeSet.from_array(up)
                        mn, mx = oracle.minmax_conditional_oracle(spec, L, U, e, table)
                        checked += 1
                        if a > mn + EXACT_TOL or b < mx - EXACT_TOL or a > b:
                            violations += 1
                        single = ((L.bits ^ U.bits) & ~(1 << e)) == 0
                        if single and not (a == b == mn == mx):
                            singleton_mismatch += 1
                        if a < mn - EXACT_TOL or b > mx + EXACT_TOL:
                            loose += 1
                    depth *= 2
                if not np.array_equal(state.lower, res.config.to_array()):
                    violations += 1
            recs.append({"check": "bracket", "graph": name, "W": sorted(w or ()),
                         "trajectories": trajectories, "sandwiches": checked,
                         "violations": violations, "singleton_mismatch": singleton_mismatch,
                         "loose_brackets": loose})
    return recs


def cftp_suite(g: Graph, r: float, w: Iterable[int] | None, n: int, seed: int,
               name: str = "") -> dict:
    """Draw ``n`` CFTP samples and compare with the enumerated (conditioned) law."""
    spec = RCSpec.uniform(g, r, None if w is None else frozenset(w))
    rng = np.random.default_rng(seed)
    samples, depths, failed = [], [], 0
    for _ in range(n):
        try:
            res = cftp_sample(spec, rng)
        except CoalescenceError:
            failed += 1
            continue
        samples.append(res.config)
        depths.append(res.depth)
    fit = oracle.tv_distance(samples, oracle.enumerate_rc(spec))
    return {"check": "cftp", "graph": name, "r": r, "W": sorted(w or ()), "n": n,
            "coalesced": len(samples), "failed": failed, "tv": fit.tv, "chi2": fit.chi2,
            "pvalue": fit.pvalue, "depth_histogram": {str(k): v for k, v in depth_histogram(depths).items()}}


def sampler_suite(g: Graph, p, n: int, seed: int, backend: str = "cftp", name: str = "") -> dict:
    """Full even-subgraph pipeline against the enumerated law; every draw is checked for evenness."""
    draw, _ = even_sampler(g, p, backend)
    rng = np.random.default_rng(seed)
    samples = []
    odd = 0
    for _ in range(n):
        s = draw(rng)
        if odd_vertex_set(g, s):
            odd += 1
        samples.append(s)
    fit = oracle.tv_distance(samples, oracle.enumerate_even(g, p))
    p_out = list(p.per_edge_p) if isinstance(p, EvenWeights) else (p if np.isscalar(p) else list(p))
    return {"check": "sampler", "graph": name, "p": p_out, "n": n,
            "backend": backend, "odd_samples": odd, "tv": fit.tv, "chi2": fit.chi2, "pvalue": fit.pvalue}
