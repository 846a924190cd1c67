"""Brute-force laws on small graphs and the identities checked against them.

Everything here enumerates all 2^|E| edge configurations (or 2^|V| spin
configurations), so it is only usable up to the enumeration cap. The
functions deliberately avoid the samplers' shortcuts: weights come straight
from the defining products, cluster counts from a fresh union-find per
configuration.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import stats

from . import _kernels as K
from .graph import EdgeSet, Graph
from .rc import RCSpec

DEFAULT_CAP = 22


class EnumerationCapError(ValueError):
    pass


def _check_cap(bits: int, cap: int | None):
    cap = DEFAULT_CAP if cap is None else cap
    if bits > cap:
        raise EnumerationCapError(f"2^{bits} configurations exceed the cap 2^{cap}")
    if cap > DEFAULT_CAP and bits > DEFAULT_CAP:
        warnings.warn(f"enumerating 2^{bits} configurations above the default cap", stacklevel=3)


def popcount(x: np.ndarray) -> np.ndarray:
    if hasattr(np, "bitwise_count"):
        return np.bitwise_count(x).astype(np.int64)
    x = x.astype(np.uint64)
    out = np.zeros(x.shape, np.int64)
    while np.any(x):
        out += (x & np.uint64(1)).astype(np.int64)
        x >>= np.uint64(1)
    return out


@dataclass(frozen=True)
class SpinConfig:
    """Spins in {-1, +1} per vertex; bit v of a mask set means +1."""

    spins: tuple[int, ...]

    @classmethod
    def from_mask(cls, mask: int, n: int) -> SpinConfig:
        return cls(tuple(1 if (mask >> v) & 1 else -1 for v in range(n)))

    def mask(self) -> int:
        return sum(1 << v for v, s in enumerate(self.spins) if s == 1)


@dataclass(frozen=True)
class Distribution:
    """Exact finite law: configurations as integer masks with probabilities.

    ``kind`` is "edges" (bit i = edge i open) or "spins" (bit v = +1).
    ``normalizer`` is the partition function of the defining weights.
    """

    configs: np.ndarray
    probs: np.ndarray
    normalizer: float
    n_bits: int
    kind: str = "edges"

    @cached_property
    def _index(self) -> dict[int, float]:
        return {int(c): float(p) for c, p in zip(self.configs, self.probs)}

    def prob(self, config) -> float:
        key = config.bits if isinstance(config, EdgeSet) else int(config)
        return self._index.get(key, 0.0)

    def as_dict(self) -> dict[int, float]:
        return dict(self._index)

    def total(self) -> float:
        return math.fsum(self.probs)

    def marginal(self, bit: int) -> float:
        sel = (self.configs >> bit) & 1 == 1
        return math.fsum(self.probs[sel])

    def expect(self, values: np.ndarray) -> float:
        return math.fsum(self.probs * values)

    def to_csv(self) -> str:
        width = max(1, (self.n_bits + 3) // 4)
        lines = ["config,probability"]
        for c, p in zip(self.configs, self.probs):
            lines.append(f"{int(c):0{width}x},{float(p)!r}")
        return "\n".join(lines) + "\n"


def _normalize(configs: np.ndarray, weights: np.ndarray, n_bits: int, kind: str,
               scale: float = 1.0) -> Distribution:
    keep = weights > 0
    configs = configs[keep]
    weights = weights[keep]
    z = math.fsum(weights)
    if z <= 0:
        raise ValueError("empty support")
    return Distribution(configs, weights / z, z * scale, n_bits, kind)


def _masks(n_bits: int) -> np.ndarray:
    return np.arange(1 << n_bits, dtype=np.int64)


def _bits(masks: np.ndarray, i: int) -> np.ndarray:
    return ((masks >> i) & 1).astype(bool)


def _product_weights(masks: np.ndarray, probs: Sequence[float]) -> np.ndarray:
    w = np.ones(masks.shape, np.float64)
    for i, p in enumerate(probs):
        w *= np.where(_bits(masks, i), p, 1.0 - p)
    return w


def even_mask(g: Graph, masks: np.ndarray) -> np.ndarray:
    """Boolean array: is each edge mask an even set?"""
    ok = np.ones(masks.shape, bool)
    inc = [0] * g.n_vertices
    for i, (u, v) in enumerate(g.edges):
        if u != v:
            inc[u] |= 1 << i
            inc[v] |= 1 << i
    for v in range(g.n_vertices):
        ok &= popcount(masks & inc[v]) % 2 == 0
    return ok


def boundary_is(g: Graph, masks: np.ndarray, vertices: Iterable[int]) -> np.ndarray:
    """Boolean array: is the odd-degree set of each mask exactly ``vertices``?"""
    target = set(vertices)
    ok = np.ones(masks.shape, bool)
    inc = [0] * g.n_vertices
    for i, (u, v) in enumerate(g.edges):
        if u != v:
            inc[u] |= 1 << i
            inc[v] |= 1 << i
    for v in range(g.n_vertices):
        want = 1 if v in target else 0
        ok &= popcount(masks & inc[v]) % 2 == want
    return ok


def _edge_probs(g: Graph, weights) -> tuple[float, ...]:
    from .even import EvenWeights
    if isinstance(weights, EvenWeights):
        return weights.per_edge_p
    if isinstance(weights, (int, float)):
        return (float(weights),) * g.n_edges
    return tuple(float(x) for x in weights)


def enumerate_even(g: Graph, weights, cap: int | None = None) -> Distribution:
    """Exact even-subgraph law: weight prod p_e over F times prod (1 - p_e) off F."""
    _check_cap(g.n_edges, cap)
    probs = _edge_probs(g, weights)
    masks = _masks(g.n_edges)
    masks = masks[even_mask(g, masks)]
    return _normalize(masks, _product_weights(masks, probs), g.n_edges, "edges")


def cluster_counts(g: Graph, masks: np.ndarray, w: Iterable[int] = ()) -> tuple[np.ndarray, np.ndarray]:
    """(number of open clusters, number of W-odd clusters) for every mask."""
    wpar = np.zeros(g.n_vertices, np.uint8)
    for v in w:
        wpar[v] = 1
    return K.cluster_stats_all(g.n_vertices, g.eu, g.ev, wpar, masks)


def rc_weights(spec: RCSpec, masks: np.ndarray) -> np.ndarray:
    """Unnormalized conditioned random-cluster weights (zero off the support)."""
    k, odd = cluster_counts(spec.graph, masks, spec.w or ())
    w = _product_weights(masks, spec.r) * np.exp2(k.astype(np.float64))
    return np.where(odd == 0, w, 0.0)


def enumerate_rc(spec: RCSpec, cap: int | None = None) -> Distribution:
    """Exact random-cluster law at q = 2, restricted to W-even configurations."""
    g = spec.graph
    _check_cap(g.n_edges, cap)
    masks = _masks(g.n_edges)
    return _normalize(masks, rc_weights(spec, masks), g.n_edges, "edges")


def _spin_energy(g: Graph, masks: np.ndarray) -> np.ndarray:
    total = np.zeros(masks.shape, np.float64)
    for u, v in g.edges:
        same = ((masks >> u) ^ (masks >> v)) & 1 == 0
        total += np.where(same, 1.0, -1.0)
    return total


def enumerate_ising(g: Graph, beta: float, cap: int | None = None) -> Distribution:
    """Exact Ising law exp(beta * sum over edges of s_x s_y), free boundary."""
    _check_cap(g.n_vertices, cap)
    masks = _masks(g.n_vertices)
    h = beta * _spin_energy(g, masks)
    shift = float(h.max()) if h.size else 0.0
    return _normalize(masks, np.exp(h - shift), g.n_vertices, "spins", scale=math.exp(shift))


def spin_values(dist: Distribution, v: int) -> np.ndarray:
    return np.where((dist.configs >> v) & 1 == 1, 1.0, -1.0)


@dataclass(frozen=True)
class Check:
    lhs: float
    rhs: float
    diff: float


def high_temp_p(beta: float) -> float:
    """Edge probability paired with inverse temperature beta: 2p = 1 - exp(-2 beta)."""
    return -0.5 * math.expm1(-2.0 * beta)


def verify_high_temperature(g: Graph, beta: float, x: int, y: int) -> Check:
    """Two-point function against the ratio of product-measure masses of
    configurations with odd vertices exactly {x, y} versus none."""
    if x == y:
        raise ValueError("x and y must differ")
    ising = enumerate_ising(g, beta)
    lhs = ising.expect(spin_values(ising, x) * spin_values(ising, y))
    p = high_temp_p(beta)
    _check_cap(g.n_edges, None)
    masks = _masks(g.n_edges)
    w = _product_weights(masks, (p,) * g.n_edges)
    num = math.fsum(w[boundary_is(g, masks, (x, y))])
    den = math.fsum(w[boundary_is(g, masks, ())])
    rhs = num / den
    return Check(lhs, rhs, abs(lhs - rhs))


def is_cyclic_mask(g: Graph, masks: np.ndarray, e: int) -> np.ndarray:
    """Is edge ``e`` open and on a cycle of the open graph, for every mask?"""
    k, _ = cluster_counts(g, masks)
    k_without, _ = cluster_counts(g, masks & ~(1 << e))
    return _bits(masks, e) & (k == k_without)


def verify_cyclic_identity(g: Graph, p: float, e: int) -> Check:
    """P(e open) under the even law at p versus half the random-cluster
    probability (r = 2p) that e is open and not a bridge."""
    if not 0.0 <= p <= 0.5:
        raise ValueError("p must lie in [0, 1/2]")
    lhs = enumerate_even(g, p).marginal(e)
    rc = enumerate_rc(RCSpec.uniform(g, 2 * p))
    rhs = 0.5 * rc.expect(is_cyclic_mask(g, rc.configs, e).astype(np.float64))
    return Check(lhs, rhs, abs(lhs - rhs))


def _full_table(dist: Distribution) -> np.ndarray:
    out = np.zeros(1 << dist.n_bits, np.float64)
    out[dist.configs] = dist.probs
    return out


def pushforward_converse(g: Graph, p: float) -> np.ndarray:
    """Exact law of F plus independent extra edges (prob p/(1-p)) with F even at p."""
    even = enumerate_even(g, p)
    q = 1.0 if p == 0.5 else p / (1.0 - p)
    masks = _masks(g.n_edges)
    out = np.zeros(masks.shape, np.float64)
    sizes = popcount(masks)
    ne = g.n_edges
    for f, pf in zip(even.configs, even.probs):
        sup = (masks & f) == f
        extra = sizes - int(f).bit_count()
        # extra edges added, the rest of E minus F left out
        w = np.power(q, extra) * np.power(1.0 - q, ne - sizes)
        out += np.where(sup, pf * w, 0.0)
    return out


def verify_converse_pushforward(g: Graph, p: float) -> float:
    """Max |difference| between the pushforward and the random-cluster law at 2p."""
    if not 0.0 <= p < 0.5:
        raise ValueError("p must lie in [0, 1/2)")
    push = pushforward_converse(g, p)
    target = _full_table(enumerate_rc(RCSpec.uniform(g, 2 * p)))
    return float(np.max(np.abs(push - target)))


def pushforward_forward(g: Graph, weights) -> np.ndarray:
    """Exact law of the coupling output A + gamma + P(omega).

    Sums over omega in the conditioned random-cluster support and over every
    uniform even subset gamma of omega, with the deterministic path family.
    """
    from .even import EvenWeights, pair_paths
    w = weights if isinstance(weights, EvenWeights) else EvenWeights(g, _edge_probs(g, weights))
    rc = enumerate_rc(w.rc_spec)
    out = np.zeros(1 << g.n_edges, np.float64)
    indptr, nbr, nbr_e = g.csr
    zero_target = np.zeros(g.n_vertices, np.uint8)
    buf = np.zeros(g.n_edges, np.uint8)
    for om, pom in zip(rc.configs, rc.probs):
        omega = EdgeSet(int(om), g.n_edges)
        shift = w.A.bits
        if w.W:
            shift ^= pair_paths(g, omega, w.W).union(g.n_edges).bits
        state = omega.to_array()
        forest = K.spanning_forest_mask(g.n_vertices, g.eu, g.ev, state)
        chords = [i for i in range(g.n_edges) if state[i] and not forest[i]]
        weight = pom / (1 << len(chords))
        for pattern in range(1 << len(chords)):
            coins = np.zeros(g.n_edges, np.uint8)
            for j, c in enumerate(chords):
                coins[c] = (pattern >> j) & 1
            K.even_from_config(g.n_vertices, g.eu, g.ev, indptr, nbr, nbr_e, state,
                               zero_target.copy(), coins, buf)
            gamma = EdgeSet.from_array(buf).bits
            out[gamma ^ shift] += weight
    return out


def verify_coupling_forward(g: Graph, weights) -> float:
    """Max |difference| between the coupling pushforward and the enumerated even law."""
    push = pushforward_forward(g, weights)
    target = _full_table(enumerate_even(g, _edge_probs(g, weights)))
    return float(np.max(np.abs(push - target)))


# --- heat-bath conditionals by brute force -------------------------------------

def conditional_table(spec: RCSpec, cap: int = 16) -> np.ndarray:
    """table[e, mask]: heat-bath probability that e is open given mask off e.

    Inside the support it is the ratio of the weights with e open and
    closed (the second is zero when closing e leaves the support). When opening e
    still leaves the configuration outside the support, it is the largest
    such ratio over supported configurations above (a superset maximum).
    """
    g = spec.graph
    _check_cap(g.n_edges, cap)
    ne = g.n_edges
    masks = _masks(ne)
    k, odd = cluster_counts(g, masks, spec.w or ())
    # factors of the other edges cancel in the ratio; keeping only e's own
    # factor leaves the ratio defined when some other r_f = 1
    w = np.where(odd == 0, np.exp2(k.astype(np.float64)), 0.0)
    table = np.empty((ne, masks.size), np.float64)
    for e in range(ne):
        bit = 1 << e
        w1 = spec.r[e] * w[masks | bit]
        w0 = (1.0 - spec.r[e]) * w[masks & ~bit]
        with np.errstate(invalid="ignore", divide="ignore"):
            own = np.where(w1 > 0, w1 / (w1 + w0), -np.inf)
        sup = own.copy()
        for f in range(ne):
            if f == e:
                continue
            fb = 1 << f
            low = (masks & fb) == 0
            sup[low] = np.maximum(sup[low], sup[masks[low] | fb])
        table[e] = np.where(w1 > 0, own, sup)
    return table


def minmax_conditional_oracle(spec: RCSpec, lower: EdgeSet, upper: EdgeSet, e: int,
                              table: np.ndarray | None = None) -> tuple[float, float]:
    """Exact (min, max) of the heat-bath conditional over the sandwich."""
    if not lower <= upper:
        raise ValueError("sandwich violation")
    free = [i for i in (upper - lower) if i != e]
    _check_cap(len(free), None)
    if table is None:
        table = conditional_table(spec)
    base = lower.bits & ~(1 << e)
    vals = []
    for pattern in range(1 << len(free)):
        m = base
        for j, i in enumerate(free):
            if (pattern >> j) & 1:
                m |= 1 << i
        vals.append(table[e, m])
    return float(min(vals)), float(max(vals))


def gibbs_kernel_matrix(spec: RCSpec, table: np.ndarray | None = None) -> np.ndarray:
    """Transition matrix of one random-edge heat-bath step on all configurations."""
    if table is None:
        table = conditional_table(spec)
    ne = spec.graph.n_edges
    size = 1 << ne
    P = np.zeros((size, size))
    rows = np.arange(size)
    for e in range(ne):
        bit = 1 << e
        c = table[e]
        np.add.at(P, (rows, rows | bit), c / ne)
        np.add.at(P, (rows, rows & ~bit), (1.0 - c) / ne)
    return P


# --- comparing laws -------------------------------------------------------------

@dataclass(frozen=True)
class FitReport:
    tv: float
    chi2: float
    pvalue: float
    n: int
    outside_support: int


def _counts(samples) -> dict[int, int]:
    if isinstance(samples, Mapping):
        return {int(k): int(v) for k, v in samples.items()}
    out: dict[int, int] = {}
    for s in samples:
        key = s.bits if isinstance(s, EdgeSet) else int(s)
        out[key] = out.get(key, 0) + 1
    return out


def tv_distance(a, b: Distribution):
    """Total variation distance to ``b``.

    ``a`` is a Distribution (returns a float) or empirical data: a mapping
    config -> count or an iterable of configurations (returns a FitReport
    with the chi-square statistic and p-value as well).
    """
    if isinstance(a, Distribution):
        da, db = a.as_dict(), b.as_dict()
        keys = set(da) | set(db)
        return 0.5 * math.fsum(abs(da.get(k, 0.0) - db.get(k, 0.0)) for k in keys)
    return empirical_fit(_counts(a), b)


def empirical_fit(counts: Mapping[int, int], dist: Distribution, min_expected: float = 5.0) -> FitReport:
    n = sum(counts.values())
    if n == 0:
        raise ValueError("no samples")
    db = dist.as_dict()
    keys = set(db) | set(counts)
    tv = 0.5 * math.fsum(abs(counts.get(k, 0) / n - db.get(k, 0.0)) for k in keys)
    outside = sum(c for k, c in counts.items() if k not in db)
    if outside:
        return FitReport(tv, math.inf, 0.0, n, outside)
    # pool cells with small expected counts so the chi-square approximation holds
    obs, exp = [], []
    pool_o, pool_e = 0, 0.0
    for k in sorted(db, key=lambda k: db[k]):
        e = db[k] * n
        if e < min_expected:
            pool_o += counts.get(k, 0)
            pool_e += e
        else:
            obs.append(counts.get(k, 0))
            exp.append(e)
    if pool_e > 0:
        obs.append(pool_o)
        exp.append(pool_e)
    if len(obs) < 2:
        return FitReport(tv, 0.0, 1.0, n, 0)
    exp_arr = np.asarray(exp)
    exp_arr *= n / exp_arr.sum()
    chi2, pval = stats.chisquare(np.asarray(obs, np.float64), exp_arr)
    return FitReport(tv, float(chi2), float(pval), n, 0)


class ExactSource:
    """Draws configurations from an enumerated Distribution by inverse CDF."""

    def __init__(self, dist: Distribution):
        self.dist = dist
        self._cdf = np.cumsum(dist.probs)
        self._cdf[-1] = 1.0

    def __call__(self, rng: np.random.Generator) -> EdgeSet:
        i = int(np.searchsorted(self._cdf, rng.random(), side="right"))
        return EdgeSet(int(self.dist.configs[min(i, len(self._cdf) - 1)]), self.dist.n_bits)
