import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from parity_sampler import corpus, oracle
from parity_sampler.even import (EvenWeights, PathFamily, even_sampler, pair_paths, rc_from_even,
                                 sample_even, sample_even_general, sample_even_subcritical,
                                 uniform_even)
from parity_sampler.graph import EdgeSet, build_graph, component_labels, odd_vertex_set
from parity_sampler.oracle import ExactSource, enumerate_even, enumerate_rc, tv_distance
from parity_sampler.rc import RCSpec

N = 100_000


def test_even_weights_derived_fields():
    g = corpus.path(3)
    w = EvenWeights(g, (0.8, 0.3))
    assert w.A == g.edge_set([0])
    assert w.r == pytest.approx((0.4, 0.6))
    assert w.W == {0, 1}
    with pytest.raises(ValueError):
        EvenWeights(g, (0.0, 0.3))
    with pytest.raises(Exception):
        EvenWeights(g, (0.3,))


def test_uniform_even_triangle_and_tree():
    rng = np.random.default_rng(1)
    tri = corpus.triangle()
    draws = [uniform_even(tri, None, rng) for _ in range(4000)]
    assert {d.bits for d in draws} == {0, 7}
    assert abs(np.mean([d.bits == 7 for d in draws]) - 0.5) < 0.03
    tree = corpus.path(5)
    assert all(uniform_even(tree, None, rng) == tree.empty_set() for _ in range(100))


def test_uniform_even_k4_chi_square():
    g = corpus.complete(4)
    rng = np.random.default_rng(2)
    fit = tv_distance([uniform_even(g, None, rng) for _ in range(N)], enumerate_even(g, 0.5))
    assert fit.outside_support == 0
    assert fit.tv < 0.01 and fit.pvalue > 1e-4


def test_uniform_even_stays_in_support():
    g = corpus.complete(5)
    rng = np.random.default_rng(3)
    for _ in range(300):
        support = EdgeSet.from_array(rng.integers(0, 2, g.n_edges))
        s = uniform_even(g, support, rng)
        assert s <= support and not odd_vertex_set(g, s)


def test_subcritical_endpoints():
    g = corpus.complete(4)
    rng = np.random.default_rng(4)
    assert sample_even_subcritical(g, 0.0, None, rng) == g.empty_set()
    draws = [sample_even_subcritical(g, 0.5, None, rng) for _ in range(200)]
    assert all(not odd_vertex_set(g, d) for d in draws)
    with pytest.raises(ValueError):
        sample_even_subcritical(g, 0.6, None, rng)


def test_triangle_p03_law():
    g = corpus.triangle()
    dist = enumerate_even(g, 0.3)
    assert dist.prob(g.all_edges()) == pytest.approx(0.027 / 0.37, abs=1e-12)
    assert dist.prob(g.all_edges()) == pytest.approx(0.07297, abs=1e-5)
    fit = tv_distance(sample_even(g, 0.3, N, np.random.default_rng(5)), dist)
    assert fit.tv < 0.01


def test_triangle_p07_law():
    g = corpus.triangle()
    dist = enumerate_even(g, 0.7)
    assert dist.prob(g.all_edges()) == pytest.approx(0.343 / 0.37, abs=1e-12)
    fit = tv_distance(sample_even(g, 0.7, N, np.random.default_rng(6)), dist)
    assert fit.tv < 0.01


def test_k4_mixed_weights_law():
    g = corpus.complete(4)
    w = EvenWeights(g, (0.2, 0.8, 0.2, 0.8, 0.2, 0.8))
    fit = tv_distance(sample_even(g, w, N, np.random.default_rng(7)), enumerate_even(g, w))
    assert fit.outside_support == 0 and fit.tv < 0.01 and fit.pvalue > 1e-4


def test_general_with_low_weights_matches_subcritical_law():
    g = corpus.k4_minus_edge()
    w = EvenWeights.uniform(g, 0.3)
    assert not w.A and not w.W
    src = ExactSource(enumerate_rc(w.rc_spec))
    rng = np.random.default_rng(8)
    a = [sample_even_general(g, w, src, rng) for _ in range(30_000)]
    b = [sample_even_subcritical(g, 0.3, src, rng) for _ in range(30_000)]
    dist = enumerate_even(g, 0.3)
    assert tv_distance(a, dist).tv < 0.015 and tv_distance(b, dist).tv < 0.015


def test_complement_symmetry_on_even_graph():
    # on an even graph F -> E + F maps rho_p to rho_{1-p}
    g = corpus.complete(5)
    lo, hi = enumerate_even(g, 0.3), enumerate_even(g, 0.7)
    full = g.all_edges().bits
    for c, pr in zip(lo.configs, lo.probs):
        assert hi.prob(int(c) ^ full) == pytest.approx(pr, abs=1e-14)


def test_pair_paths_examples():
    tri = corpus.triangle()
    assert pair_paths(tri, tri.all_edges(), []) == PathFamily((), ())
    p3 = corpus.path(3)
    fam = pair_paths(p3, p3.all_edges(), {0, 2})
    assert fam.paths == (p3.all_edges(),) and fam.endpoints == ((0, 2),)
    fam = pair_paths(tri, tri.all_edges(), {0, 1})
    fam.validate(tri, tri.all_edges(), {0, 1})
    # forest {(0,1),(1,2)} holds the direct edge between 0 and 1
    assert fam.paths == (tri.edge_set([0]),)


def test_pair_paths_rejects_bad_input():
    p3 = corpus.path(3)
    with pytest.raises(ValueError):
        pair_paths(p3, p3.empty_set(), {0, 2})
    with pytest.raises(ValueError):
        pair_paths(p3, p3.all_edges(), {0})


def random_w_even_case(rng, max_v=12, max_e=30):
    n = int(rng.integers(2, max_v + 1))
    m = int(rng.integers(1, max_e + 1))
    g = build_graph(n, [tuple(int(x) for x in rng.integers(0, n, 2)) for _ in range(m)])
    omega = EdgeSet.from_array(rng.integers(0, 2, m))
    labels = component_labels(g, omega)
    w: list[int] = []
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        k = int(rng.integers(0, len(members) // 2 + 1)) * 2
        w += [int(v) for v in rng.choice(members, size=k, replace=False)]
    return g, omega, w


def test_pair_paths_family_is_valid_on_random_cases():
    rng = np.random.default_rng(9)
    nonempty = 0
    for _ in range(10_000):
        g, omega, w = random_w_even_case(rng)
        fam = pair_paths(g, omega, w)
        fam.validate(g, omega, w)
        union = fam.union(g.n_edges)
        assert odd_vertex_set(g, union) == set(w)
        nonempty += bool(w)
    assert nonempty > 5000


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_pair_paths_is_deterministic(seed):
    g, omega, w = random_w_even_case(np.random.default_rng(seed), max_v=8, max_e=14)
    assert pair_paths(g, omega, w) == pair_paths(g, omega, list(reversed(w)))


def test_path_family_validate_catches_errors():
    p3 = corpus.path(3)
    with pytest.raises(ValueError):
        PathFamily((p3.edge_set([0]),), ((0, 1),)).validate(p3, p3.all_edges(), {0, 2})
    with pytest.raises(ValueError):
        PathFamily((p3.all_edges(),), ((0, 2),)).validate(p3, p3.edge_set([0]), {0, 2})
    tri = corpus.triangle()
    with pytest.raises(ValueError):
        # a triangle is not a path between 0 and 1
        PathFamily((tri.all_edges(),), ((0, 1),)).validate(tri, tri.all_edges(), {0, 1})


def test_rc_from_even_endpoints():
    g = corpus.complete(4)
    rng = np.random.default_rng(10)
    f = g.edge_set([0, 1, 3])
    assert rc_from_even(g, f, 0.0, rng) == f
    assert rc_from_even(g, f, 0.5, rng) == g.all_edges()
    with pytest.raises(ValueError):
        rc_from_even(g, g.edge_set([0]), 0.3, rng)


def test_rc_from_even_triangle_pushforward_exact():
    g = corpus.triangle()
    push = oracle.pushforward_converse(g, 0.3)
    target = enumerate_rc(RCSpec.uniform(g, 0.6))
    for m in range(8):
        assert abs(push[m] - target.prob(m)) < 1e-12


def test_rc_from_even_sampled_law():
    g = corpus.k4_minus_edge()
    rng = np.random.default_rng(11)
    src = ExactSource(enumerate_even(g, 0.3))
    draws = [rc_from_even(g, src(rng), 0.3, rng) for _ in range(50_000)]
    assert tv_distance(draws, enumerate_rc(RCSpec.uniform(g, 0.6))).tv < 0.015


def test_even_sampler_exact_backend_and_source():
    g = corpus.cycle(4)
    draw, src = even_sampler(g, 0.5)
    assert src is None
    draw, src = even_sampler(g, 0.7, backend="exact")
    assert isinstance(src, ExactSource)
    with pytest.raises(ValueError):
        even_sampler(g, 0.3, backend="nope")


def test_every_pipeline_draw_is_even():
    rng = np.random.default_rng(12)
    for g in [corpus.self_loop(), corpus.doubled_edge(), corpus.two_triangles(), corpus.grid(1, 1)]:
        for p in (0.1, 0.5, 0.9, [0.2 + 0.6 * (i % 2) for i in range(g.n_edges)]):
            for s in sample_even(g, p, 50, rng):
                assert not odd_vertex_set(g, s)
