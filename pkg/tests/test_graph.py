import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from parity_sampler import corpus
from parity_sampler.graph import (EdgeSet, Graph, GraphError, bridges, build_graph, component_count,
                                  cycle_space_dim, cyclic_edges, format_edge_list,
                                  fundamental_cycle_basis, gf2_rank, in_span, is_even,
                                  odd_vertex_set, parse_edge_list, read_edge_list, spanning_forest,
                                  xor)


@st.composite
def multigraphs(draw, max_v=6, max_e=10):
    n = draw(st.integers(1, max_v))
    m = draw(st.integers(0, max_e))
    edges = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), min_size=m, max_size=m))
    return build_graph(n, edges)


def test_build_graph_examples():
    tri = build_graph(3, [(0, 1), (1, 2), (2, 0)])
    assert tri.n_edges == 3 and tri.edges[2] == (2, 0)
    single = build_graph(1, [])
    assert single.n_vertices == 1 and single.n_edges == 0
    k4 = build_graph(4, list(itertools.combinations(range(4), 2)))
    assert k4.n_edges == 6


def test_build_graph_rejects_bad_endpoint():
    with pytest.raises(GraphError):
        build_graph(2, [(0, 2)])


def test_odd_vertex_set_examples():
    tri = corpus.triangle()
    assert odd_vertex_set(tri, tri.all_edges()) == frozenset()
    assert odd_vertex_set(tri, tri.edge_set([0])) == {0, 1}
    p = corpus.path(3)
    assert odd_vertex_set(p, p.all_edges()) == {0, 2}


def test_self_loop_is_even():
    g = corpus.self_loop()
    assert is_even(g, g.edge_set([3]))
    assert 3 in cyclic_edges(g)
    assert 3 not in spanning_forest(g)


def test_component_count_examples():
    k4 = corpus.complete(4)
    assert component_count(k4, k4.empty_set()) == 4
    assert component_count(k4, spanning_forest(k4)) == 1
    g = build_graph(4, [(0, 1), (1, 2), (2, 0)])
    assert component_count(g, g.all_edges()) == 2


def test_cycle_space_dim_examples():
    assert cycle_space_dim(corpus.triangle()) == 1
    assert cycle_space_dim(corpus.complete(4)) == 3
    assert cycle_space_dim(corpus.path(5)) == 0
    assert cycle_space_dim(corpus.doubled_edge()) == 2
    assert cycle_space_dim(corpus.self_loop()) == 2


def test_spanning_forest_examples():
    tri = corpus.triangle()
    assert spanning_forest(tri) == tri.edge_set([0, 1])
    p = corpus.path(4)
    assert spanning_forest(p) == p.all_edges()
    k4 = corpus.complete(4)
    f = spanning_forest(k4)
    # union-find in edge order accepts (0,1), (0,2), (0,3)
    assert f == k4.edge_set([0, 1, 2])
    assert cycle_space_dim(k4, f) == 0 and component_count(k4, f) == 1


def test_fundamental_cycle_basis_examples():
    tri = corpus.triangle()
    b = fundamental_cycle_basis(tri, tri.edge_set([0, 1]))
    assert b.cycles == (tri.all_edges(),) and b.chord_edges == (2,)
    assert len(fundamental_cycle_basis(corpus.path(4))) == 0
    k4 = corpus.complete(4)
    b = fundamental_cycle_basis(k4)
    assert len(b) == 3
    assert gf2_rank([c.bits for c in b.cycles]) == 3


def test_fundamental_cycle_basis_rejects_bad_forest():
    tri = corpus.triangle()
    with pytest.raises(GraphError):
        fundamental_cycle_basis(tri, tri.all_edges())
    with pytest.raises(GraphError):
        fundamental_cycle_basis(tri, tri.edge_set([0]))


def test_cyclic_edges_examples():
    tri = corpus.triangle()
    assert cyclic_edges(tri) == tri.all_edges()
    p = corpus.path(4)
    assert cyclic_edges(p) == p.empty_set()
    g = build_graph(4, [(0, 1), (1, 2), (2, 0), (2, 3)])
    assert cyclic_edges(g) == g.edge_set([0, 1, 2])


def test_parallel_pair_is_not_a_bridge():
    g = corpus.doubled_edge()
    s = g.edge_set([0, 1])
    assert bridges(g, s) == g.empty_set()
    assert cyclic_edges(g, s) == s


def test_xor_examples():
    k4 = corpus.complete(4)
    a = k4.edge_set([0, 3, 1])
    assert xor(a, a) == k4.empty_set()
    assert xor(a, k4.empty_set()) == a
    t1 = k4.edge_set([0, 1, 3])  # 0-1, 0-2, 1-2
    t2 = k4.edge_set([2, 4, 5])  # 0-3, 1-3, 2-3 is a star, not a triangle
    assert xor(t1, t2) == t1 | t2
    with pytest.raises(GraphError):
        xor(a, EdgeSet(0, 5))


def test_edgeset_hex_and_array_roundtrip():
    s = EdgeSet.from_indices(10, [0, 3, 9])
    assert s.hex() == "209"
    assert EdgeSet.from_hex(s.hex(), 10) == s
    assert EdgeSet.from_array(s.to_array()) == s
    assert list(s) == [0, 3, 9] and len(s) == 3 and 3 in s and 4 not in s
    assert EdgeSet.empty(5).hex() == "00"


def test_edge_list_roundtrip(tmp_path):
    g = corpus.self_loop()
    text = format_edge_list(g)
    assert text.splitlines()[0] == "4 5"
    assert parse_edge_list(text) == g
    path = tmp_path / "g.txt"
    path.write_text(text)
    dual = tmp_path / "g.dual"
    dual.write_text("\n".join(f"{e} {4 - e}" for e in range(5)))
    h = read_edge_list(path, dual)
    assert h == g and h.dual_map == (4, 3, 2, 1, 0)


def test_edge_list_errors():
    with pytest.raises(GraphError):
        parse_edge_list("3 2\n0 1\n")
    with pytest.raises(GraphError):
        parse_edge_list("")


def all_subsets(g: Graph):
    return [EdgeSet(b, g.n_edges) for b in range(1 << g.n_edges)]


@settings(max_examples=60, deadline=None)
@given(multigraphs(max_v=6, max_e=9))
def test_even_sets_are_the_cycle_span(g):
    basis = fundamental_cycle_basis(g)
    rows = [c.bits for c in basis.cycles]
    for c in basis.cycles:
        assert is_even(g, c)
    assert len(basis) == cycle_space_dim(g) == gf2_rank(rows)
    n_even = 0
    for s in all_subsets(g):
        even = is_even(g, s)
        n_even += even
        assert even == in_span(s.bits, rows)
    assert n_even == 2 ** cycle_space_dim(g)


def test_even_count_matches_on_corpus_up_to_twelve_edges():
    for g in [corpus.complete(5), corpus.cycle(7), corpus.doubled_edge(), corpus.two_triangles(),
              build_graph(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2), (1, 3), (2, 4), (3, 0),
                              (4, 1), (0, 0), (2, 2)])]:
        assert g.n_edges <= 12
        n_even = sum(is_even(g, s) for s in all_subsets(g))
        assert n_even == 2 ** cycle_space_dim(g)
        assert len(fundamental_cycle_basis(g)) == cycle_space_dim(g)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**12 - 1), st.integers(0, 2**12 - 1), st.integers(0, 2**12 - 1))
def test_xor_group_laws(a, b, c):
    A, B, C = (EdgeSet(x, 12) for x in (a, b, c))
    assert xor(xor(A, B), C) == xor(A, xor(B, C))
    assert xor(A, B) == xor(B, A)
    assert xor(A, A) == EdgeSet(0, 12)


def brute_force_cyclic(g: Graph, s: EdgeSet) -> EdgeSet:
    """Union of every nonempty even subset of s: an edge lies on a cycle
    iff some even subset of s contains it."""
    out = 0
    sub = s.bits
    while sub:
        if is_even(g, EdgeSet(sub, g.n_edges)):
            out |= sub
        sub = (sub - 1) & s.bits
    return EdgeSet(out, g.n_edges)


@settings(max_examples=80, deadline=None)
@given(multigraphs(max_v=6, max_e=10), st.integers(0, 2**10 - 1))
def test_cyclic_edges_match_brute_force(g, mask):
    s = EdgeSet(mask & ((1 << g.n_edges) - 1), g.n_edges)
    assert cyclic_edges(g, s) == brute_force_cyclic(g, s)


@settings(max_examples=80, deadline=None)
@given(multigraphs(max_v=7, max_e=12), st.integers(0, 2**12 - 1))
def test_spanning_forest_restricted(g, mask):
    s = EdgeSet(mask & ((1 << g.n_edges) - 1), g.n_edges)
    f = spanning_forest(g, s)
    assert f <= s
    assert cycle_space_dim(g, f) == 0
    assert component_count(g, f) == component_count(g, s)
    basis = fundamental_cycle_basis(g, f, s)
    assert len(basis) == cycle_space_dim(g, s)
    for c, chord in zip(basis.cycles, basis.chord_edges):
        assert c <= s and chord in c and is_even(g, c)
