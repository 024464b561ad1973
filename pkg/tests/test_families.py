from itertools import combinations, permutations

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paramcirc.families import (
    Graph,
    VariableLayout,
    all_graphs,
    clique_all_circuit,
    clique_eval,
    gen_clique,
    gen_clique_all,
    gen_clique_weft1,
    gen_grid_tiling,
    gen_per_sparse,
    gen_perk,
    gen_rper,
    gen_vc,
    grid_edges,
    perm_var,
    rper_fpt_circuit,
    rper_var,
    sun_graph,
    vc_fpt_circuit,
    vc_fpt_size_bound,
    vc_sun_circuit,
)
from paramcirc.exactfield import DEFAULT_MODULUS
from paramcirc.polyoracle import SparsePoly, expand
from paramcirc.sums import bounded_sum_poly


def nx_clique_weight(g: Graph, w, k, p):
    total = 0
    for C in nx.enumerate_all_cliques(g.to_networkx()):
        if len(C) == k:
            total += int(np.prod([w[v] for v in C], dtype=object))
    if k == 0:
        total = 1
    return total % p


def brute_covers(g: Graph, k):
    return [C for C in combinations(range(g.n), k) if all(u in C or v in C for u, v in g.edges)]


def test_gen_clique_examples(F):
    assert gen_clique(3, 0) == SparsePoly.const(VariableLayout(3).size, 1)
    assert gen_clique(3, 2)([1] * 6) == 3
    assert len(gen_clique(4, 3)) == 4


def test_clique_eval_examples(F):
    K4 = Graph.complete(4)
    assert clique_eval(K4.adjacency(), [1] * 4, 3) == 4
    assert clique_eval(Graph(4).adjacency(), [1] * 4, 2) == 0
    assert clique_eval(Graph.complete(3).adjacency(), [2, 3, 5], 2) == 31
    with pytest.raises(ValueError):
        clique_eval([[0, 1], [0, 0]], [1, 1], 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32), st.integers(2, 6), st.integers(0, 4))
def test_clique_eval_matches_networkx(seed, n, k):
    rng = np.random.default_rng(seed)
    g = Graph(n, frozenset(e for e in combinations(range(n), 2) if rng.random() < 0.6))
    w = [int(v) for v in rng.integers(1, 1000, size=n)]
    assert clique_eval(g.adjacency(), w, k) == nx_clique_weight(g, w, k, DEFAULT_MODULUS)


@pytest.mark.parametrize("n", [3, 4])
def test_gen_clique_at_graph_points(n, rng):
    L = VariableLayout(n)
    for g in all_graphs(n):
        w = [int(v) for v in rng.integers(1, 50, size=n)]
        pt = L.point_from_graph(g, w)
        for k in range(n + 1):
            assert gen_clique(n, k)(pt) == nx_clique_weight(g, w, k, gen_clique(n, k).ctx.p)


@pytest.mark.parametrize("n,k", [(3, 2), (4, 2), (4, 3), (3, 0), (5, 3)])
def test_clique_weft1_sum(n, k):
    g, spec = gen_clique_weft1(n, k)
    assert g.weft() == 1
    assert bounded_sum_poly(spec) == gen_clique(n, k)


def test_clique_all_circuit():
    for n in (2, 3):
        assert expand(clique_all_circuit(n)) == gen_clique_all(n)


def test_vc_examples():
    tri = Graph.complete(3)
    assert gen_vc(tri, 2)([1, 1, 1]) == 3
    assert gen_vc(Graph(2, frozenset({(0, 1)})), 0).is_zero()
    assert gen_vc(Graph(2), 0)([5, 7]) == 1
    assert vc_fpt_circuit(tri, 2)([1, 1, 1]) == 3
    assert vc_fpt_circuit(Graph.path(3), 1)([1, 1, 1]) == 1
    assert vc_fpt_circuit(tri, 0)([1, 1, 1]) == 0


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_vc_polynomial_matches_enumeration(n):
    for g in all_graphs(n):
        for k in range(n + 1):
            covers = brute_covers(g, k)
            poly = gen_vc(g, k)
            assert len(poly) == len(covers)
            for C in covers:
                e = tuple(int(i in C) for i in range(n))
                assert poly.terms[e] == 1


def test_vc_fpt_size_bound_holds():
    for n in range(1, 6):
        for g in all_graphs(n) if n <= 4 else [Graph.complete(5), Graph.cycle(5), Graph.path(5)]:
            for k in range(4):
                assert vc_fpt_circuit(g, k).size() <= vc_fpt_size_bound(n, k)


def test_vc_fpt_edge_order_independent(rng):
    g = Graph.cycle(5)
    edges = g.sorted_edges()
    for _ in range(3):
        order = [edges[i] for i in rng.permutation(len(edges))]
        assert expand(vc_fpt_circuit(g, 3, order)) == gen_vc(g, 3)
    with pytest.raises(ValueError):
        vc_fpt_circuit(g, 2, edges[:-1])


def test_generic_vc_at_graph_points():
    n = 4
    L = VariableLayout(n)
    for g in all_graphs(n):
        pt = L.point_from_graph(g, [2, 3, 5, 7])
        for k in range(n + 1):
            assert gen_vc(n, k)(pt) == gen_vc(g, k)([2, 3, 5, 7])


@pytest.mark.parametrize("n,k", [(2, 1), (3, 1), (4, 1), (4, 2), (5, 1), (5, 2)])
def test_vc_sun_matches_generic(n, k):
    S = sun_graph(n, k)
    assert expand(vc_sun_circuit(n, k)) == gen_vc(n, k, edges=S.edges)


def test_vc_sun_on_subgraphs(rng):
    n, k = 5, 2
    S = sun_graph(n, k)
    L = VariableLayout(n)
    c = vc_sun_circuit(n, k)
    for g in all_graphs(n):
        if rng.random() > 0.1:
            continue
        x = [int(v) for v in rng.integers(1, 100, size=n)]
        sub = Graph(n, g.edges & S.edges)
        assert c(L.point_from_graph(g, x)) == gen_vc(sub, k)(x)


def test_rper():
    assert gen_rper(2, 1) == SparsePoly.var(2, 0) + SparsePoly.var(2, 1)
    assert gen_rper(3, 2)([1] * 6) == 6
    # k = n is the permanent
    rng = np.random.default_rng(3)
    A = rng.integers(0, 10, size=(3, 3))
    per = sum(int(np.prod([A[i][s[i]] for i in range(3)])) for s in permutations(range(3)))
    assert gen_rper(3, 3)([int(v) for v in A.flatten()]) == per
    assert rper_var(4, 1, 2) == 6


@pytest.mark.parametrize("n,k", [(1, 1), (3, 1), (3, 2), (4, 2), (4, 3), (5, 3), (4, 4)])
def test_rper_fpt(n, k):
    assert expand(rper_fpt_circuit(n, k)) == gen_rper(n, k)


def test_perk_examples():
    assert gen_perk(3, 2)([1] * 9) == 3
    assert gen_perk(3, 3)([1] * 9) == 2
    pt = [1] * 16
    pt[perm_var(4, 0, 0)] = 0
    # only transpositions moving point 0 survive
    assert gen_perk(4, 2)(pt) == 3
    assert gen_perk(2, 3).is_zero()


def test_per_sparse():
    for n in range(2, 6):
        for k in range(2, n + 1):
            assert gen_per_sparse(n, k, 1) == gen_perk(n, k)
    assert gen_per_sparse(4, 2, 2)([1] * 16) == 9
    assert gen_per_sparse(4, 2, 2, strict=True)([1] * 16) == 3
    assert gen_per_sparse(2, 3, 2).is_zero()


def test_grid():
    assert len(grid_edges(2)) == 4
    assert len(grid_edges(3)) == 12
    f = gen_grid_tiling(4, 2)
    # 4! placements, 8 with the anchor below both neighbours, landing on the
    # three 4-cycles of K4 with multiplicities 2, 2, 4
    assert sorted(f.terms.values()) == [2, 2, 4]
    assert all(sum(e) == 8 for e in f.terms)


def test_graph_text_roundtrip():
    g = Graph(4, frozenset({(0, 1), (2, 3)}), edge_colors={(0, 1): 2}, vertex_colors={3: "red"})
    h = Graph.from_text(g.to_text())
    assert h == g and h.edge_colors == {(0, 1): 2} and h.vertex_colors == {3: "red"}
    with pytest.raises(ValueError):
        Graph.from_text("E 1 2\n")
    with pytest.raises(ValueError):
        Graph(2, frozenset({(0, 2)}))
