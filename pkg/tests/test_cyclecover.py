from __future__ import annotations

import itertools
from math import comb, factorial

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paramcirc.circuit import CircuitBuilder, EnumerationCapExceeded, MalformedInput, evaluate
from paramcirc.corpus import random_circuit, random_point
from paramcirc.cyclecover import (
    C6Construction,
    CoverPattern,
    EdgeNotFound,
    InvalidMinorModel,
    TooManyColors,
    WeightedDigraph,
    c6_construction,
    circuit_to_cyclecover,
    clique_poly_of,
    colored_matching_poly,
    coupling_identity_check,
    cycle_cover_poly,
    grid_graph,
    grid_reduction,
    iff_splice,
    k_matching_poly,
    matching_to_perk,
    matchings_incl_excl,
    minor_expand,
    partitioned_sub_poly,
    permanent_sum,
    project,
    selector_cycle_count,
)
from paramcirc.exactfield import DEFAULT_FIELD
from paramcirc.families import Graph, gen_per_sparse, gen_perk, perm_var
from paramcirc.transforms import SizeCapExceeded

P = DEFAULT_FIELD.p
HALF = DEFAULT_FIELD.inv(2)


def ones(f):
    return f.evaluate([1] * f.n_vars)


def loops_digraph(n, edges, loop_weight=1):
    g = WeightedDigraph(n)
    for v in range(n):
        g.add_edge(v, v, loop_weight + v)
    for t, (u, v) in enumerate(edges):
        g.add_edge(u, v, 3 + 2 * t)
    return g


def random_digraph(rng, n, p_edge=0.5):
    g = WeightedDigraph(n)
    for u in range(n):
        for v in range(n):
            if u == v or rng.random() < p_edge:
                g.add_edge(u, v, int(rng.integers(1, 40)))
    return g


def circ(n_vars, body):
    b = CircuitBuilder(n_vars)
    return b.build(body(b))


# cover sums -------------------------------------------------------------------


def test_complete_three_transpositions():
    g = WeightedDigraph.complete(3)
    assert cycle_cover_poly(g, CoverPattern.selfloop(2)).value == 3
    assert cycle_cover_poly(g, CoverPattern.selfloop(3)).value == 2


def test_missing_loops_kill_fixed_points():
    g = WeightedDigraph.complete(3, loops=False)
    assert cycle_cover_poly(g, CoverPattern.selfloop(2)).value == 0


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_complete_digraph_matches_generators(n):
    g = WeightedDigraph.complete(n)
    var = [perm_var(n, u, v) for u, v, _ in g.edges]
    for k in range(2, min(n, 4) + 1):
        got = cycle_cover_poly(g, CoverPattern.selfloop(k), symbolic=True, var_of_edge=var, n_vars=n * n)
        assert got == gen_perk(n, k)
        for c in (1, 2, 3):
            got = cycle_cover_poly(g, CoverPattern(k, c), symbolic=True, var_of_edge=var, n_vars=n * n)
            assert got == gen_per_sparse(n, k, c)


def test_strict_pattern_matches_generator():
    n = 5
    g = WeightedDigraph.complete(n)
    var = [perm_var(n, u, v) for u, v, _ in g.edges]
    got = cycle_cover_poly(g, CoverPattern(3, 2, strict=True), symbolic=True, var_of_edge=var, n_vars=n * n)
    assert got == gen_per_sparse(n, 3, 2, strict=True)


def test_vertex_cap():
    with pytest.raises(EnumerationCapExceeded):
        cycle_cover_poly(WeightedDigraph.complete(11), CoverPattern.selfloop(2))


def test_node_cap():
    with pytest.raises(EnumerationCapExceeded):
        cycle_cover_poly(WeightedDigraph.complete(8), CoverPattern(0, 8), node_cap=100)


def test_zero_weight_edges_dropped():
    g = WeightedDigraph(2)
    assert g.add_edge(0, 1, 0) == -1
    assert g.add_edge(0, 1, P) == -1
    assert g.edges == []


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_permanent_matches_enumeration(seed, n):
    rng = np.random.default_rng(seed)
    g = random_digraph(rng, n, 0.4)
    assert permanent_sum(g) == cycle_cover_poly(g, CoverPattern(0, n))


def test_permanent_on_subset_with_skips():
    g = loops_digraph(3, [(0, 1), (1, 0), (1, 2), (2, 1)])
    # drop vertex 2 and the 1 -> 0 edge: only the two loops remain
    loops = [i for i, (u, v, _) in enumerate(g.edges) if u == v]
    back = g.find_edge(1, 0)
    assert permanent_sum(g, [0, 1], skip=[back]).value == g.edges[loops[0]][2] * g.edges[loops[1]][2]


# digraph text format ------------------------------------------------------------


def test_digraph_text_round_trip():
    g = loops_digraph(3, [(0, 1), (1, 2), (2, 0)])
    g.edge_colors[3] = 7
    g.selectors.add(4)
    h = WeightedDigraph.from_text(g.to_text())
    assert h.n == 3 and h.edges == g.edges
    assert h.selectors == {4} and h.edge_colors == {3: 7}
    assert h.to_text() == g.to_text()


@pytest.mark.parametrize(
    "text",
    ["", "N x DIRECTED\n", "N 2\n", "N 2 DIRECTED\nE 1 3 4\n", "N 2 DIRECTED\nE 1 2\n",
     "N 2 DIRECTED\nSELECTOR 1 2\n", "N 2 DIRECTED\nQ 1 2 3\n"],
)
def test_digraph_text_malformed(text):
    with pytest.raises(MalformedInput):
        WeightedDigraph.from_text(text)


# splicing -----------------------------------------------------------------------


def test_splice_m1_structure():
    g = loops_digraph(2, [(0, 1), (1, 0)])
    h, cp = iff_splice(g, (0, 1), [(1, 0)])
    assert h.n == 5 and len(cp.vertices) == 3
    u, a, w = h.edges[cp.main_in]
    assert (u, a, w) == (0, cp.a[0], g.edges[g.find_edge(0, 1)][2])
    assert h.edges[cp.main_out][:2] == (cp.b[0], 1)
    assert h.edges[cp.c_in[0]][:2] == (1, cp.c[0])
    assert h.edges[cp.c_out[0]][:2] == (cp.c[0], 0)
    # loops (2) + externals (4) + gadget internals (9)
    assert len(h.edges) == 15
    with pytest.raises(EdgeNotFound):
        h.find_edge(0, 1)


def test_splice_single_pair_m2_weights():
    g = loops_digraph(4, [(0, 1), (2, 3), (3, 2)])
    h, cp = iff_splice(g, (0, 1), [(2, 3), (3, 2)], gadget="single")
    inside = set(cp.vertices)
    internal = [(u, v, w) for u, v, w in h.edges if u in inside and v in inside]
    weights = {w for _, _, w in internal}
    assert weights == {1, HALF, P - HALF, P - 1}
    a, b = cp.a[0], cp.b[0]
    table = {(u, v): w for u, v, w in internal}
    assert table[(a, a)] == P - 1 and table[(b, b)] == 1
    for c in cp.c:
        assert table[(a, c)] == HALF and table[(b, c)] == P - HALF
        assert table[(c, a)] == table[(c, b)] == 1
        assert table[(c, c)] == P - HALF


def test_splice_graded_structure():
    g = loops_digraph(2, [(0, 1), (1, 0)])
    h, cp = iff_splice(g, 0, [1], gadget="graded")
    assert len(cp.d) == 1 and h.n == 6
    assert cp.main_extra_length == 3 and cp.max_internal_cycle == 4


def test_splice_errors():
    g = loops_digraph(2, [(0, 1)])
    with pytest.raises(EdgeNotFound):
        iff_splice(g, (0, 1), [(1, 0)])
    with pytest.raises(ValueError):
        iff_splice(g, (0, 1), [(0, 1)])
    with pytest.raises(ValueError):
        iff_splice(g, (0, 1), [])
    with pytest.raises(ValueError):
        iff_splice(g, (0, 1), [(0, 0)], gadget="bogus")


# the coupling identity ----------------------------------------------------------


def test_coupling_two_disjoint_two_cycles():
    g = loops_digraph(4, [(0, 1), (1, 0), (2, 3), (3, 2)])
    r = coupling_identity_check(g, (0, 1), [(1, 0), (2, 3)], CoverPattern(0, 12))
    assert r.ok and r.active and r.inactive


def test_coupling_inactive_only():
    # 0 -> 2 is a dead end, so the coupled pair is never used together
    g = loops_digraph(3, [(0, 1), (1, 0), (0, 2)])
    r = coupling_identity_check(g, (0, 1), [(0, 2)], CoverPattern(0, 10))
    assert r.ok and r.active == 0
    loops = 1 * 2 * 3
    assert r.base == r.spliced == loops


@pytest.mark.parametrize("pattern", [CoverPattern(0, 10), CoverPattern(0, 4)])
def test_coupling_m1_on_two_cycle(pattern):
    g = loops_digraph(2, [(0, 1), (1, 0)])
    assert coupling_identity_check(g, (0, 1), [(1, 0)], pattern).ok


@pytest.mark.parametrize("pattern", [CoverPattern(0, 10), CoverPattern(5, 10), CoverPattern(6, 4), CoverPattern(0, 4)])
def test_graded_coupling_m1_on_two_cycle(pattern):
    g = loops_digraph(2, [(0, 1), (1, 0)])
    assert coupling_identity_check(g, (0, 1), [(1, 0)], pattern, gadget="graded").ok


def test_single_pair_is_not_a_two_coupling():
    g = loops_digraph(4, [(0, 1), (1, 0), (2, 3), (3, 2)])
    r = coupling_identity_check(g, (0, 1), [(1, 0), (2, 3)], CoverPattern(0, 12), gadget="single")
    assert not r.ok and r.borderline


def test_single_pair_equals_figure_for_m1():
    g = loops_digraph(3, [(0, 1), (1, 2), (2, 0)])
    h1, _ = iff_splice(g, (0, 1), [(2, 0)], gadget="single")
    h2, _ = iff_splice(g, (0, 1), [(2, 0)])
    assert h1.edges == h2.edges


FIGURE_COUNTEREXAMPLE = "N 2 DIRECTED\nE 1 1 6\nE 1 2 7\nE 2 2 8\n"


def test_figure_gadget_breaks_under_exact_length():
    g = WeightedDigraph.from_text(FIGURE_COUNTEREXAMPLE)
    r = coupling_identity_check(g, 2, [0], CoverPattern(5, 10))
    # base: both loops (lengths 3 and 2) or neither (no way back to 0), no 5-cycle.
    # spliced: the single 5-cycle 0 -> 1 -> a -> b -> c -> 0 weighs 7 * 8 * 1 * (-1/2) * 1.
    assert r.base == 0 and r.borderline == P - 28 and not r.ok
    assert coupling_identity_check(g, 2, [0], CoverPattern(5, 10), gadget="graded").ok


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4), st.integers(1, 3))
def test_coupling_identity_random(seed, n, m):
    rng = np.random.default_rng(seed)
    g = random_digraph(rng, n)
    if len(g.edges) < m + 1:
        return
    idx = [int(i) for i in rng.choice(len(g.edges), m + 1, replace=False)]
    big = n + 4 * m + 2
    assert coupling_identity_check(g, idx[0], idx[1:], CoverPattern(0, big)).ok
    for pattern in (CoverPattern(0, big), CoverPattern(5, big), CoverPattern(0, 4)):
        assert coupling_identity_check(g, idx[0], idx[1:], pattern, gadget="graded").ok


# circuits to cycle covers -----------------------------------------------------------


EXAMPLES = {
    "product": (circ(2, lambda b: b.mul(b.input(0), b.input(1))), 21),
    "sum": (circ(2, lambda b: b.add(b.input(0), b.input(1))), 10),
    "const": (circ(2, lambda b: b.const(5)), 5),
}


@pytest.mark.parametrize("name", sorted(EXAMPLES))
@pytest.mark.parametrize("k", [0, 1, 2])
@pytest.mark.parametrize("gadget", ["figure", "graded"])
def test_circuit_examples(name, k, gadget):
    c, want = EXAMPLES[name]
    inst = circuit_to_cyclecover(c, k, [3, 7], gadget=gadget)
    assert inst.normalized_sum("enumerate").value == want
    assert inst.normalized_sum("factored").value == want


def test_selector_cycle_count_matches_clique_enumeration():
    c = circ(1, lambda b: b.const(1))
    for size in range(1, 5):
        for k in range(0, size + 1):
            inst = circuit_to_cyclecover(c, k, [0], clique_size=size)
            assert inst.cover_sum("enumerate").value == selector_cycle_count(size, k)
    assert selector_cycle_count(5, 3) == comb(5, 3) * factorial(2)


def test_uniform_depth_padding_preserves_value():
    c = circ(3, lambda b: b.add(b.mul(b.input(0), b.input(1)), b.input(2)))
    pt = [2, 5, 11]
    plain = circuit_to_cyclecover(c, 1, pt)
    padded = circuit_to_cyclecover(c, 1, pt, uniform_depth=True)
    assert padded.graph.n >= plain.graph.n
    assert plain.normalized_sum() == padded.normalized_sum() == evaluate(c, pt)


def test_circuit_size_cap():
    c, _ = EXAMPLES["product"]
    with pytest.raises(SizeCapExceeded):
        circuit_to_cyclecover(c, 2, [3, 7], max_vertices=10)


def test_circuit_bad_arguments():
    c, _ = EXAMPLES["product"]
    with pytest.raises(ValueError):
        circuit_to_cyclecover(c, -1, [1, 1])
    with pytest.raises(ValueError):
        circuit_to_cyclecover(c, 2, [1, 1], clique_size=1)
    with pytest.raises(ValueError):
        circuit_to_cyclecover(c, 1, [1, 1], gadget="single")


def small_corpus(seed, count):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        c = random_circuit(rng, n_vars=3, max_size=8, max_depth=4, max_weft=2)
        if c.metrics.size <= 8 and c.metrics.depth <= 4:
            out.append((c, random_point(rng, 3)))
    return out


@pytest.mark.parametrize("k", [0, 1, 2])
def test_circuit_corpus(k):
    for c, pt in small_corpus(31 + k, 15):
        for gadget in ("figure", "graded"):
            assert circuit_to_cyclecover(c, k, pt, gadget=gadget).normalized_sum() == evaluate(c, pt)


def test_factored_matches_enumeration_on_small_instances():
    checked = 0
    for c, pt in small_corpus(7, 25):
        inst = circuit_to_cyclecover(c, 1, pt)
        if inst.graph.n <= 18:
            assert inst.cover_sum("enumerate") == inst.cover_sum("factored")
            checked += 1
    assert checked >= 10


# partitioned subgraphs and grids -------------------------------------------------


def test_partitioned_sub_single_vertex():
    H = Graph(1, vertex_colors={0: "r"})
    G = Graph(3, vertex_colors={0: "r", 1: "b", 2: "r"})
    f = partitioned_sub_poly(H, G)
    # edgeless G: variables are just X_0, X_1, X_2
    assert f.terms == {(1, 0, 0): 1, (0, 0, 1): 1}


def test_partitioned_sub_colored_edge():
    H = Graph(2, frozenset({(0, 1)}), vertex_colors={0: "r", 1: "b"})
    G = Graph(4, frozenset({(0, 1), (2, 3), (0, 2)}), vertex_colors={0: "r", 1: "b", 2: "r", 3: "b"})
    f = partitioned_sub_poly(H, G)
    assert len(f) == 2


def test_partitioned_sub_no_copy():
    H = Graph(2, frozenset({(0, 1)}), vertex_colors={0: "r", 1: "b"})
    G = Graph(2, vertex_colors={0: "r", 1: "b"})
    assert partitioned_sub_poly(H, G).is_zero()


def test_partitioned_sub_needs_colorful_pattern():
    H = Graph(2, vertex_colors={0: "r", 1: "r"})
    with pytest.raises(ValueError):
        partitioned_sub_poly(H, Graph(1))


def test_grid_graph_shape():
    g = grid_graph(3)
    assert g.n == 9 and len(g.edges) == 12


def petersen_six():
    # induced subgraph of the Petersen graph on outer vertices 0..4 and inner 5
    P10 = [(i, (i + 1) % 5) for i in range(5)] + [(i, i + 5) for i in range(5)] + \
          [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    keep = {0, 1, 2, 3, 4, 5}
    return Graph(6, frozenset((u, v) for u, v in P10 if u in keep and v in keep))


GRID_GRAPHS = {
    "K4": Graph.complete(4),
    "K5": Graph.complete(5),
    "C5": Graph.cycle(5),
    "petersen6": petersen_six(),
    "edgeless": Graph(4),
}


@pytest.mark.parametrize("name", sorted(GRID_GRAPHS))
@pytest.mark.parametrize("k", [2, 3])
def test_grid_reduction_counts_cliques(name, k):
    G = GRID_GRAPHS[name]
    r = grid_reduction(G, k)
    f = partitioned_sub_poly(r.grid, r.graph)
    cliques = clique_poly_of(G, k)
    assert ones(f) == ones(cliques) == sum(
        all(G.has_edge(u, v) for u, v in itertools.combinations(C, 2))
        for C in itertools.combinations(range(G.n), k))
    assert project(f, r.projection(), r.target_size()) == cliques


def test_grid_reduction_known_counts():
    assert ones(partitioned_sub_poly(*reversed_pair(grid_reduction(Graph.complete(4), 2)))) == 6
    assert ones(partitioned_sub_poly(*reversed_pair(grid_reduction(Graph.complete(5), 3)))) == 10


def reversed_pair(r):
    return r.grid, r.graph


@pytest.mark.parametrize("k", [2, 3])
def test_unordered_grid_counts_every_labelling(k):
    G = Graph.complete(4)
    r = grid_reduction(G, k, ordered=False)
    f = partitioned_sub_poly(r.grid, r.graph)
    assert ones(f) == factorial(k) * comb(4, k)


def test_grid_projection_injective_on_supports():
    r = grid_reduction(petersen_six(), 2)
    f = partitioned_sub_poly(r.grid, r.graph)
    images = [project(type(f)(f.n_vars, {e: 1}, f.ctx), r.projection(), r.target_size()) for e, _ in f]
    assert len({tuple(sorted(g.terms)) for g in images}) == len(images)


def test_grid_reduction_needs_k2():
    with pytest.raises(ValueError):
        grid_reduction(Graph.complete(3), 1)


# minor expansion ---------------------------------------------------------------------


def colored_random_graph(rng, colors, per_color, p_edge=0.6):
    n = colors * per_color
    vc = {v: v // per_color for v in range(n)}
    edges = {(u, v) for u, v in itertools.combinations(range(n), 2) if vc[u] != vc[v] and rng.random() < p_edge}
    return Graph(n, frozenset(edges), vertex_colors=vc)


def test_minor_identity_model(rng):
    H = Graph.path(3)
    G = colored_random_graph(rng, 3, 2)
    m = minor_expand(G, H, H, [[], [0], [1], [2]])
    assert m.graph.n == G.n
    relabel = {v: lab[1] for v, lab in enumerate(m.labels)}
    relevant = {(u, v) for u, v in G.edges if H.has_edge(G.vertex_colors[u], G.vertex_colors[v])}
    assert {tuple(sorted((relabel[u], relabel[v]))) for u, v in m.graph.edges} == relevant
    Hc = Graph(3, H.edges, vertex_colors={0: 0, 1: 1, 2: 2})
    f = partitioned_sub_poly(Hc, m.graph)
    g = partitioned_sub_poly(Graph(3, H.edges, vertex_colors={0: 0, 1: 1, 2: 2}), G)
    assert project(f, m.projection(), g.n_vars) == g


@pytest.mark.parametrize("seed", range(5))
def test_minor_edge_block(seed):
    rng = np.random.default_rng(seed)
    H = Graph.complete(2)
    Hp = Graph.path(3)
    G = colored_random_graph(rng, 2, 2, 0.7)
    m = minor_expand(G, H, Hp, [[], [0, 1], [2]])
    for v in range(G.n):
        if G.vertex_colors[v] == 0:
            block = [x for x, lab in enumerate(m.labels) if lab[1] == v]
            assert len(block) == 2 and m.graph.has_edge(*block)
    Hpc = Graph(3, Hp.edges, vertex_colors={0: 0, 1: 1, 2: 2})
    Hc = Graph(2, H.edges, vertex_colors={0: 0, 1: 1})
    f = partitioned_sub_poly(Hpc, m.graph)
    g = partitioned_sub_poly(Hc, G)
    assert project(f, m.projection(), g.n_vars) == g


def test_minor_apex_block(rng):
    H = Graph.complete(2)
    Hp = Graph(3, frozenset({(0, 1), (0, 2), (1, 2)}))
    G = colored_random_graph(rng, 2, 2)
    m = minor_expand(G, H, Hp, [[2], [0], [1]])
    apex = [x for x, lab in enumerate(m.labels) if lab[0] == "B0"]
    assert len(apex) == 1
    assert all(m.graph.has_edge(apex[0], y) for y in range(m.graph.n) if y != apex[0])
    f = partitioned_sub_poly(Graph(3, Hp.edges, vertex_colors={0: 0, 1: 1, 2: 2}), m.graph)
    g = partitioned_sub_poly(Graph(2, H.edges, vertex_colors={0: 0, 1: 1}), G)
    assert project(f, m.projection(), g.n_vars) == g


def test_minor_model_validation():
    H = Graph.complete(2)
    Hp = Graph.path(3)
    G = Graph(2, frozenset({(0, 1)}), vertex_colors={0: 0, 1: 1})
    with pytest.raises(InvalidMinorModel):
        minor_expand(G, H, Hp, [[], [0, 2], [1]])  # B_1 disconnected
    with pytest.raises(InvalidMinorModel):
        minor_expand(G, H, Hp, [[], [0], [2]])  # not a partition
    with pytest.raises(InvalidMinorModel):
        minor_expand(G, H, Hp, [[0], [1]])  # wrong number of sets
    with pytest.raises(InvalidMinorModel):
        minor_expand(G, H, Hp, [[1], [0], [2]])  # no edge between B_1 and B_2


# matchings ---------------------------------------------------------------------------


def test_colored_path_shares_vertex():
    G = Graph(3, frozenset({(0, 1), (1, 2)}), edge_colors={(0, 1): "r", (1, 2): "b"})
    assert colored_matching_poly(G, ["r", "b"]).is_zero()
    assert matchings_incl_excl(G, ["r", "b"]).is_zero()


def test_colored_disjoint_edges():
    G = Graph(4, frozenset({(0, 1), (2, 3)}), edge_colors={(0, 1): "r", (2, 3): "b"})
    assert ones(colored_matching_poly(G, ["r", "b"])) == 1
    assert matchings_incl_excl(G, ["r", "b"]) == colored_matching_poly(G, ["r", "b"])


def test_empty_color_set_is_empty_matching():
    G = Graph(2, frozenset({(0, 1)}), edge_colors={(0, 1): "r"})
    f = matchings_incl_excl(G, [])
    assert f == colored_matching_poly(G, []) and ones(f) == 1 and f.degree() == 0


def random_colored_bipartite(rng, a, b, colors, p_edge=0.6):
    edges, ecol = set(), {}
    for u in range(a):
        for v in range(a, a + b):
            if rng.random() < p_edge:
                edges.add((u, v))
                ecol[(u, v)] = int(rng.integers(colors))
    return Graph(a + b, frozenset(edges), edge_colors=ecol)


def test_incl_excl_matches_direct(rng):
    for _ in range(50):
        a, b = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        G = random_colored_bipartite(rng, a, b, 5)
        X = sorted({int(x) for x in rng.choice(5, int(rng.integers(0, 5)), replace=False)})
        assert matchings_incl_excl(G, X) == colored_matching_poly(G, X)


def test_too_many_colors():
    with pytest.raises(TooManyColors):
        matchings_incl_excl(Graph(2), range(13))


def k33():
    return Graph(6, frozenset((u, v) for u in range(3) for v in range(3, 6)))


@pytest.mark.parametrize("Hname", ["K4", "K33"])
@pytest.mark.parametrize("seed", range(3))
def test_c6_filtered_matchings_are_partitioned_copies(Hname, seed):
    H = Graph.complete(4) if Hname == "K4" else k33()
    rng = np.random.default_rng(seed)
    G = colored_random_graph(rng, H.n, 2, 0.7)
    con: C6Construction = c6_construction(H, G)
    Hc = Graph(H.n, H.edges, vertex_colors={h: h for h in range(H.n)})
    copies = partitioned_sub_poly(Hc, G)
    filtered = con.filtered_matchings()
    assert len(filtered) == ones(copies)
    picked = {con.copies(M) for M in filtered}
    assert len(picked) == len(filtered)
    for phi in picked:
        assert all(G.has_edge(phi[u], phi[v]) for u, v in H.sorted_edges())
        assert all(G.vertex_colors[phi[h]] == h for h in range(H.n))


def test_c6_needs_cubic_pattern():
    with pytest.raises(ValueError):
        c6_construction(Graph.path(3), Graph(1, vertex_colors={0: 0}))


def test_c6_graph_shape():
    H = Graph.complete(4)
    G = Graph(4, frozenset(itertools.combinations(range(4), 2)), vertex_colors={v: v for v in range(4)})
    con = c6_construction(H, G)
    assert con.graph.n == 24 and len(con.graph.edges) == 24 + 6


def kab(a, b):
    return Graph(a + b, frozenset((u, v) for u in range(a) for v in range(a, a + b)))


def test_matching_to_perk_k22():
    red = matching_to_perk(kab(2, 2), [0, 1], [2, 3], 1)
    assert red.value().value == 4


@pytest.mark.parametrize("a,b", [(1, 1), (1, 2), (2, 2), (2, 3), (3, 3)])
@pytest.mark.parametrize("k", [1, 2])
def test_matching_to_perk_complete_bipartite(a, b, k):
    G = kab(a, b)
    red = matching_to_perk(G, range(a), range(a, a + b), k)
    direct = k_matching_poly(G, k)
    edge_only = [i if i < len(G.edges) else None for i in range(direct.n_vars)]
    assert red.value().value == red.multiplicity * ones(direct)
    assert red.projected_poly() == project(direct, edge_only, len(G.edges)).scale(red.multiplicity)


def test_matching_to_perk_weighted(rng):
    G = kab(2, 3)
    red = matching_to_perk(G, [0, 1], [2, 3, 4], 2)
    w = [int(x) for x in rng.integers(1, 100, size=len(G.edges))]
    f = red.projected_poly()
    assert red.value(w).value == f.evaluate(w)


def test_matching_to_perk_needs_bipartition():
    with pytest.raises(ValueError):
        matching_to_perk(kab(2, 2), [0], [2, 3], 1)
    with pytest.raises(ValueError):
        matching_to_perk(Graph.complete(3), [0], [1, 2], 1)
