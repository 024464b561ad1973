"""Named verification suites shared by the CLI and the acceptance tests.

Every suite is deterministic for a given seed and returns a SuiteReport with
the first counterexample it met, if any.
"""

from __future__ import annotations

import functools
import itertools
import time
from dataclasses import dataclass, field
from math import comb
from typing import Callable

import numpy as np

from .boolarith import RestrictionTable, ba_eval, build_spc_ba, moebius_Q, subsets, weighted_spc_sum
from .circuit import Circuit, evaluate
from .corpus import division_suite, random_circuit, random_point, random_sparse_poly
from .cyclecover import (
    CoverPattern,
    WeightedDigraph,
    circuit_to_cyclecover,
    clique_poly_of,
    colored_matching_poly,
    coupling_identity_check,
    grid_reduction,
    k_matching_poly,
    matching_to_perk,
    matchings_incl_excl,
    partitioned_sub_poly,
    project,
)
from .exactfield import DEFAULT_FIELD, is_prime
from .families import (
    Graph,
    VariableLayout,
    all_graphs,
    clique_all_circuit,
    gen_clique,
    gen_clique_weft1,
    sun_graph,
    vc_fpt_circuit,
    vc_fpt_size_bound,
    vc_sun_circuit,
)
from .polyoracle import SparsePoly, expand, restrict, spc, spc_by_inclusion_exclusion
from .sums import (
    bounded_sum_poly,
    compose_double_sum,
    count_weight_models,
    double_sum_eval,
    factored_sum_eval,
    gadget_bipartite,
    gadget_general,
    pair_equation_solutions,
)
from .transforms import eliminate_divisions, homogeneous_extract, weft1_normal_form


@dataclass
class SuiteReport:
    name: str
    header: str
    checks: int = 0
    failures: int = 0
    counterexample: str | None = None
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.checks > 0

    def check(self, ok: bool, witness: Callable[[], str] | str = "") -> bool:
        self.checks += 1
        if not ok:
            self.failures += 1
            if self.counterexample is None:
                self.counterexample = witness() if callable(witness) else witness
        return ok

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.header} ({self.checks - self.failures}/{self.checks} checks)"

    def to_json(self) -> dict:
        return {
            "suite": self.name,
            "header": self.header,
            "passed": self.passed,
            "checks": self.checks,
            "failures": self.failures,
            "counterexample": self.counterexample,
            "details": self.details,
        }


def _timed(fn):
    @functools.wraps(fn)
    def run(*args, **kwargs) -> SuiteReport:
        t0 = time.perf_counter()
        rep = fn(*args, **kwargs)
        rep.seconds = time.perf_counter() - t0
        return rep

    return run


def _ones(f: SparsePoly) -> int:
    return f.evaluate([1] * f.n_vars)


# corpora -----------------------------------------------------------------------


def weft1_corpus(seed: int, count: int = 100) -> list[Circuit]:
    """Random weft-1 circuits with at most 8 variables, 4 <= size <= 40 and depth <= 6."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        c = random_circuit(rng, n_vars=int(rng.integers(1, 9)), max_size=40, max_depth=6, max_weft=1)
        m = c.metrics
        if 4 <= m.size <= 40 and m.depth <= 6 and m.weft <= 1:
            out.append(c)
    return out


def small_circuit_corpus(seed: int, count: int = 60) -> list[tuple[Circuit, list[int]]]:
    """Circuits with 2 <= size <= 8 and depth <= 4, each with a random point."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        c = random_circuit(rng, n_vars=int(rng.integers(1, 4)), max_size=8, max_depth=4, max_weft=2)
        if 2 <= c.metrics.size <= 8 and c.metrics.depth <= 4:
            out.append((c, random_point(rng, c.n_vars)))
    return out


# suites ------------------------------------------------------------------------


@_timed
def pair_equations(seed: int = 0, max_k: int = 100) -> SuiteReport:
    """a + b + c = k^2 + 2k with ab = c has only (k, k, k^2) when k + 1 is prime."""
    rep = SuiteReport("pair-equations", "ab = c, a + b + c = k^2 + 2k forces a = b = k for prime k + 1")
    ks = [k for k in range(1, max_k + 1) if is_prime(k + 1)]
    for k in ks:
        sols = pair_equation_solutions(k)
        rep.check(sols == [(k, k, k * k)], lambda: f"k={k}: {sols}")
    rep.details["k_values"] = len(ks)
    return rep


@_timed
def gadget_counts(seed: int = 0) -> SuiteReport:
    """Weight-restricted model counts of the bipartite selection gadgets."""
    rep = SuiteReport("gadget-counts", "selection gadgets have C(n1,k) C(n2,s) models at weight l^2 + 2l")
    n = count_weight_models(gadget_bipartite(2, 1), 8, 3)
    rep.check(n == 4, f"gadget_bipartite(2,1): {n} models at weight 3")
    n = count_weight_models(gadget_bipartite(3, 2), 15, 8)
    rep.check(n == 9, f"gadget_bipartite(3,2): {n} models at weight 8")
    l, m, B = gadget_general(3, 3, 2, 2)
    n = count_weight_models(B, m * m + 2 * m, l * l + 2 * l)
    rep.check(n == 9, f"gadget_general(3,3,2,2): {n} models at weight {l * l + 2 * l}")
    return rep


@_timed
def compose(seed: int = 0, bodies: int = 50, points: int = 10) -> SuiteReport:
    """A double bounded sum equals the single composed sum over the gadget."""
    rep = SuiteReport("compose", "nested bounded sums equal one bounded sum over the selection gadget")
    rng = np.random.default_rng(seed)
    grid = [(p, q, k, s) for p in (1, 2, 3) for q in (1, 2, 3) for k in (1, 2) for s in (1, 2)
            if k <= p and k <= s <= q]
    for t in range(bodies):
        p, q, k, s = grid[t % len(grid)]
        n_free = int(rng.integers(0, 3))
        f = random_circuit(rng, n_vars=n_free + p + q, max_size=20, max_depth=4, max_weft=1)
        spec = compose_double_sum(f, p, q, k, s)
        for _ in range(points):
            x = random_point(rng, n_free)
            got, want = factored_sum_eval(spec, x).value, double_sum_eval(f, p, q, k, s, x)
            rep.check(got == want, lambda: f"(p,q,k,s)={(p, q, k, s)} x={x}: composed {got} != nested {want}")
    return rep


@_timed
def normal_form(seed: int = 0, count: int = 100, points: int = 20) -> SuiteReport:
    """Five-layer weft-1 normal form: structure and pointwise agreement."""
    rep = SuiteReport("normal-form", "weft-1 circuits convert to an equivalent five-layer formula")
    rng = np.random.default_rng(seed + 1)
    for c in weft1_corpus(seed, count):
        nf = weft1_normal_form(c)
        bad = nf.violations()
        rep.check(not bad, lambda: f"{c.to_text()!r}: {bad[:3]}")
        for _ in range(points):
            x = random_point(rng, c.n_vars)
            rep.check(nf.circuit(x) == c(x), lambda: f"{c.to_text()!r} at {x}")
    return rep


@_timed
def spc_ba(seed: int = 0, count: int = 100, max_terms: int = 200, max_k: int = 3) -> SuiteReport:
    """BA-formula support components against expanded polynomials."""
    rep = SuiteReport("spc-ba", "Boolean-arithmetic sum for spc_k matches the expanded polynomial at all-ones")
    used = 0
    for c in weft1_corpus(seed, count):
        f = expand(c)
        if len(f) > max_terms:
            continue
        used += 1
        nf = weft1_normal_form(c)
        for k in range(max_k + 1):
            got = ba_eval(build_spc_ba(nf, k, True), [0] * c.n_vars).value
            want = spc(f, k)([1] * c.n_vars)
            rep.check(got == want, lambda: f"k={k} {c.to_text()!r}: BA {got} != {want}")
        if c.n_vars <= 6:
            for k in range(min(max_k, c.n_vars) + 1):
                rep.check(spc_by_inclusion_exclusion(f, k) == spc(f, k),
                          lambda: f"inclusion-exclusion k={k} {c.to_text()!r}")
    rep.details["circuits"] = used
    return rep


@_timed
def moebius(seed: int = 0, count: int = 100) -> SuiteReport:
    """Products of Moebius factors telescope to the restriction (or 1 when it vanishes)."""
    rep = SuiteReport("moebius", "product of Moebius factors over subsets of A equals f|_A, or 1 if f|_A = 0")
    rng = np.random.default_rng(seed)
    P = DEFAULT_FIELD.p
    zero_cases = 0
    for trial in range(count):
        n = int(rng.integers(1, 5))
        f = random_sparse_poly(rng, n, 3, terms=int(rng.integers(1, 6)))
        if trial % 3 == 0:
            f = SparsePoly(n, {e: c for e, c in f.terms.items() if any(e)})
        if f.is_zero():
            f = SparsePoly.var(n, 0)
        table = RestrictionTable.from_polys({0: f})
        x = random_point(rng, n)
        for r in range(min(3, n) + 1):
            for A in itertools.combinations(range(n), r):
                lhs = 1
                for B in subsets(A):
                    lhs = lhs * moebius_Q(table, 0, B, at_ones=False)(x) % P
                fa = restrict(f, A)(x)
                zero_cases += fa == 0
                rep.check(lhs == (fa if fa else 1), lambda: f"f={f.to_text()!r} A={A} x={x}")
    rep.details["zero_restrictions"] = zero_cases
    if zero_cases == 0:
        rep.check(False, "no zero-restriction case was exercised")
    return rep


@_timed
def weighted_spc(seed: int = 0, count: int = 100) -> SuiteReport:
    """Binomially weighted support components equal the direct bounded sum."""
    rep = SuiteReport("weighted-spc", "sum over ones(m,k) of g equals sum_l C(m-l,k-l) spc_l(g)(1..1)")
    rng = np.random.default_rng(seed)
    P = DEFAULT_FIELD.p
    for _ in range(count):
        m = int(rng.integers(1, 9))
        g = random_sparse_poly(rng, m, 4, terms=int(rng.integers(1, 8)))
        k = int(rng.integers(0, min(4, m) + 1))
        direct = sum(g([int(i in S) for i in range(m)]) for S in itertools.combinations(range(m), k)) % P
        try:
            got = weighted_spc_sum(g, k)
        except AssertionError as e:
            got = str(e)
        rep.check(got == direct, lambda: f"m={m} k={k} g={g.to_text()!r}: {got} != {direct}")
    return rep


def _brute_vc(G: Graph, k: int, n_vars: int | None = None) -> SparsePoly:
    n = G.n
    terms = {}
    for C in itertools.combinations(range(n), k):
        if all(u in C or v in C for u, v in G.edges):
            terms[tuple(int(v in C) for v in range(n))] = 1
    return SparsePoly(n if n_vars is None else n_vars, terms)


@_timed
def vc(seed: int = 0, max_n: int = 5, max_k: int = 3) -> SuiteReport:
    """Vertex-cover circuits against brute-force cover enumeration."""
    rep = SuiteReport("vc", "bounded-search and sun-graph vertex-cover circuits expand to the cover polynomial")
    ratios = []
    for n in range(1, max_n + 1):
        L = VariableLayout(n)
        for G in all_graphs(n):
            for k in range(min(max_k, n) + 1):
                want = _brute_vc(G, k)
                c = vc_fpt_circuit(G, k)
                rep.check(expand(c) == want, lambda: f"vc_fpt n={n} k={k} edges={G.sorted_edges()}")
                size, bound = c.size(), vc_fpt_size_bound(n, k)
                rep.check(size <= bound, lambda: f"vc_fpt size {size} > bound {bound} at n={n} k={k}")
                ratios.append(size / (3**k * (n + 1) ** 3))
        for k in range(1, min(max_k, n // 2) + 1):  # sun graphs need n >= 2k
            S = sun_graph(n, k)
            sun = vc_sun_circuit(n, k)
            f = expand(sun)
            for G in all_graphs(n):
                sub = Graph(n, G.edges & S.edges)
                want = _brute_vc(sub, k)
                got = project_vc(f, L, G, n)
                rep.check(got == want, lambda: f"vc_sun n={n} k={k} edges={G.sorted_edges()}")
    rep.details["max_size_over_3k_n1cubed"] = round(max(ratios), 4)
    return rep


def project_vc(f: SparsePoly, L: VariableLayout, G: Graph, n: int) -> SparsePoly:
    """Substitute E_uv by the adjacency bit of G, keeping X_v symbolic."""
    terms: dict[tuple[int, ...], int] = {}
    p = f.ctx.p
    for e, c in f.terms.items():
        if any(e[L.e(u, v)] and not G.has_edge(u, v) for u, v in itertools.combinations(range(n), 2)):
            continue
        key = tuple(e[L.x(v)] for v in range(n))
        terms[key] = (terms.get(key, 0) + c) % p
    return SparsePoly(n, terms, f.ctx)


@_timed
def clique(seed: int = 0) -> SuiteReport:
    """The weft-1 clique sum and homogeneous extraction against the clique generator."""
    rep = SuiteReport("clique", "weft-1 bounded sum and degree extraction both give the clique polynomial")
    for n in range(1, 6):
        for k in range(1, min(3, n) + 1):
            _, spec = gen_clique_weft1(n, k)
            rep.check(bounded_sum_poly(spec) == gen_clique(n, k), f"weft-1 sum n={n} k={k}")
    for n in range(1, 5):
        c = clique_all_circuit(n)
        for k in range(n + 1):
            deg = comb(k, 2) + k
            rep.check(expand(homogeneous_extract(c, deg)) == gen_clique(n, k), f"extraction n={n} k={k}")
    return rep


@_timed
def division(seed: int = 0, count: int = 20, points: int = 20) -> SuiteReport:
    """Division elimination on circuits with known polynomial values."""
    rep = SuiteReport("division", "division-free circuit after elimination matches the known polynomial")
    rng = np.random.default_rng(seed)
    for c, want in division_suite(rng, count=count):
        e = eliminate_divisions(c, want.degree())
        rep.check(not e.division_bearing, f"{c.to_text()!r} still divides")
        for _ in range(points):
            x = random_point(rng, c.n_vars)
            rep.check(e(x) == want(x), lambda: f"{c.to_text()!r} at {x}")
    return rep


@_timed
def cyclecover(seed: int = 0, count: int = 60, max_k: int = 2, budget: float = 60.0) -> SuiteReport:
    """Normalized pattern cover sums of the cycle-cover construction against evaluation."""
    rep = SuiteReport("cyclecover", "normalized cycle-cover sum equals the circuit value")
    t0 = time.perf_counter()
    biggest = 0
    for c, x in small_circuit_corpus(seed, count):
        for k in range(max_k + 1):
            inst = circuit_to_cyclecover(c, k, x)
            biggest = max(biggest, inst.graph.n)
            got, want = inst.normalized_sum().value, evaluate(c, x).value
            rep.check(got == want, lambda: f"k={k} {c.to_text()!r} at {x}: {got} != {want}")
    elapsed = time.perf_counter() - t0
    rep.check(elapsed <= budget, f"took {elapsed:.1f}s > {budget}s")
    rep.details["max_vertices"] = biggest
    return rep


def _loop_digraphs(n: int):
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    for mask in range(1 << len(pairs)):
        g = WeightedDigraph(n)
        for v in range(n):
            g.add_edge(v, v, v + 2)
        for t, (u, v) in enumerate(pairs):
            if mask >> t & 1:
                g.add_edge(u, v, 3 + 5 * t)
        yield g


def _random_digraph(rng, n: int) -> WeightedDigraph:
    g = WeightedDigraph(n)
    for u in range(n):
        for v in range(n):
            if u == v or rng.random() < 0.5:
                g.add_edge(u, v, int(rng.integers(1, 1000)))
    return g


COUPLING_PATTERNS = {
    "figure": lambda big: [CoverPattern(0, big)],
    "graded": lambda big: [CoverPattern(0, big), CoverPattern(5, big), CoverPattern(6, 8), CoverPattern(0, 4)],
}


@_timed
def coupling(seed: int = 0, samples: int = 3, random_graphs: int = 25) -> SuiteReport:
    """Iff couplings: spliced cover sums equal the all-or-nothing base sums.

    Every digraph on at most 3 vertices (loops everywhere) is checked with all
    single couplings and ``samples`` random choices for m = 2, 3; digraphs on 4
    and 5 vertices are sampled. The drawn gadget is checked without length
    constraints, the graded gadget also under distinguished-length patterns.
    The drawn gadget's failures under length patterns are counted separately.
    """
    rep = SuiteReport("coupling", "iff-coupled edges are used all together or not at all")
    rng = np.random.default_rng(seed)
    figure_length_fail = figure_length_total = 0

    def run(g: WeightedDigraph, main: int, coupled: list[int]):
        nonlocal figure_length_fail, figure_length_total
        big = g.n + 4 * len(coupled) + 2
        for gadget, pats in COUPLING_PATTERNS.items():
            for pat in pats(big):
                r = coupling_identity_check(g, main, coupled, pat, gadget=gadget)
                rep.check(r.ok, lambda: f"{gadget} {pat} main={main} coupled={coupled}: {r}\n{g.to_text()}")
        r = coupling_identity_check(g, main, coupled, CoverPattern(5, big))
        figure_length_total += 1
        figure_length_fail += not r.ok

    cases = []
    for n in (1, 2, 3):
        for g in _loop_digraphs(n):
            E = len(g.edges)
            for main, other in itertools.permutations(range(E), 2):
                cases.append((g, main, [other]))
            for m in (2, 3):
                if E >= m + 1:
                    for _ in range(samples):
                        idx = [int(i) for i in rng.choice(E, m + 1, replace=False)]
                        cases.append((g, idx[0], idx[1:]))
    for n in (4, 5):
        for _ in range(random_graphs):
            g = _random_digraph(rng, n)
            for m in (1, 2, 3):
                idx = [int(i) for i in rng.choice(len(g.edges), m + 1, replace=False)]
                cases.append((g, idx[0], idx[1:]))
    for g, main, coupled in cases:
        run(g, main, coupled)
    rep.details.update({
        "cases": len(cases),
        "figure_gadget_length_pattern_failures": f"{figure_length_fail}/{figure_length_total}",
    })
    return rep


def petersen_six() -> Graph:
    """Induced subgraph of the Petersen graph on the outer 5-cycle and one inner vertex."""
    outer = [(i, (i + 1) % 5) for i in range(5)]
    return Graph(6, frozenset(outer + [(0, 5)]))


def _random_colored_bipartite(rng, a: int, b: int, colors: int) -> Graph:
    edges, ecol = set(), {}
    for u in range(a):
        for v in range(a, a + b):
            if rng.random() < 0.6:
                edges.add((u, v))
                ecol[(u, v)] = int(rng.integers(colors))
    return Graph(a + b, frozenset(edges), edge_colors=ecol)


@_timed
def reduction(seed: int = 0, matching_graphs: int = 50) -> SuiteReport:
    """Grid, colored-matching and bipartite-matching reductions against direct counts."""
    rep = SuiteReport("reduction", "grid copies count cliques; colored matchings; matchings as cycle covers")
    graphs = {"K4": Graph.complete(4), "K5": Graph.complete(5), "C5": Graph.cycle(5), "petersen6": petersen_six()}
    for name, G in graphs.items():
        for k in (2, 3):
            r = grid_reduction(G, k)
            f = partitioned_sub_poly(r.grid, r.graph)
            want = clique_poly_of(G, k)
            rep.check(_ones(f) == _ones(want), lambda: f"grid {name} k={k}: {_ones(f)} != {_ones(want)}")
            rep.check(project(f, r.projection(), r.target_size()) == want, f"grid projection {name} k={k}")
    rng = np.random.default_rng(seed)
    for _ in range(matching_graphs):
        a, b = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        G = _random_colored_bipartite(rng, a, b, 5)
        X = sorted(int(v) for v in rng.choice(5, int(rng.integers(0, 5)), replace=False))
        rep.check(matchings_incl_excl(G, X) == colored_matching_poly(G, X),
                  lambda: f"colored matchings X={X}\n{G.to_text()}")
    for a in range(1, 4):
        for b in range(1, 4):
            G = Graph(a + b, frozenset((u, v) for u in range(a) for v in range(a, a + b)))
            for k in (1, 2):
                red = matching_to_perk(G, range(a), range(a, a + b), k)
                want = red.multiplicity * _ones(k_matching_poly(G, k))
                got = red.value().value
                rep.check(got == want, lambda: f"K_{a},{b} k={k}: {got} != {want}")
    return rep


SUITES: dict[str, Callable[..., SuiteReport]] = {
    "pair-equations": pair_equations,
    "gadget-counts": gadget_counts,
    "compose": compose,
    "normal-form": normal_form,
    "spc-ba": spc_ba,
    "moebius": moebius,
    "weighted-spc": weighted_spc,
    "vc": vc,
    "clique": clique,
    "division": division,
    "cyclecover": cyclecover,
    "coupling": coupling,
    "reduction": reduction,
}
