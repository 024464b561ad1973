"""Parameterized polynomial families.

Each family comes as an oracle :class:`SparsePoly` built by enumeration and,
where there is a construction to check, as a :class:`Circuit`.

Variable layout: edge variables E_{i,j} (i<j, lexicographic) come first, then
the vertex variables X_i, then auxiliaries such as summation variables.
Vertices are 0-based in the Python API and 1-based in the graph file format.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, permutations, product
from math import comb
from typing import Iterable, Iterator, Sequence

import networkx as nx

from .circuit import Circuit, CircuitBuilder
from .exactfield import DEFAULT_FIELD, FieldContext
from .polyoracle import SparsePoly, inverse_vandermonde
from .sums import BoundedSumSpec

# graphs ----------------------------------------------------------------------


@dataclass(frozen=True)
class Graph:
    n: int
    edges: frozenset = frozenset()
    directed: bool = False
    edge_colors: dict = field(default_factory=dict, compare=False, hash=False)
    vertex_colors: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        norm = set()
        for e in self.edges:
            u, v = e
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge {e} out of range for {self.n} vertices")
            if self.directed:
                norm.add((u, v))
            else:
                if u == v:
                    raise ValueError("undirected graphs have no self-loops")
                norm.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(norm))

    def has_edge(self, u: int, v: int) -> bool:
        if self.directed:
            return (u, v) in self.edges
        return (min(u, v), max(u, v)) in self.edges

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def adjacency(self) -> list[list[int]]:
        a = [[0] * self.n for _ in range(self.n)]
        for u, v in self.edges:
            a[u][v] = 1
            if not self.directed:
                a[v][u] = 1
        return a

    def neighbors(self) -> list[list[int]]:
        """Sorted neighbour lists (out-neighbours when directed)."""
        nb: list[set[int]] = [set() for _ in range(self.n)]
        for u, v in self.edges:
            nb[u].add(v)
            if not self.directed:
                nb[v].add(u)
        return [sorted(x) for x in nb]

    def to_networkx(self) -> nx.Graph:
        g = nx.DiGraph() if self.directed else nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return g

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(n, frozenset(combinations(range(n), 2)))

    @classmethod
    def cycle(cls, n: int) -> "Graph":
        return cls(n, frozenset((i, (i + 1) % n) for i in range(n)))

    @classmethod
    def path(cls, n: int) -> "Graph":
        return cls(n, frozenset((i, i + 1) for i in range(n - 1)))

    def to_text(self) -> str:
        lines = [f"N {self.n}" + (" DIRECTED" if self.directed else "")]
        for u, v in self.sorted_edges():
            col = self.edge_colors.get((u, v))
            lines.append(f"E {u + 1} {v + 1}" + (f" {col}" if col is not None else ""))
        for v in sorted(self.vertex_colors):
            lines.append(f"VC {v + 1} {self.vertex_colors[v]}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Graph":
        rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        if not rows or rows[0][0] != "N" or len(rows[0]) not in (2, 3):
            raise ValueError("graph file must start with 'N <n> [DIRECTED]'")
        n = int(rows[0][1])
        directed = len(rows[0]) == 3
        if directed and rows[0][2] != "DIRECTED":
            raise ValueError(f"bad header {' '.join(rows[0])!r}")
        edges, ecol, vcol = [], {}, {}
        for r in rows[1:]:
            if r[0] == "E" and len(r) in (3, 4):
                u, v = int(r[1]) - 1, int(r[2]) - 1
                key = (u, v) if directed else (min(u, v), max(u, v))
                edges.append(key)
                if len(r) == 4:
                    ecol[key] = _color(r[3])
            elif r[0] == "VC" and len(r) == 3:
                vcol[int(r[1]) - 1] = _color(r[2])
            else:
                raise ValueError(f"bad graph line {' '.join(r)!r}")
        return cls(n, frozenset(edges), directed, ecol, vcol)


def _color(tok: str):
    try:
        return int(tok)
    except ValueError:
        return tok


def sun_graph(n: int, k: int) -> Graph:
    """Nodes 0..2k-1 form a clique; every later node is joined to all of them."""
    if n < 2 * k:
        raise ValueError("sun graph needs n >= 2k")
    core = range(2 * k)
    edges = set(combinations(core, 2))
    edges |= {(i, j) for i in core for j in range(2 * k, n)}
    return Graph(n, frozenset(edges))


def all_graphs(n: int) -> Iterator[Graph]:
    pairs = list(combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        yield Graph(n, frozenset(p for i, p in enumerate(pairs) if mask >> i & 1))


# variable layout -------------------------------------------------------------


class VariableLayout:
    """E block (pairs i<j), then X block, then named auxiliary blocks."""

    def __init__(self, n: int, edge_vars: bool = True, x_vars: bool = True):
        self.n = n
        self.pairs = list(combinations(range(n), 2)) if edge_vars else []
        self._pair_index = {p: i for i, p in enumerate(self.pairs)}
        self.x_offset = len(self.pairs)
        self.size = self.x_offset + (n if x_vars else 0)
        self.blocks: dict[str, tuple[int, int]] = {}

    def e(self, i: int, j: int) -> int:
        return self._pair_index[(min(i, j), max(i, j))]

    def x(self, i: int) -> int:
        return self.x_offset + i

    def add_block(self, name: str, length: int) -> int:
        self.blocks[name] = (self.size, length)
        self.size += length
        return self.blocks[name][0]

    def aux(self, name: str, i: int) -> int:
        start, length = self.blocks[name]
        if not 0 <= i < length:
            raise IndexError(f"{name}[{i}] out of range")
        return start + i

    def point_from_graph(self, g: Graph, x: Sequence[int] | None = None) -> list[int]:
        """Assignment with E set to the adjacency matrix of ``g`` and X to ``x``."""
        pt = [0] * self.size
        for i, (u, v) in enumerate(self.pairs):
            pt[i] = int(g.has_edge(u, v))
        xs = x if x is not None else [1] * self.n
        for i in range(self.n):
            pt[self.x(i)] = xs[i]
        return pt


# clique ----------------------------------------------------------------------


def _mono(n_vars: int, idx: Iterable[int]) -> tuple[int, ...]:
    e = [0] * n_vars
    for i in idx:
        e[i] += 1
    return tuple(e)


def gen_clique(n: int, k: int, ctx: FieldContext = DEFAULT_FIELD) -> SparsePoly:
    """Sum over k-subsets C of prod_{i<j in C} E_ij prod_{i in C} X_i."""
    L = VariableLayout(n)
    terms = [
        (_mono(L.size, [L.e(i, j) for i, j in combinations(C, 2)] + [L.x(i) for i in C]), 1)
        for C in combinations(range(n), k)
    ]
    return SparsePoly(L.size, terms, ctx)


def gen_clique_all(n: int, ctx: FieldContext = DEFAULT_FIELD) -> SparsePoly:
    """The unparameterized clique polynomial: the same sum over all subsets."""
    total = SparsePoly(VariableLayout(n).size, {}, ctx)
    for k in range(n + 1):
        total = total + gen_clique(n, k, ctx)
    return total


def clique_eval(adjacency: Sequence[Sequence[int]], node_weights: Sequence[int], k: int, ctx: FieldContext = DEFAULT_FIELD) -> int:
    """Sum over k-cliques of the product of node weights, by backtracking."""
    n = len(adjacency)
    p = ctx.p
    if any(adjacency[i][j] != adjacency[j][i] for i in range(n) for j in range(n)):
        raise ValueError("adjacency matrix must be symmetric")
    nbrs = [{j for j in range(n) if j != i and adjacency[i][j]} for i in range(n)]

    def go(cands: list[int], need: int, w: int) -> int:
        if need == 0:
            return w
        total = 0
        for idx, v in enumerate(cands):
            if len(cands) - idx < need:
                break
            rest = [u for u in cands[idx + 1 :] if u in nbrs[v]]
            total += go(rest, need - 1, w * node_weights[v] % p)
        return total % p

    return go(list(range(n)), k, 1)


def gen_clique_weft1(n: int, k: int, ctx: FieldContext = DEFAULT_FIELD) -> tuple[Circuit, BoundedSumSpec]:
    """Weft-1 formula g(E, X, v) whose sum over v in ones(n, k) is the clique polynomial.

    g = prod_{i<j} (E_ij v_i v_j + 1 - v_i v_j) * prod_i (X_i v_i + 1 - v_i).
    """
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    L = VariableLayout(n)
    L.add_block("v", n)
    b = CircuitBuilder(L.size, ctx=ctx)

    def switched(value: int, sw: int) -> int:
        # value * sw + 1 - sw with bounded fan-in gates
        on = b.mul(value, sw)
        return b.add(b.add(on, b.const(1)), b.neg(sw))

    edge_factors = []
    for i, j in L.pairs:
        vv = lambda: b.mul(b.input(L.aux("v", i)), b.input(L.aux("v", j)))  # noqa: E731
        on = b.mul(b.input(L.e(i, j)), vv())
        edge_factors.append(b.add(b.add(on, b.const(1)), b.neg(vv())))
    node_factors = [switched(b.input(L.x(i)), b.input(L.aux("v", i))) for i in range(n)]
    parts = [_product(b, edge_factors), _product(b, node_factors)]
    g = b.build(b.mul(*parts))
    return g, BoundedSumSpec(g, n, k)


def _product(b: CircuitBuilder, factors: list[int]) -> int:
    if not factors:
        return b.const(1)
    if len(factors) == 1:
        return b.mul(factors[0])
    return b.mul(factors)


def clique_all_circuit(n: int, ctx: FieldContext = DEFAULT_FIELD) -> Circuit:
    """Circuit for the unparameterized clique polynomial.

    Sums the weft-1 body over every v in {0,1}^n with v substituted by
    constants; exponential in n and meant for small n only.
    """
    L = VariableLayout(n)
    b = CircuitBuilder(L.size, ctx=ctx)
    terms = []
    for v in product((0, 1), repeat=n):
        C = [i for i in range(n) if v[i]]
        factors = [b.input(L.e(i, j)) for i, j in combinations(C, 2)]
        factors += [b.input(L.x(i)) for i in C]
        terms.append(_product(b, factors))
    return b.build(b.add(terms))


# vertex cover ----------------------------------------------------------------


def gen_vc(graph_or_n: Graph | int, k: int, edges: Iterable[tuple[int, int]] | None = None,
           ctx: FieldContext = DEFAULT_FIELD) -> SparsePoly:
    """Vertex cover polynomials.

    With a :class:`Graph`: sum over size-k vertex covers of prod X_i, over the
    n X variables only. With an integer n: the generic polynomial
    sum_{|C|=k} prod_{i<j not in C} (1 - E_ij) prod_{i in C} X_i over the
    E-then-X layout; ``edges`` restricts the uncovered-pair product to the
    given pairs (the remaining E variables stay in the layout unused).
    """
    if isinstance(graph_or_n, Graph):
        g = graph_or_n
        terms = []
        for C in combinations(range(g.n), k):
            s = set(C)
            if all(u in s or v in s for u, v in g.edges):
                terms.append((_mono(g.n, C), 1))
        return SparsePoly(g.n, terms, ctx)
    n = graph_or_n
    L = VariableLayout(n)
    allowed = None if edges is None else {(min(u, v), max(u, v)) for u, v in edges}
    total = SparsePoly(L.size, {}, ctx)
    one = SparsePoly.const(L.size, 1, ctx)
    for C in combinations(range(n), k):
        s = set(C)
        term = SparsePoly(L.size, {_mono(L.size, [L.x(i) for i in C]): 1}, ctx)
        for i, j in L.pairs:
            if i in s or j in s or (allowed is not None and (i, j) not in allowed):
                continue
            term = term * (one - SparsePoly.var(L.size, L.e(i, j), ctx))
        total = total + term
    return total


def _elementary_symmetric(b: CircuitBuilder, xs: list[int], k: int) -> int:
    """e_k(xs) as the coefficient of t^(m-k) in prod (t + x_i), by interpolation."""
    m = len(xs)
    if k > m or k < 0:
        return b.const(0)
    if k == 0:
        return b.const(1)
    nodes = list(range(1, m + 2))
    row = inverse_vandermonde(nodes, b.ctx)[m - k]
    terms = []
    for alpha, beta in zip(nodes, row):
        if beta == 0:
            continue
        factors = [b.add(b.const(alpha), x) for x in xs]
        terms.append(b.mul(b.const(beta), _product(b, factors)))
    return b.add(terms) if terms else b.const(0)


def vc_fpt_circuit(graph: Graph, k: int, edge_order: Sequence[tuple[int, int]] | None = None,
                   ctx: FieldContext = DEFAULT_FIELD) -> Circuit:
    """Branching circuit for the vertex cover polynomial of ``graph``.

    Branch on the first remaining edge {u,v}:
    X_u P(G-u, k-1) + X_v P(G-v, k-1) - X_u X_v P(G-u-v, k-2); with no edges
    left the answer is the elementary symmetric polynomial of the remaining
    vertices. Subproblems are shared.
    """
    order = list(edge_order) if edge_order is not None else graph.sorted_edges()
    order = [(min(u, v), max(u, v)) for u, v in order]
    if set(order) != set(graph.edges):
        raise ValueError("edge_order must list every edge once")
    b = CircuitBuilder(graph.n, ctx=ctx, share_leaves=True)
    memo: dict[tuple[frozenset, int], int] = {}

    def P(removed: frozenset, kk: int) -> int:
        key = (removed, kk)
        if key in memo:
            return memo[key]
        remaining = [e for e in order if e[0] not in removed and e[1] not in removed]
        if kk < 0:
            out = b.const(0)
        elif kk == 0:
            out = b.const(0 if remaining else 1)
        elif not remaining:
            out = _elementary_symmetric(
                b, [b.input(v) for v in range(graph.n) if v not in removed], kk
            )
        else:
            u, v = remaining[0]
            xu, xv = b.input(u), b.input(v)
            t1 = b.mul(xu, P(removed | {u}, kk - 1))
            t2 = b.mul(xv, P(removed | {v}, kk - 1))
            t3 = b.mul(b.const(-1), b.mul(b.mul(xu, xv), P(removed | {u, v}, kk - 2)))
            out = b.add(b.add(t1, t2), t3)
        memo[key] = out
        return out

    return b.build(P(frozenset(), k))


def vc_fpt_size_bound(n: int, k: int) -> int:
    """The 3^k * poly(n) shape against which vc_fpt_circuit sizes are measured."""
    return 3**k * (n + 1) ** 3


def vc_sun_circuit(n: int, k: int, ctx: FieldContext = DEFAULT_FIELD) -> Circuit:
    """Vertex cover polynomial of the sun graph S_{n,k} (E-then-X layout over n nodes).

    Sums over C within the 2k core nodes with |C| <= k; the outer nodes
    contribute the degree-(k-|C|) part in X of
    prod_{j outer} (X_j + prod_{i in core minus C} (1 - E_ij)), extracted by
    interpolation in a scaling variable.
    """
    if n < 2 * k:
        raise ValueError("sun graph needs n >= 2k")
    L = VariableLayout(n)
    b = CircuitBuilder(L.size, ctx=ctx, share_leaves=True)
    core = list(range(2 * k))
    outer = list(range(2 * k, n))
    one_minus_e = {}

    def ome(i: int, j: int) -> int:
        key = (min(i, j), max(i, j))
        if key not in one_minus_e:
            one_minus_e[key] = b.one_minus(b.input(L.e(*key)))
        return one_minus_e[key]

    D = len(outer)
    nodes = list(range(1, D + 2))
    vinv = inverse_vandermonde(nodes, ctx) if D else [[1]]
    summands = []
    for size in range(k + 1):
        for C in combinations(core, size):
            rest = [i for i in core if i not in C]
            inner = [ome(i, j) for i, j in combinations(rest, 2)] + [b.input(L.x(i)) for i in C]
            head = _product(b, inner)
            need = k - size
            if need > D:
                continue
            if D == 0:
                summands.append(head)
                continue
            p_j = {j: _product(b, [ome(i, j) for i in rest]) for j in outer}
            evals = []
            for alpha in nodes:
                factors = [b.add(b.mul(b.const(alpha), b.input(L.x(j))), p_j[j]) for j in outer]
                evals.append(_product(b, factors))
            coeffs = [
                b.mul(b.const(beta), ev) for beta, ev in zip(vinv[need], evals) if beta
            ]
            tail = b.add(coeffs) if coeffs else b.const(0)
            summands.append(b.mul(head, tail))
    return b.build(b.add(summands) if summands else b.const(0))


# permanents ------------------------------------------------------------------


def rper_var(n: int, i: int, j: int) -> int:
    """Index of X_{i,j} (row i < k, column j < n), row-major."""
    return i * n + j


def gen_rper(n: int, k: int, ctx: FieldContext = DEFAULT_FIELD) -> SparsePoly:
    """Sum over injective f: [k] -> [n] of prod_i X_{i,f(i)}."""
    if k > n:
        raise ValueError("need k <= n")
    terms = [
        (_mono(k * n, [rper_var(n, i, f[i]) for i in range(k)]), 1)
        for f in permutations(range(n), k)
    ]
    return SparsePoly(k * n, terms, ctx)


def rper_fpt_circuit(n: int, k: int, ctx: FieldContext = DEFAULT_FIELD) -> Circuit:
    """Column-streaming subset DP for the rectangular permanent, size O(2^k k n).

    D_j[S] sums the ways to place the rows in S injectively into the first j
    columns: D_j[S] = D_{j-1}[S] + sum_{i in S} X_{i,j} D_{j-1}[S - i].
    """
    if k > n:
        raise ValueError("need k <= n")
    b = CircuitBuilder(k * n, ctx=ctx, share_leaves=True)
    full = (1 << k) - 1
    D: dict[int, int] = {0: b.const(1)}
    for j in range(n):
        new = {0: D[0]}
        for S in range(1, full + 1):
            if bin(S).count("1") > j + 1:
                continue
            terms = [D[S]] if S in D else []
            for i in range(k):
                if S >> i & 1 and (S ^ (1 << i)) in D:
                    terms.append(b.mul(b.input(rper_var(n, i, j)), D[S ^ (1 << i)]))
            if terms:
                new[S] = terms[0] if len(terms) == 1 else b.add(terms)
        D = new
    return b.build(D.get(full, b.const(0)))


def perm_var(n: int, i: int, j: int) -> int:
    return i * n + j


def cycle_type(sigma: Sequence[int]) -> list[int]:
    n = len(sigma)
    seen = [False] * n
    lengths = []
    for s in range(n):
        if not seen[s]:
            length, v = 0, s
            while not seen[v]:
                seen[v] = True
                v = sigma[v]
                length += 1
            lengths.append(length)
    return lengths


def matches_pattern(sigma: Sequence[int], k: int, c: int = 1, strict: bool = False) -> bool:
    """One distinguished k-cycle; every other cycle has length <= c (== c if strict)."""
    lengths = cycle_type(sigma)
    if k not in lengths:
        return False
    lengths.remove(k)
    return all((L == c) if strict else (L <= c) for L in lengths)


def gen_perk(n: int, k: int, ctx: FieldContext = DEFAULT_FIELD) -> SparsePoly:
    """Permutations with exactly one k-cycle and all other points fixed."""
    if not 2 <= k:
        raise ValueError("need k >= 2")
    if k > n:
        return SparsePoly(n * n, {}, ctx)
    terms = []
    for C in combinations(range(n), k):
        first, rest = C[0], C[1:]
        for order in permutations(rest):
            cyc = (first,) + order
            sigma = list(range(n))
            for a, b_ in zip(cyc, cyc[1:] + cyc[:1]):
                sigma[a] = b_
            terms.append((_mono(n * n, [perm_var(n, i, sigma[i]) for i in range(n)]), 1))
    return SparsePoly(n * n, terms, ctx)


def gen_per_sparse(n: int, k: int, c: int, strict: bool = False, ctx: FieldContext = DEFAULT_FIELD) -> SparsePoly:
    """Permutations with a k-cycle whose remaining cycles all have length <= c.

    Each permutation counts once even if several of its cycles have length k.
    With ``strict`` the remaining cycles must have length exactly c.
    """
    if k < 2 or c < 1:
        raise ValueError("need k >= 2 and c >= 1")
    if k > n:
        return SparsePoly(n * n, {}, ctx)
    terms = [
        (_mono(n * n, [perm_var(n, i, s[i]) for i in range(n)]), 1)
        for s in permutations(range(n))
        if matches_pattern(s, k, c, strict)
    ]
    return SparsePoly(n * n, terms, ctx)


# grid tiling -----------------------------------------------------------------


def grid_edges(k: int) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Edges of the k x k grid on cells (i, j)."""
    out = []
    for i in range(k):
        for j in range(k):
            if i + 1 < k:
                out.append(((i, j), (i + 1, j)))
            if j + 1 < k:
                out.append(((i, j), (i, j + 1)))
    return out


def gen_grid_tiling(n: int, k: int, ctx: FieldContext = DEFAULT_FIELD) -> SparsePoly:
    """Sum over injective placements a of the k x k grid with a[0][0] below the two
    adjacent corners, of the grid edge variables times the labels X_{a_ij}."""
    if k * k > n:
        raise ValueError("need k^2 <= n")
    L = VariableLayout(n)
    cells = [(i, j) for i in range(k) for j in range(k)]
    gedges = grid_edges(k)
    terms = []
    for vals in permutations(range(n), k * k):
        a = dict(zip(cells, vals))
        if k > 1 and not (a[(0, 0)] < a[(0, k - 1)] and a[(0, 0)] < a[(k - 1, 0)]):
            continue
        idx = [L.e(a[s], a[t]) for s, t in gedges] + [L.x(v) for v in vals]
        terms.append((_mono(L.size, idx), 1))
    return SparsePoly(L.size, terms, ctx)
