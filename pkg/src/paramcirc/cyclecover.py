"""Cycle-cover polynomials, iff couplings and the matching/grid reduction chain.

Digraphs here are weighted and may have parallel edges and self-loops. A cycle
cover picks one outgoing edge per vertex so that every vertex also has exactly
one incoming edge; its weight is the product of the chosen edge weights.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from math import comb, factorial
from typing import Callable, Iterable, Iterator, Sequence

from .circuit import ADD, CONST, INPUT, MUL, Circuit, CircuitBuilder, EnumerationCapExceeded, MalformedInput
from .exactfield import DEFAULT_FIELD, FieldContext, FieldElem
from .families import Graph, _color, grid_edges
from .polyoracle import SparsePoly
from .transforms import SizeCapExceeded, to_formula

VERTEX_CAP = 10
NODE_CAP = 5_000_000
MAX_COLORS = 12


class EdgeNotFound(KeyError):
    pass


class InvalidMinorModel(ValueError):
    pass


class TooManyColors(ValueError):
    pass


# digraphs --------------------------------------------------------------------


@dataclass
class WeightedDigraph:
    """Directed multigraph with field weights; zero-weight edges are never stored.

    ``lengths`` gives each edge's contribution to cycle length (1 unless set),
    which lets a base graph stand in for a graph with subdivided edges.
    """

    n: int = 0
    ctx: FieldContext = DEFAULT_FIELD
    edges: list[tuple[int, int, int]] = field(default_factory=list)
    lengths: list[int] = field(default_factory=list)
    selectors: set[int] = field(default_factory=set)
    edge_colors: dict[int, object] = field(default_factory=dict)
    vertex_colors: dict[int, object] = field(default_factory=dict)
    labels: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.lengths) < len(self.edges):
            self.lengths += [1] * (len(self.edges) - len(self.lengths))
        if len(self.labels) < self.n:
            self.labels += list(range(len(self.labels), self.n))
        keep = [i for i, (_, _, w) in enumerate(self.edges) if w % self.ctx.p]
        if len(keep) < len(self.edges):
            self._reindex(keep)

    def _reindex(self, keep: list[int]) -> None:
        new = {old: i for i, old in enumerate(keep)}
        self.edges = [(u, v, w % self.ctx.p) for u, v, w in (self.edges[i] for i in keep)]
        self.lengths = [self.lengths[i] for i in keep]
        self.selectors = {new[i] for i in self.selectors if i in new}
        self.edge_colors = {new[i]: c for i, c in self.edge_colors.items() if i in new}

    def add_vertex(self, label=None, color=None) -> int:
        self.n += 1
        self.labels.append(self.n - 1 if label is None else label)
        if color is not None:
            self.vertex_colors[self.n - 1] = color
        return self.n - 1

    def add_edge(self, u: int, v: int, weight: int = 1, color=None, selector: bool = False,
                 length: int = 1) -> int:
        """Append an edge and return its index; zero weights are dropped (index -1)."""
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise ValueError(f"edge ({u}, {v}) out of range for {self.n} vertices")
        w = int(weight) % self.ctx.p
        if w == 0:
            return -1
        self.edges.append((u, v, w))
        self.lengths.append(length)
        i = len(self.edges) - 1
        if color is not None:
            self.edge_colors[i] = color
        if selector:
            self.selectors.add(i)
        return i

    def find_edge(self, u: int, v: int) -> int:
        for i, (a, b, _) in enumerate(self.edges):
            if a == u and b == v:
                return i
        raise EdgeNotFound(f"no edge ({u}, {v})")

    def resolve(self, e: int | tuple[int, int]) -> int:
        if isinstance(e, tuple):
            return self.find_edge(*e)
        if not 0 <= e < len(self.edges):
            raise EdgeNotFound(f"no edge with index {e}")
        return e

    def out_edges(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for i, (u, _, _) in enumerate(self.edges):
            out[u].append(i)
        return out

    def copy(self) -> "WeightedDigraph":
        return WeightedDigraph(self.n, self.ctx, list(self.edges), list(self.lengths), set(self.selectors),
                               dict(self.edge_colors), dict(self.vertex_colors), list(self.labels))

    @classmethod
    def complete(cls, n: int, weight: int = 1, loops: bool = True, ctx: FieldContext = DEFAULT_FIELD) -> "WeightedDigraph":
        g = cls(n, ctx)
        for u in range(n):
            for v in range(n):
                if u != v or loops:
                    g.add_edge(u, v, weight)
        return g

    # text format

    def to_text(self) -> str:
        lines = [f"N {self.n} DIRECTED"]
        if self.ctx.p != DEFAULT_FIELD.p:
            lines.append(f"MODULUS {self.ctx.p}")
        for i, (u, v, w) in enumerate(self.edges):
            col = self.edge_colors.get(i)
            lines.append(f"E {u + 1} {v + 1} {w}" + (f" {col}" if col is not None else ""))
        for i in sorted(self.selectors):
            u, v, _ = self.edges[i]
            lines.append(f"SELECTOR {u + 1} {v + 1}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "WeightedDigraph":
        rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        try:
            if rows[0][0] != "N" or len(rows[0]) != 3 or rows[0][2] != "DIRECTED":
                raise MalformedInput("digraph file must start with 'N <n> DIRECTED'")
            n = int(rows[0][1])
            body = rows[1:]
            ctx = DEFAULT_FIELD
            if body and body[0][0] == "MODULUS":
                ctx = FieldContext(int(body[0][1]))
                body = body[1:]
            g = cls(n, ctx)
            for r in body:
                if r[0] == "E" and len(r) in (4, 5):
                    g.add_edge(int(r[1]) - 1, int(r[2]) - 1, int(r[3]), _color(r[4]) if len(r) == 5 else None)
                elif r[0] == "SELECTOR" and len(r) == 3:
                    g.selectors.add(g.find_edge(int(r[1]) - 1, int(r[2]) - 1))
                else:
                    raise MalformedInput(f"bad digraph line {' '.join(r)!r}")
        except (IndexError, ValueError, EdgeNotFound) as e:
            if isinstance(e, MalformedInput):
                raise
            raise MalformedInput(f"bad digraph file: {e}") from None
        return g


# cycle covers ------------------------------------------------------------------


@dataclass(frozen=True)
class CoverPattern:
    """One distinguished cycle of length ``k`` (none if k == 0); every other cycle
    has length at most ``c`` (exactly ``c`` when ``strict``). ``c = 1`` means the
    other vertices sit on self-loops, the k-permanent pattern."""

    k: int
    c: int = 1
    strict: bool = False

    @classmethod
    def selfloop(cls, k: int) -> "CoverPattern":
        return cls(k, 1)

    def max_length(self) -> int:
        return max(self.k, self.c)

    def accepts(self, lengths: Sequence[int]) -> bool:
        rest = list(lengths)
        if self.k:
            if self.k not in rest:
                return False
            rest.remove(self.k)
        return all((L == self.c) if self.strict else (L <= self.c) for L in rest)

    def closable(self, L: int) -> bool:
        return L == self.k or ((L == self.c) if self.strict else (L <= self.c))


def iter_cycle_covers(
    g: WeightedDigraph,
    pattern: CoverPattern,
    vertex_cap: int = VERTEX_CAP,
    node_cap: int = NODE_CAP,
) -> Iterator[tuple[tuple[int, ...], list[int]]]:
    """Yield (edge indices, cycle lengths) for every cover matching the pattern.

    Cycles are grown from the smallest uncovered vertex, so each cover appears
    once. Cycle length is the sum of the edges' ``lengths``.
    """
    if g.n > vertex_cap:
        raise EnumerationCapExceeded(f"{g.n} vertices exceed the cap {vertex_cap}")
    out = g.out_edges()
    maxlen = pattern.max_length()
    covered = [False] * g.n
    chosen: list[int] = []
    lengths: list[int] = []
    nodes = [0]

    def tick():
        nodes[0] += 1
        if nodes[0] > node_cap:
            raise EnumerationCapExceeded(f"cycle-cover search exceeded {node_cap} nodes")

    def next_cycle():
        tick()
        try:
            s = covered.index(False)
        except ValueError:
            if pattern.accepts(lengths):
                yield tuple(chosen), list(lengths)
            return
        covered[s] = True
        yield from extend(s, s, 0)
        covered[s] = False

    def extend(s: int, cur: int, L: int):
        for i in out[cur]:
            _, v, _ = g.edges[i]
            L2 = L + g.lengths[i]
            if L2 > maxlen:
                continue
            if v == s:
                if pattern.closable(L2):
                    chosen.append(i)
                    lengths.append(L2)
                    yield from next_cycle()
                    lengths.pop()
                    chosen.pop()
            elif not covered[v] and v > s:
                tick()
                covered[v] = True
                chosen.append(i)
                yield from extend(s, v, L2)
                chosen.pop()
                covered[v] = False

    yield from next_cycle()


def permanent_sum(
    g: WeightedDigraph,
    vertices: Iterable[int] | None = None,
    skip: Iterable[int] = (),
    state_cap: int = 10**6,
) -> FieldElem:
    """Sum over all cycle covers of the induced subdigraph, with no length limits.

    This is the permanent of the weighted adjacency matrix, computed row by row
    over a max-cardinality vertex order. The state is the set of taken columns
    that still have unprocessed in-neighbours, so sparse tree-like digraphs
    stay cheap. Edges listed in ``skip`` are ignored.
    """
    ctx = g.ctx
    vs = sorted(set(range(g.n)) if vertices is None else set(vertices))
    inside = set(vs)
    skip = set(skip)
    out: dict[int, dict[int, int]] = {u: {} for u in vs}
    ins: dict[int, set[int]] = {v: set() for v in vs}
    for i, (u, v, w) in enumerate(g.edges):
        if i in skip or u not in inside or v not in inside:
            continue
        out[u][v] = (out[u].get(v, 0) + w) % ctx.p
        ins[v].add(u)
    nbr = {u: set(out[u]) | ins[u] for u in vs}
    order: list[int] = []
    score = {u: 0 for u in vs}
    left = set(vs)
    while left:
        u = max(left, key=lambda x: (score[x], -x))
        left.discard(u)
        order.append(u)
        for x in nbr[u]:
            if x in left:
                score[x] += 1
    pos = {u: t for t, u in enumerate(order)}
    last_in = {v: max((pos[u] for u in ins[v]), default=-1) for v in vs}
    closes: dict[int, list[int]] = defaultdict(list)
    for v in vs:
        closes[last_in[v]].append(v)
    if closes.get(-1):
        return FieldElem(0, ctx)
    states: dict[frozenset, int] = {frozenset(): 1}
    for t, u in enumerate(order):
        nxt: dict[frozenset, int] = defaultdict(int)
        for st, acc in states.items():
            for v, w in out[u].items():
                if v in st:
                    continue
                nxt[st | {v}] = (nxt[st | {v}] + acc * w) % ctx.p
        done = closes.get(t, [])
        states = {}
        for st, acc in nxt.items():
            if acc and all(v in st for v in done):
                key = st.difference(done)
                states[key] = (states.get(key, 0) + acc) % ctx.p
        if len(states) > state_cap:
            raise EnumerationCapExceeded(f"permanent frontier exceeded {state_cap} states")
    return FieldElem(states.get(frozenset(), 0), ctx)


def cover_weight(g: WeightedDigraph, cover: Iterable[int]) -> int:
    p = g.ctx.p
    w = 1
    for i in cover:
        w = w * g.edges[i][2] % p
    return w


def cycle_cover_poly(
    g: WeightedDigraph,
    pattern: CoverPattern,
    cover_filter: Callable[[tuple[int, ...]], bool] | None = None,
    symbolic: bool = False,
    var_of_edge: Sequence[int | None] | None = None,
    n_vars: int | None = None,
    vertex_cap: int = VERTEX_CAP,
    node_cap: int = NODE_CAP,
):
    """Sum over pattern-matching cycle covers of the product of edge weights.

    With ``symbolic`` each edge i stands for the variable ``var_of_edge[i]``
    (default: i itself; None means the constant 1) and a SparsePoly is returned.
    """
    ctx = g.ctx
    if symbolic:
        var_of_edge = list(range(len(g.edges))) if var_of_edge is None else list(var_of_edge)
        n_vars = len(g.edges) if n_vars is None else n_vars
        acc: dict[tuple[int, ...], int] = defaultdict(int)
        for cover, _ in iter_cycle_covers(g, pattern, vertex_cap, node_cap):
            if cover_filter is not None and not cover_filter(cover):
                continue
            e = [0] * n_vars
            for i in cover:
                if var_of_edge[i] is not None:
                    e[var_of_edge[i]] += 1
            acc[tuple(e)] += 1
        return SparsePoly(n_vars, acc, ctx)
    total = 0
    for cover, _ in iter_cycle_covers(g, pattern, vertex_cap, node_cap):
        if cover_filter is None or cover_filter(cover):
            total += cover_weight(g, cover)
    return FieldElem(total % ctx.p, ctx)


# iff couplings -----------------------------------------------------------------


GADGETS = ("figure", "single", "graded")


@dataclass(frozen=True)
class IffCoupling:
    """Vertices and external edges of a spliced m-iff coupling.

    ``a`` and ``b`` hold one entry per coupled edge in the chained forms and a
    single entry in the single-pair form; ``d`` is only populated by the graded
    gadget. The main path runs u -> a_1 -> (d_1 ->) b_1 -> ... -> b_last -> v.
    """

    m: int
    a: tuple[int, ...]
    b: tuple[int, ...]
    c: tuple[int, ...]
    main_in: int  # u -> a_1
    main_out: int  # b_last -> v
    c_in: tuple[int, ...]  # u_i -> c_i
    c_out: tuple[int, ...]  # c_i -> v_i
    gadget: str = "figure"
    d: tuple[int, ...] = ()

    @property
    def vertices(self) -> tuple[int, ...]:
        return self.a + self.b + self.c + self.d

    @property
    def main_extra_length(self) -> int:
        """Extra edges on the main path relative to the original edge."""
        per = 3 if self.gadget == "graded" else 2
        return per * len(self.a)

    @property
    def max_internal_cycle(self) -> int:
        """Longest cycle that lies entirely inside the gadget."""
        if self.gadget == "graded":
            return 4
        return 2 * len(self.c) + 1 if self.gadget == "single" else 3

    def external_edges(self) -> tuple[int, ...]:
        return (self.main_in, self.main_out) + self.c_in + self.c_out

    def classify(self, cover: Iterable[int]) -> str:
        used = set(cover)
        ext = [e in used for e in self.external_edges()]
        if all(ext):
            return "active"
        if not any(ext):
            return "inactive"
        return "borderline"


def _fraction(ctx: FieldContext, num: int, den: int) -> int:
    return num * ctx.inv(den) % ctx.p


def _add_gadget_edges(g: WeightedDigraph, a: int, b: int, cs: Sequence[int]) -> None:
    """Internal edges of one a/b pair joined to the given c vertices."""
    ctx = g.ctx
    g.add_edge(a, a, -1)
    g.add_edge(b, b, 1)
    g.add_edge(a, b, 1)
    g.add_edge(b, a, 1)
    for c in cs:
        g.add_edge(a, c, _fraction(ctx, 1, 2))
        g.add_edge(b, c, _fraction(ctx, -1, 2))
        g.add_edge(c, a, 1)
        g.add_edge(c, b, 1)
        g.add_edge(c, c, _fraction(ctx, -1, 2))


def _add_graded_edges(g: WeightedDigraph, a: int, d: int, b: int, c: int) -> None:
    """Gadget whose a->b paths (a-d-b and a-c-b) have equal length.

    Every partial cover cancels among completions that route the external
    paths identically, so the identity survives cycle-length constraints as
    long as cycles of length 2..4 are unrestricted.
    """
    ctx = g.ctx
    half = _fraction(ctx, 1, 2)
    g.add_edge(a, a, 1)
    g.add_edge(b, b, half)
    g.add_edge(c, c, -1)
    g.add_edge(d, d, 1)
    g.add_edge(a, d, 1)
    g.add_edge(d, b, 1)
    g.add_edge(a, c, 1)
    g.add_edge(c, b, 1)
    g.add_edge(b, a, half)
    g.add_edge(b, d, _fraction(ctx, -1, 2))
    g.add_edge(d, a, -1)


def iff_splice(
    g: WeightedDigraph,
    main: int | tuple[int, int],
    edges: Sequence[int | tuple[int, int]],
    gadget: str = "figure",
) -> tuple[WeightedDigraph, IffCoupling]:
    """Couple ``main`` with every edge in ``edges`` (m = len(edges)).

    Each coupled edge (u, v) becomes u -> c_i -> v and the main edge runs
    through the gadgets. ``"figure"`` chains one three-vertex a/b/c gadget per
    coupled edge; ``"single"`` joins all c_i to one a/b pair as drawn for
    m = 2, which is only an iff coupling for m = 1; ``"graded"`` chains the
    four-vertex equal-length gadget. Original weights stay on the first
    segment of each re-routed edge. Edges may be given by index or (u, v).
    """
    if gadget not in GADGETS:
        raise ValueError(f"unknown gadget {gadget!r}")
    idx_main = g.resolve(main)
    idx = [g.resolve(e) for e in edges]
    if idx_main in idx or len(set(idx)) != len(idx):
        raise ValueError("coupled edges must be distinct")
    m = len(idx)
    if m == 0:
        raise ValueError("need at least one coupled edge")
    gone = set(idx) | {idx_main}
    keep = [i for i in range(len(g.edges)) if i not in gone]
    h = WeightedDigraph(g.n, g.ctx, labels=list(g.labels), vertex_colors=dict(g.vertex_colors))
    for i in keep:
        u, v, w = g.edges[i]
        h.add_edge(u, v, w, g.edge_colors.get(i), i in g.selectors, g.lengths[i])
    pairs = 1 if gadget == "single" else m
    a = tuple(h.add_vertex(("iff-a", j)) for j in range(pairs))
    d = tuple(h.add_vertex(("iff-d", j)) for j in range(pairs)) if gadget == "graded" else ()
    b = tuple(h.add_vertex(("iff-b", j)) for j in range(pairs))
    c = tuple(h.add_vertex(("iff-c", j)) for j in range(m))
    mu, mv, mw = g.edges[idx_main]
    main_in = h.add_edge(mu, a[0], mw, g.edge_colors.get(idx_main), idx_main in g.selectors)
    for j in range(pairs - 1):
        h.add_edge(b[j], a[j + 1], 1)
    main_out = h.add_edge(b[-1], mv, 1)
    c_in, c_out = [], []
    for j, i in enumerate(idx):
        u, v, w = g.edges[i]
        c_in.append(h.add_edge(u, c[j], w, g.edge_colors.get(i), i in g.selectors))
        c_out.append(h.add_edge(c[j], v, 1))
    if gadget == "single":
        _add_gadget_edges(h, a[0], b[0], c)
    elif gadget == "graded":
        for j in range(m):
            _add_graded_edges(h, a[j], d[j], b[j], c[j])
    else:
        for j in range(m):
            _add_gadget_edges(h, a[j], b[j], [c[j]])
    return h, IffCoupling(m, a, b, c, main_in, main_out, tuple(c_in), tuple(c_out), gadget, d)


@dataclass(frozen=True)
class CouplingReport:
    spliced: int
    base: int
    active: int
    inactive: int
    borderline: int
    covers: int

    @property
    def ok(self) -> bool:
        return self.spliced == self.base and self.borderline == 0


def coupling_identity_check(
    g: WeightedDigraph,
    main: int | tuple[int, int],
    edges: Sequence[int | tuple[int, int]],
    pattern: CoverPattern,
    gadget: str = "figure",
    vertex_cap: int = 24,
    node_cap: int = NODE_CAP,
) -> CouplingReport:
    """Compare covers of the spliced graph with covers of ``g`` that use the
    coupled edges all together or not at all.

    Base-side cycle lengths count the subdivisions the splice introduces, so
    both sides apply the pattern to the same cycles.
    """
    h, cp = iff_splice(g, main, edges, gadget)
    p = g.ctx.p
    sums = {"active": 0, "inactive": 0, "borderline": 0}
    count = 0
    for cover, _ in iter_cycle_covers(h, pattern, vertex_cap, node_cap):
        count += 1
        sums[cp.classify(cover)] += cover_weight(h, cover)
    idx_main = g.resolve(main)
    idx = [g.resolve(e) for e in edges]
    base_g = g.copy()
    base_g.lengths[idx_main] += cp.main_extra_length
    for i in idx:
        base_g.lengths[i] += 1
    group = [idx_main] + idx

    def all_or_none(cover):
        used = set(cover)
        hits = sum(i in used for i in group)
        return hits in (0, len(group))

    base = cycle_cover_poly(base_g, pattern, all_or_none, vertex_cap=vertex_cap, node_cap=node_cap).value
    spliced = sum(sums.values()) % p
    return CouplingReport(spliced, base, sums["active"] % p, sums["inactive"] % p,
                          sums["borderline"] % p, count)


# circuits to cycle covers ------------------------------------------------------


def alternating_tree(c: Circuit, uniform_depth: bool = False, cap: int = 10**5) -> Circuit:
    """Formula with alternating addition/multiplication layers.

    Nested gates of the same kind are merged. With ``uniform_depth`` fan-in-1
    gates of the alternating kind are inserted until every leaf sits at the
    same depth.
    """
    if c.division_bearing:
        raise ValueError("cycle-cover construction needs a division-free circuit")
    f = to_formula(c, cap)
    gates = f.gates

    def flat(i: int):
        g = gates[i]
        if g.is_leaf:
            return ("leaf", g)
        kids = []
        for ch in g.children:
            t = flat(ch)
            if t[0] == g.kind:
                kids.extend(t[1])
            else:
                kids.append(t)
        return (g.kind, kids)

    tree = flat(f.output)
    if uniform_depth:
        def height(t):
            return 0 if t[0] == "leaf" else 1 + max(height(k) for k in t[1])

        def pad(t, want: int, parent_kind):
            if want == 0:
                return t
            if t[0] == "leaf" or height(t) < want:
                kind = MUL if parent_kind == ADD else ADD
                if t[0] == kind:
                    return (kind, [pad(k, want - 1, kind) for k in t[1]])
                return (kind, [pad(t, want - 1, kind)])
            return (t[0], [pad(k, want - 1, t[0]) for k in t[1]])

        h = height(tree)
        tree = pad(tree, h, MUL if tree[0] == ADD else ADD) if tree[0] != "leaf" else tree

    b = CircuitBuilder(c.n_vars, ctx=c.ctx)

    def emit(t) -> int:
        if t[0] == "leaf":
            g = t[1]
            return b.input(g.var) if g.kind == INPUT else b.const(g.const)
        kids = [emit(k) for k in t[1]]
        return b.add(kids) if t[0] == ADD else b.mul(kids)

    return b.build(emit(tree))


@dataclass
class CycleCoverInstance:
    """A digraph whose filtered pattern cover sum, divided by ``normalization``,
    equals the value of the source circuit at the given point."""

    graph: WeightedDigraph
    pattern: CoverPattern
    normalization: int
    head: int
    head_loop: int
    selector_edges: frozenset[int]
    clique_edges: frozenset[int]
    k: int
    tree: Circuit
    n_tree: int = 0

    def cover_filter(self, cover: Sequence[int]) -> bool:
        used = set(cover)
        if self.head_loop in used:
            return False
        sel = len(used & self.selector_edges)
        return sel == self.k and sel + len(used & self.clique_edges) == 2 * self.k

    def cover_sum(self, method: str = "auto", vertex_cap: int = 64, node_cap: int = NODE_CAP) -> FieldElem:
        """Filtered pattern cover sum.

        ``"enumerate"`` walks every pattern cover of the whole digraph and
        applies the filter. ``"factored"`` uses that the clique is disconnected
        from the tree part and the tree part's cycles are unconstrained: the sum
        is the permanent of the tree part without the head loop times the
        filtered cover count of the clique. ``"auto"`` enumerates up to 20
        vertices.
        """
        if method == "auto":
            method = "enumerate" if self.graph.n <= 20 else "factored"
        if method == "enumerate":
            return cycle_cover_poly(self.graph, self.pattern, self.cover_filter,
                                    vertex_cap=vertex_cap, node_cap=node_cap)
        if method != "factored":
            raise ValueError(f"unknown method {method!r}")
        tree = permanent_sum(self.graph, range(self.n_tree), skip=[self.head_loop])
        part = WeightedDigraph(self.graph.n - self.n_tree, self.graph.ctx)
        sel_idx, cl_idx = set(), set()
        for i, (u, v, w) in enumerate(self.graph.edges):
            if u >= self.n_tree and v >= self.n_tree:
                j = part.add_edge(u - self.n_tree, v - self.n_tree, w)
                if i in self.selector_edges:
                    sel_idx.add(j)
                if i in self.clique_edges:
                    cl_idx.add(j)

        def keep(cover):
            used = set(cover)
            n_sel = len(used & sel_idx)
            return n_sel == self.k and n_sel + len(used & cl_idx) == 2 * self.k

        pat = CoverPattern(2 * self.k, 2 * self.k + 1)
        clique_sum = cycle_cover_poly(part, pat, keep, vertex_cap=vertex_cap, node_cap=node_cap)
        return tree * clique_sum

    def normalized_sum(self, method: str = "auto", vertex_cap: int = 64, node_cap: int = NODE_CAP) -> FieldElem:
        ctx = self.graph.ctx
        return self.cover_sum(method, vertex_cap, node_cap) * ctx.inv(self.normalization)


def selector_cycle_count(clique_size: int, k: int) -> int:
    """Directed cycles through exactly k selector edges of the split clique."""
    if k == 0:
        return 1
    if k == 1:
        return clique_size
    return comb(clique_size, k) * factorial(k - 1)


def longest_cycle(g: WeightedDigraph, vertices: Iterable[int]) -> int:
    """Length of the longest simple cycle inside ``vertices`` (by DFS)."""
    vs = set(vertices)
    out = g.out_edges()
    best = 0
    for s in sorted(vs):
        seen = {s}

        def dfs(cur: int, L: int):
            nonlocal best
            for i in out[cur]:
                _, v, _ = g.edges[i]
                if v == s:
                    best = max(best, L + 1)
                elif v in vs and v > s and v not in seen:
                    seen.add(v)
                    dfs(v, L + 1)
                    seen.discard(v)

        dfs(s, 0)
    return best


def circuit_to_cyclecover(
    c: Circuit,
    k: int,
    point: Sequence[int],
    clique_size: int | None = None,
    uniform_depth: bool = False,
    max_vertices: int = 64,
    gadget: str = "figure",
) -> CycleCoverInstance:
    """Digraph whose covers correspond to parse trees of ``c`` at ``point``.

    Leaves carry their value on their outgoing edge; every tree vertex has a
    weight-1 self-loop. A multiplication gate's outgoing path is coupled (one
    1-iff coupling per child) with its children's edges, which now end in fresh
    head vertices v'_i; each head has back edges to the additive terminals of
    its child (leaves and multiplication gates reachable through additions
    only). The root's head must leave its self-loop. A split directed clique on
    ``clique_size`` vertices supplies the distinguished 2k-cycle through k
    selector edges; ``normalization`` counts those cycles. ``gadget`` is
    ``"figure"`` or ``"graded"`` as in :func:`iff_splice`.
    """
    if gadget not in ("figure", "graded"):
        raise ValueError(f"unknown gadget {gadget!r}")
    if k < 0:
        raise ValueError("need k >= 0")
    clique_size = k if clique_size is None else clique_size
    if clique_size < k:
        raise ValueError("clique smaller than k")
    t = alternating_tree(c, uniform_depth)
    ctx = t.ctx
    gates = t.gates
    g = WeightedDigraph(0, ctx)
    vert = [g.add_vertex(("gate", i)) for i in range(len(gates))]
    for i in range(len(gates)):
        g.add_edge(vert[i], vert[i], 1)

    def value(i: int) -> int:
        gt = gates[i]
        if gt.kind == INPUT:
            return int(point[gt.var]) % ctx.p
        if gt.kind == CONST:
            return gt.const
        return 1

    def terminals(i: int) -> list[int]:
        gt = gates[i]
        if gt.kind == ADD:
            return [x for ch in gt.children for x in terminals(ch)]
        return [i]

    exit_of = {i: vert[i] for i in range(len(gates))}
    target: dict[int, int] = {}
    heads: list[tuple[int, int]] = []  # (head vertex, child gate)
    for i, gt in enumerate(gates):
        if gt.kind == ADD:
            for ch in gt.children:
                target[ch] = vert[i]
        elif gt.kind == MUL:
            m = gt.fanin
            a = [g.add_vertex(("a", i, j)) for j in range(m)]
            d = [g.add_vertex(("d", i, j)) for j in range(m)] if gadget == "graded" else []
            b = [g.add_vertex(("b", i, j)) for j in range(m)]
            cs = [g.add_vertex(("c", i, j)) for j in range(m)]
            g.add_edge(vert[i], a[0], 1)
            for j in range(m - 1):
                g.add_edge(b[j], a[j + 1], 1)
            exit_of[i] = b[-1]
            for j, ch in enumerate(gt.children):
                if d:
                    _add_graded_edges(g, a[j], d[j], b[j], cs[j])
                else:
                    _add_gadget_edges(g, a[j], b[j], [cs[j]])
                head = g.add_vertex(("head", i, j))
                g.add_edge(head, head, 1)
                target[ch] = cs[j]
                g.add_edge(cs[j], head, 1)
                heads.append((head, ch))
    root = t.output
    if gates[root].kind == ADD:
        top = vert[root]
        heads.append((top, root))
    else:
        top = g.add_vertex(("head", "root"))
        g.add_edge(top, top, 1)
        target[root] = top
        heads.append((top, root))
    for i, tv in target.items():
        g.add_edge(exit_of[i], tv, value(i) if gates[i].is_leaf else 1)
    for head, ch in heads:
        for term in terminals(ch):
            g.add_edge(head, vert[term], 1)
    head_loop = next(j for j, (u, v, _) in enumerate(g.edges) if u == top and v == top)
    n_tree = g.n
    tree_vertices = range(n_tree)

    # the split clique
    sel, cl = set(), set()
    ins = [g.add_vertex(("in", v)) for v in range(clique_size)]
    outs = [g.add_vertex(("out", v)) for v in range(clique_size)]
    for v in range(clique_size):
        g.add_edge(ins[v], ins[v], 1)
        g.add_edge(outs[v], outs[v], 1)
        sel.add(g.add_edge(ins[v], outs[v], 1, selector=True))
        for w in range(clique_size):
            if w != v or k == 1:
                cl.add(g.add_edge(outs[v], ins[w], 1))
    if g.n > max_vertices:
        raise SizeCapExceeded(f"digraph has {g.n} vertices > {max_vertices}")
    c_bound = max(longest_cycle(g, tree_vertices), 1)
    pattern = CoverPattern(2 * k, c_bound)
    return CycleCoverInstance(g, pattern, selector_cycle_count(clique_size, k), top, head_loop,
                              frozenset(sel), frozenset(cl), k, t, n_tree)


# colored graphs and the reduction chain ---------------------------------------


def graph_layout(G: Graph) -> tuple[dict[tuple[int, int], int], int]:
    """E-then-X variable layout over a graph's own edges: edge index, then n_edges + v."""
    edges = G.sorted_edges()
    return {e: i for i, e in enumerate(edges)}, len(edges) + G.n


def _subgraph_monomial(G: Graph, eidx: dict, vertices: Iterable[int], edges: Iterable[tuple[int, int]]) -> tuple[int, ...]:
    m = len(eidx)
    e = [0] * (m + G.n)
    for v in vertices:
        e[m + v] += 1
    for u, v in edges:
        e[eidx[(min(u, v), max(u, v))]] += 1
    return tuple(e)


def partitioned_sub_poly(H: Graph, G: Graph, cap: int = 10**6, ctx: FieldContext = DEFAULT_FIELD) -> SparsePoly:
    """P of the color-preserving copies of the colorful graph H inside G.

    A copy picks one G-vertex of each H color such that every H edge maps to a
    G edge; its monomial is the product of the picked vertices and edges.
    """
    if H.n > 9:
        raise EnumerationCapExceeded("H has more than 9 vertices")
    hcol = [H.vertex_colors.get(h, h) for h in range(H.n)]
    if len(set(hcol)) != H.n:
        raise ValueError("H must be colorful")
    by_color = defaultdict(list)
    for v in range(G.n):
        by_color[G.vertex_colors.get(v)].append(v)
    eidx, n_vars = graph_layout(G)
    order = _connected_order(H)
    hadj = H.neighbors()
    pos = {h: i for i, h in enumerate(order)}
    acc: dict[tuple[int, ...], int] = defaultdict(int)
    phi = [-1] * H.n
    seen = [0]

    def go(t: int):
        if t == len(order):
            acc[_subgraph_monomial(G, eidx, phi, [(phi[u], phi[v]) for u, v in H.sorted_edges()])] += 1
            return
        h = order[t]
        for v in by_color[hcol[h]]:
            seen[0] += 1
            if seen[0] > cap:
                raise EnumerationCapExceeded(f"partitioned-subgraph search exceeded {cap} steps")
            if all(G.has_edge(v, phi[h2]) for h2 in hadj[h] if pos[h2] < t):
                phi[h] = v
                go(t + 1)
                phi[h] = -1

    go(0)
    return SparsePoly(n_vars, acc, ctx)


def _connected_order(H: Graph) -> list[int]:
    adj = H.neighbors()
    order, seen = [], set()
    for s in range(H.n):
        if s in seen:
            continue
        stack = [s]
        seen.add(s)
        while stack:
            u = stack.pop(0)
            order.append(u)
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
    return order


def project(f: SparsePoly, mapping: Sequence[int | None], n_vars: int) -> SparsePoly:
    """Substitute variable i by target ``mapping[i]`` (None means 1)."""
    acc: dict[tuple[int, ...], int] = defaultdict(int)
    for e, cf in f.terms.items():
        out = [0] * n_vars
        for i, d in enumerate(e):
            if d and mapping[i] is not None:
                out[mapping[i]] += d
        acc[tuple(out)] += cf
    return SparsePoly(n_vars, acc, f.ctx)


def grid_graph(k: int) -> Graph:
    """The k x k grid, colorful with color (i, j) on vertex i*k + j."""
    edges = [(a[0] * k + a[1], b[0] * k + b[1]) for a, b in grid_edges(k)]
    return Graph(k * k, frozenset(edges), vertex_colors={i * k + j: (i, j) for i in range(k) for j in range(k)})


@dataclass
class GridReduction:
    graph: Graph
    labels: list[tuple[int, int, int, int]]
    grid: Graph
    k: int
    source: Graph

    def projection(self) -> list[int | None]:
        """Map P(PartitionedSub(grid -> G')) variables onto the clique layout of G.

        Diagonal vertices v_{i,i,x,x} go to X_x, vertices v_{i,j,x,y} with i < j
        go to E_{x,y}; everything else (including G' edges) becomes 1.
        """
        from .families import VariableLayout

        L = VariableLayout(self.source.n)
        eidx, _ = graph_layout(self.graph)
        m = len(eidx)
        out: list[int | None] = [None] * (m + self.graph.n)
        for v, (i, j, x, y) in enumerate(self.labels):
            if i == j:
                out[m + v] = L.x(x)
            elif i < j:
                out[m + v] = L.e(min(x, y), max(x, y))
        return out

    def target_size(self) -> int:
        from .families import VariableLayout

        return VariableLayout(self.source.n).size


def grid_reduction(G: Graph, k: int, ordered: bool = True) -> GridReduction:
    """Colored graph G' whose colorful k x k grids match the k-cliques of G.

    Vertex v_{i,i,x,x} for every x; v_{i,j,x,y} (i != j) for every edge {x,y}.
    Horizontal neighbours share x, vertical neighbours share y. With
    ``ordered`` only x < y is kept when i < j (and x > y when i > j), so each
    clique corresponds to exactly one grid instead of k! of them.
    """
    if k < 2:
        raise ValueError("need k >= 2")
    labels: list[tuple[int, int, int, int]] = []
    for i in range(k):
        for j in range(k):
            for x in range(G.n):
                for y in range(G.n):
                    if i == j:
                        ok = x == y
                    else:
                        ok = x != y and G.has_edge(x, y)
                        if ordered:
                            ok = ok and ((x < y) == (i < j))
                    if ok:
                        labels.append((i, j, x, y))
    index = {lab: v for v, lab in enumerate(labels)}
    edges = set()
    for v, (i, j, x, y) in enumerate(labels):
        if j + 1 < k:  # horizontal: same row, same x
            for y2 in range(G.n):
                w = index.get((i, j + 1, x, y2))
                if w is not None:
                    edges.add((min(v, w), max(v, w)))
        if i + 1 < k:  # vertical: same column, same y
            for x2 in range(G.n):
                w = index.get((i + 1, j, x2, y))
                if w is not None:
                    edges.add((min(v, w), max(v, w)))
    colors = {v: (lab[0], lab[1]) for v, lab in enumerate(labels)}
    Gp = Graph(len(labels), frozenset(edges), vertex_colors=colors)
    return GridReduction(Gp, labels, grid_graph(k), k, G)


def clique_poly_of(G: Graph, k: int, ctx: FieldContext = DEFAULT_FIELD) -> SparsePoly:
    """Clique_{n,k} restricted to G: cliques of G only, in the E-then-X layout on n vertices."""
    from .families import VariableLayout, _mono

    L = VariableLayout(G.n)
    terms = []
    for C in combinations(range(G.n), k):
        if all(G.has_edge(u, v) for u, v in combinations(C, 2)):
            terms.append((_mono(L.size, [L.e(u, v) for u, v in combinations(C, 2)] + [L.x(u) for u in C]), 1))
    return SparsePoly(L.size, terms, ctx)


@dataclass
class MinorExpansion:
    graph: Graph
    labels: list[tuple]
    designated_vertex: dict[int, int]  # H vertex -> H' vertex standing for it
    designated_edge: dict[tuple[int, int], tuple[int, int]]  # H edge -> H' edge
    source: Graph

    def projection(self) -> list[int | None]:
        """Map P(PartitionedSub(H' -> G')) variables onto P(PartitionedSub(H -> G))."""
        eidx_src, _ = graph_layout(self.source)
        m_src = len(eidx_src)
        eidx, _ = graph_layout(self.graph)
        m = len(eidx)
        out: list[int | None] = [None] * (m + self.graph.n)
        des_v = set(self.designated_vertex.values())
        des_e = {tuple(sorted(e)) for e in self.designated_edge.values()}
        for v, lab in enumerate(self.labels):
            if lab[0] == "L" and lab[2] in des_v:
                out[m + v] = m_src + lab[1]
        for (u, v), i in eidx.items():
            lu, lv = self.labels[u], self.labels[v]
            if lu[0] == "L" and lv[0] == "L" and tuple(sorted((lu[2], lv[2]))) in des_e:
                key = (min(lu[1], lv[1]), max(lu[1], lv[1]))
                if key in eidx_src:
                    out[i] = eidx_src[key]
        return out


def _induced_connected(Hp: Graph, B: set[int]) -> bool:
    if not B:
        return False
    start = min(B)
    seen, stack = {start}, [start]
    adj = Hp.neighbors()
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v in B and v not in seen:
                seen.add(v)
                stack.append(v)
    return seen == B


def minor_expand(G: Graph, H: Graph, Hp: Graph, branch_sets: Sequence[Iterable[int]]) -> MinorExpansion:
    """Blow G up along a minor model B_0, ..., B_k of H in H'.

    G is colored by H's vertices (0..k-1); branch set B_{i+1} stands for H
    vertex i. Every v of color i becomes a copy L_v of H'[B_{i+1}]; for each H
    edge {i, j} the H' edges between the branch sets are copied between L_u and
    L_v whenever uv is an edge of G, and for each non-edge they are copied for
    all u, v. A copy of H'[B_0] is joined to every other vertex. G' is colored
    by H' vertices.
    """
    k = H.n
    B = [set(s) for s in branch_sets]
    if len(B) != k + 1:
        raise InvalidMinorModel(f"need {k + 1} branch sets (B_0 .. B_k)")
    allv = [v for s in B for v in s]
    if sorted(allv) != list(range(Hp.n)):
        raise InvalidMinorModel("branch sets must partition V(H')")
    for i in range(1, k + 1):
        if not _induced_connected(Hp, B[i]):
            raise InvalidMinorModel(f"branch set B_{i} is empty or disconnected")
    between: dict[tuple[int, int], list[tuple[int, int]]] = defaultdict(list)
    owner = {v: i - 1 for i in range(1, k + 1) for v in B[i]}
    for u, v in Hp.sorted_edges():
        if u in owner and v in owner and owner[u] != owner[v]:
            i, j = owner[u], owner[v]
            between[(min(i, j), max(i, j))].append((u, v))
    for i, j in H.sorted_edges():
        if not between.get((i, j)):
            raise InvalidMinorModel(f"no H' edge between the branch sets of H edge {(i, j)}")
    labels: list[tuple] = []
    index: dict[tuple, int] = {}
    for v in range(G.n):
        i = G.vertex_colors[v]
        for b in sorted(B[i + 1]):
            index[("L", v, b)] = len(labels)
            labels.append(("L", v, b))
    for b in sorted(B[0]):
        index[("B0", b)] = len(labels)
        labels.append(("B0", b))
    edges = set()

    def link(x, y):
        edges.add((min(x, y), max(x, y)))

    for v in range(G.n):  # inside each L_v
        i = G.vertex_colors[v]
        for b1, b2 in Hp.sorted_edges():
            if b1 in B[i + 1] and b2 in B[i + 1]:
                link(index[("L", v, b1)], index[("L", v, b2)])
    for (i, j), hp_edges in between.items():
        h_edge = H.has_edge(i, j)
        for u in range(G.n):
            for v in range(G.n):
                if u == v:
                    continue
                cu, cv = G.vertex_colors[u], G.vertex_colors[v]
                if (cu, cv) != (i, j) or (h_edge and not G.has_edge(u, v)):
                    continue
                for b1, b2 in hp_edges:
                    x1, x2 = (b1, b2) if owner[b1] == i else (b2, b1)
                    link(index[("L", u, x1)], index[("L", v, x2)])
    b0 = [index[("B0", b)] for b in sorted(B[0])]
    for x in b0:
        for y in range(len(labels)):
            if y != x:
                link(x, y)
    colors = {v: lab[-1] for v, lab in enumerate(labels)}
    Gp = Graph(len(labels), frozenset(edges), vertex_colors=colors)
    des_v = {i: min(B[i + 1]) for i in range(k)}
    des_e = {e: between[e][0] for e in H.sorted_edges()}
    return MinorExpansion(Gp, labels, des_v, des_e, G)


# matchings -------------------------------------------------------------------


def _matchings(G: Graph, edges: Sequence[tuple[int, int]], k: int, cap: int) -> Iterator[list[tuple[int, int]]]:
    used: set[int] = set()
    chosen: list[tuple[int, int]] = []
    steps = [0]

    def go(start: int):
        if len(chosen) == k:
            yield list(chosen)
            return
        for t in range(start, len(edges)):
            steps[0] += 1
            if steps[0] > cap:
                raise EnumerationCapExceeded(f"matching search exceeded {cap} steps")
            u, v = edges[t]
            if u in used or v in used:
                continue
            used.update((u, v))
            chosen.append((u, v))
            yield from go(t + 1)
            chosen.pop()
            used.difference_update((u, v))

    yield from go(0)


def _matching_poly(G: Graph, matchings: Iterable[list[tuple[int, int]]], ctx: FieldContext) -> SparsePoly:
    eidx, n_vars = graph_layout(G)
    acc: dict[tuple[int, ...], int] = defaultdict(int)
    for M in matchings:
        acc[_subgraph_monomial(G, eidx, [x for e in M for x in e], M)] += 1
    return SparsePoly(n_vars, acc, ctx)


def k_matching_poly(G: Graph, k: int, colors: Iterable | None = None, cap: int = 10**7,
                    ctx: FieldContext = DEFAULT_FIELD) -> SparsePoly:
    """P of all k-matchings of G, optionally inside the edges whose color is in ``colors``."""
    edges = G.sorted_edges()
    if colors is not None:
        allowed = set(colors)
        edges = [e for e in edges if G.edge_colors.get(e) in allowed]
    return _matching_poly(G, _matchings(G, edges, k, cap), ctx)


def colored_matching_poly(G: Graph, X: Iterable, cap: int = 10**7, ctx: FieldContext = DEFAULT_FIELD) -> SparsePoly:
    """P(M_X(G)): matchings with exactly one edge of each color in X and no others."""
    X = list(dict.fromkeys(X))
    by_color = defaultdict(list)
    for e in G.sorted_edges():
        by_color[G.edge_colors.get(e)].append(e)
    used: set[int] = set()
    chosen: list[tuple[int, int]] = []
    found: list[list[tuple[int, int]]] = []
    steps = [0]

    def go(t: int):
        if t == len(X):
            found.append(list(chosen))
            return
        for u, v in by_color[X[t]]:
            steps[0] += 1
            if steps[0] > cap:
                raise EnumerationCapExceeded(f"colored matching search exceeded {cap} steps")
            if u in used or v in used:
                continue
            used.update((u, v))
            chosen.append((u, v))
            go(t + 1)
            chosen.pop()
            used.difference_update((u, v))

    go(0)
    return _matching_poly(G, found, ctx)


def matchings_incl_excl(G: Graph, X: Iterable, ctx: FieldContext = DEFAULT_FIELD) -> SparsePoly:
    """P(M_X(G)) from 2^|X| calls to the |X|-matching polynomial of G[E_S], S within X.

    A |X|-matching whose colors all lie in X uses every color exactly once iff
    it avoids every G[E_S] with S a proper subset, so the signed sum over S
    leaves exactly M_X(G).
    """
    X = list(dict.fromkeys(X))
    if len(X) > MAX_COLORS:
        raise TooManyColors(f"{len(X)} colors exceed the limit {MAX_COLORS}")
    _, n_vars = graph_layout(G)
    total = SparsePoly(n_vars, {}, ctx)
    for r in range(len(X) + 1):
        for S in combinations(X, r):
            part = k_matching_poly(G, len(X), S, ctx=ctx)
            total = total + (part if (len(X) - r) % 2 == 0 else -part)
    return total


@dataclass
class C6Construction:
    graph: Graph
    labels: list[tuple]
    cross_colors: list
    H: Graph

    def type_vector(self, matching: Iterable[tuple[int, int]]) -> dict:
        """For each H color: the number of distinct G vertices whose C6 is touched."""
        touched = defaultdict(set)
        for e in matching:
            for x in e:
                lab = self.labels[x]
                touched[lab[1]].add(lab[2])
        return {h: len(touched[h]) for h in range(self.H.n)}

    def filtered_matchings(self, cap: int = 10**7) -> list[list[tuple[int, int]]]:
        """Matchings with one edge of every cross color, each color class touching a single C6."""
        out = []
        G = self.graph
        by_color = defaultdict(list)
        for e in G.sorted_edges():
            by_color[G.edge_colors.get(e)].append(e)
        used: set[int] = set()
        chosen: list = []

        def go(t: int):
            if t == len(self.cross_colors):
                if all(v == 1 for v in self.type_vector(chosen).values()):
                    out.append(list(chosen))
                return
            for u, v in by_color[self.cross_colors[t]]:
                if u in used or v in used:
                    continue
                used.update((u, v))
                chosen.append((u, v))
                go(t + 1)
                chosen.pop()
                used.difference_update((u, v))

        go(0)
        return out

    def copies(self, matching: Iterable[tuple[int, int]]) -> tuple[int, ...]:
        """The G vertex chosen for each H color by a type-(1,...,1) matching."""
        pick = {}
        for e in matching:
            for x in e:
                lab = self.labels[x]
                pick[lab[1]] = lab[2]
        return tuple(pick[h] for h in range(self.H.n))


def c6_construction(H: Graph, G: Graph) -> C6Construction:
    """Replace every G vertex by a 6-cycle w1 z1 w2 z2 w3 z3 and every G edge
    between colors u, v by a cross edge w_{u',a} w_{v',b}, where the H edge
    {u, v} is the a-th edge at u and the b-th at v. The 6-cycle of a color-i
    vertex has edge colors (i, 0..5); a cross edge has the color of its H edge.
    """
    if any(len(nb) != 3 for nb in H.neighbors()):
        raise ValueError("H must be 3-regular")
    incident = {h: [] for h in range(H.n)}
    for e in H.sorted_edges():
        incident[e[0]].append(e)
        incident[e[1]].append(e)
    labels: list[tuple] = []
    index: dict[tuple, int] = {}
    for v in range(G.n):
        i = G.vertex_colors[v]
        for t in range(3):
            for kind in ("w", "z"):
                index[(kind, i, v, t)] = len(labels)
                labels.append((kind, i, v, t))
    edges: dict[tuple[int, int], object] = {}
    for v in range(G.n):
        i = G.vertex_colors[v]
        ring = [index[(kind, i, v, t)] for t in range(3) for kind in ("w", "z")]
        for s in range(6):
            x, y = ring[s], ring[(s + 1) % 6]
            edges[(min(x, y), max(x, y))] = (i, s)
    for u2, v2 in G.sorted_edges():
        cu, cv = G.vertex_colors[u2], G.vertex_colors[v2]
        if not H.has_edge(cu, cv):
            continue
        e = (min(cu, cv), max(cu, cv))
        a, b = incident[cu].index(e), incident[cv].index(e)
        x, y = index[("w", cu, u2, a)], index[("w", cv, v2, b)]
        edges[(min(x, y), max(x, y))] = ("edge", e)
    cross = [("edge", e) for e in H.sorted_edges()]
    Gp = Graph(len(labels), frozenset(edges), edge_colors=dict(edges))
    return C6Construction(Gp, labels, cross, H)


@dataclass
class PerkReduction:
    digraph: WeightedDigraph
    pattern: CoverPattern
    projection: list[int | None]
    n_vars: int
    multiplicity: int  # cyclic orders of one k-matching inside a 2k-cycle

    def value(self, weights: Sequence[int] | None = None) -> FieldElem:
        """per_{2k} of the digraph with the L->R edges weighted by ``weights``."""
        g = self.digraph.copy()
        if weights is not None:
            for i, tgt in enumerate(self.projection):
                if tgt is not None:
                    u, v, _ = g.edges[i]
                    g.edges[i] = (u, v, int(weights[tgt]) % g.ctx.p)
        return cycle_cover_poly(g, self.pattern, vertex_cap=g.n)

    def projected_poly(self) -> SparsePoly:
        return cycle_cover_poly(self.digraph, self.pattern, symbolic=True, var_of_edge=self.projection,
                                n_vars=self.n_vars, vertex_cap=self.digraph.n)


def matching_to_perk(G: Graph, left: Sequence[int], right: Sequence[int], k: int) -> PerkReduction:
    """Directed L->R edges from G, self-loops everywhere, all R->L back edges.

    Covers with one 2k-cycle and self-loops elsewhere are k-matchings closed up
    by back edges, each matching in (k-1)! cyclic orders. Projecting L->R edges
    to G's edge variables and the rest to 1 gives that multiple of the
    k-matching polynomial in edge variables.
    """
    L, R = set(left), set(right)
    if L & R or L | R != set(range(G.n)):
        raise ValueError("left and right must partition the vertices")
    eidx, _ = graph_layout(G)
    g = WeightedDigraph(G.n)
    proj: list[int | None] = []
    for u, v in G.sorted_edges():
        if u in L and v in R:
            s, t = u, v
        elif v in L and u in R:
            s, t = v, u
        else:
            raise ValueError(f"edge {(u, v)} is not between the sides")
        g.add_edge(s, t, 1)
        proj.append(eidx[(u, v)])
    for v in range(G.n):
        g.add_edge(v, v, 1)
        proj.append(None)
    for r in sorted(R):
        for l in sorted(L):
            g.add_edge(r, l, 1)
            proj.append(None)
    return PerkReduction(g, CoverPattern.selfloop(2 * k), proj, len(eidx), factorial(k - 1) if k else 1)
