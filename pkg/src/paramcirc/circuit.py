"""Arithmetic-circuit IR.

A circuit is a topologically ordered list of gates; gate ids are list
positions. Leaves are ``input`` and ``const`` gates, inner gates are ``add``,
``mul`` (any fan-in, duplicate children allowed) and ``div``. Values are field
residues from the circuit's :class:`FieldContext`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

from .exactfield import DEFAULT_FIELD, FieldContext, FieldElem

INPUT, CONST, ADD, MUL, DIV = "input", "const", "add", "mul", "div"
_KINDS = (INPUT, CONST, ADD, MUL, DIV)


class CircuitError(ValueError):
    pass


class CycleDetected(CircuitError):
    pass


class DanglingChild(CircuitError):
    pass


class MultipleOutputs(CircuitError):
    pass


class DenominatorZeroAtPoint(ZeroDivisionError):
    pass


class EnumerationCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True, slots=True)
class Gate:
    kind: str
    var: int = -1
    const: int = 0
    children: tuple[int, ...] = ()

    @property
    def fanin(self) -> int:
        return len(self.children)

    @property
    def is_leaf(self) -> bool:
        return self.kind in (INPUT, CONST)


def Input(var: int) -> Gate:
    return Gate(INPUT, var=var)


def Const(value: int) -> Gate:
    return Gate(CONST, const=value)


def Add(*children: int) -> Gate:
    return Gate(ADD, children=tuple(children))


def Mul(*children: int) -> Gate:
    return Gate(MUL, children=tuple(children))


def Div(num: int, den: int) -> Gate:
    return Gate(DIV, children=(num, den))


@dataclass(frozen=True)
class Metrics:
    size: int
    depth: int
    weft: int


class Circuit:
    """Immutable validated circuit with a single output gate."""

    def __init__(
        self,
        gates: Sequence[Gate],
        output: int,
        n_vars: int,
        fanin_bound: int = 2,
        ctx: FieldContext = DEFAULT_FIELD,
        division_bearing: bool | None = None,
    ):
        self.gates: tuple[Gate, ...] = tuple(
            Const(g.const % ctx.p) if g.kind == CONST else g for g in gates
        )
        self.output = output
        self.n_vars = n_vars
        self.fanin_bound = fanin_bound
        self.ctx = ctx
        has_div = any(g.kind == DIV for g in self.gates)
        if division_bearing is None:
            division_bearing = has_div
        if has_div and not division_bearing:
            raise CircuitError("div gate in a circuit not flagged division-bearing")
        self.division_bearing = division_bearing
        validate(self)

    # structure ------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.gates)

    def __repr__(self) -> str:
        m = self.metrics
        return (
            f"Circuit(gates={len(self.gates)}, n_vars={self.n_vars}, "
            f"size={m.size}, depth={m.depth}, weft={m.weft})"
        )

    @cached_property
    def outdegree(self) -> tuple[int, ...]:
        out = [0] * len(self.gates)
        for g in self.gates:
            for ch in g.children:
                out[ch] += 1
        return tuple(out)

    @cached_property
    def parents(self) -> tuple[tuple[int, ...], ...]:
        par: list[list[int]] = [[] for _ in self.gates]
        for i, g in enumerate(self.gates):
            for ch in g.children:
                par[ch].append(i)
        return tuple(tuple(p) for p in par)

    @property
    def is_formula(self) -> bool:
        return all(d <= 1 for d in self.outdegree)

    @cached_property
    def metrics(self) -> Metrics:
        b = self.fanin_bound
        depth = [0] * len(self.gates)
        weft = [0] * len(self.gates)
        size = 0
        for i, g in enumerate(self.gates):
            if g.children:
                size += len(g.children)
                depth[i] = 1 + max(depth[c] for c in g.children)
                weft[i] = max(weft[c] for c in g.children) + (g.fanin > b)
        return Metrics(size, depth[self.output], weft[self.output])

    def size(self) -> int:
        return self.metrics.size

    def depth(self) -> int:
        return self.metrics.depth

    def weft(self) -> int:
        return self.metrics.weft

    def gate_depths(self) -> list[int]:
        depth = [0] * len(self.gates)
        for i, g in enumerate(self.gates):
            if g.children:
                depth[i] = 1 + max(depth[c] for c in g.children)
        return depth

    # evaluation -----------------------------------------------------------

    def evaluate_all(self, point: Sequence[int]) -> list[int]:
        """Residue of every gate at ``point``."""
        if len(point) != self.n_vars:
            raise ValueError(f"expected {self.n_vars} values, got {len(point)}")
        p = self.ctx.p
        vals = [0] * len(self.gates)
        for i, g in enumerate(self.gates):
            k = g.kind
            if k == INPUT:
                vals[i] = int(point[g.var]) % p
            elif k == CONST:
                vals[i] = g.const
            elif k == ADD:
                vals[i] = sum(vals[c] for c in g.children) % p
            elif k == MUL:
                acc = 1
                for c in g.children:
                    acc = acc * vals[c] % p
                vals[i] = acc
            else:
                num, den = vals[g.children[0]], vals[g.children[1]]
                if den == 0:
                    raise DenominatorZeroAtPoint(f"gate {i} divides by zero")
                vals[i] = num * pow(den, -1, p) % p
        return vals

    def __call__(self, point: Sequence[int]) -> int:
        return self.evaluate_all(point)[self.output]

    # serialization --------------------------------------------------------

    def to_text(self) -> str:
        return dumps(self)

    def __eq__(self, other) -> bool:
        return isinstance(other, Circuit) and dumps(self) == dumps(other)

    def __hash__(self) -> int:
        return hash(dumps(self))


def evaluate(c: Circuit, assignment: Sequence[int | FieldElem]) -> FieldElem:
    point = [a.value if isinstance(a, FieldElem) else int(a) for a in assignment]
    return FieldElem(c(point), c.ctx)


def metrics(c: Circuit) -> Metrics:
    return c.metrics


def validate(c: Circuit) -> None:
    """Check the IR invariants, raising on the first violation."""
    gates = c.gates
    m = len(gates)
    if not 0 <= c.output < m:
        raise DanglingChild(f"output {c.output} is not a gate")
    for i, g in enumerate(gates):
        if g.kind not in _KINDS:
            raise CircuitError(f"gate {i}: unknown kind {g.kind!r}")
        if g.kind == INPUT and not 0 <= g.var < c.n_vars:
            raise CircuitError(f"gate {i}: variable {g.var} out of range")
        if g.kind in (ADD, MUL) and not g.children:
            raise CircuitError(f"gate {i}: {g.kind} gate without children")
        if g.kind == DIV and len(g.children) != 2:
            raise CircuitError(f"gate {i}: div needs two children")
        if g.is_leaf and g.children:
            raise CircuitError(f"gate {i}: leaf with children")
        for ch in g.children:
            if not 0 <= ch < m:
                raise DanglingChild(f"gate {i} references missing gate {ch}")
            if ch == i:
                raise CycleDetected(f"gate {i} references itself")
    for i, g in enumerate(gates):
        for ch in g.children:
            if ch > i:
                _check_acyclic(gates)
                raise CircuitError(f"gate {i}: child {ch} out of topological order")
    roots = [i for i, d in enumerate(c.outdegree) if d == 0]
    if len(roots) != 1:
        raise MultipleOutputs(f"{len(roots)} gates of out-degree 0: {roots[:8]}")
    if roots[0] != c.output:
        raise MultipleOutputs(f"output {c.output} has parents; sink is {roots[0]}")
    if c.fanin_bound < 2:
        raise CircuitError("fan-in bound must be at least 2")


def _check_acyclic(gates: Sequence[Gate]) -> list[int]:
    """Topological order of ``gates`` or CycleDetected."""
    state = [0] * len(gates)
    order: list[int] = []
    for root in range(len(gates)):
        if state[root]:
            continue
        stack = [(root, iter(gates[root].children))]
        state[root] = 1
        while stack:
            node, it = stack[-1]
            for ch in it:
                if state[ch] == 1:
                    raise CycleDetected(f"cycle through gate {ch}")
                if state[ch] == 0:
                    state[ch] = 1
                    stack.append((ch, iter(gates[ch].children)))
                    break
            else:
                state[node] = 2
                order.append(node)
                stack.pop()
    return order


def from_unordered(
    gates: Mapping[int, Gate] | Sequence[Gate], output: int, n_vars: int, **kw
) -> Circuit:
    """Build a circuit from gates in any order; ids are renumbered topologically.

    Unreachable gates are dropped.
    """
    if not isinstance(gates, Mapping):
        gates = dict(enumerate(gates))
    ids = list(gates)
    pos = {gid: i for i, gid in enumerate(ids)}
    plain = []
    for gid in ids:
        g = gates[gid]
        try:
            chs = tuple(pos[ch] for ch in g.children)
        except KeyError as e:
            raise DanglingChild(f"gate {gid} references missing gate {e.args[0]}") from None
        plain.append(Gate(g.kind, g.var, g.const, chs))
    if output not in pos:
        raise DanglingChild(f"output {output} is not a gate")
    for i, g in enumerate(plain):
        if i in g.children:
            raise CycleDetected(f"gate {ids[i]} references itself")
    order = _check_acyclic(plain)
    b = CircuitBuilder(n_vars, **kw)
    new: dict[int, int] = {}
    reach = _reachable(plain, pos[output])
    for i in order:
        if i in reach:
            g = plain[i]
            new[i] = b.raw(Gate(g.kind, g.var, g.const, tuple(new[c] for c in g.children)))
    return b.build(new[pos[output]])


def _reachable(gates: Sequence[Gate], out: int) -> set[int]:
    seen = {out}
    stack = [out]
    while stack:
        for ch in gates[stack.pop()].children:
            if ch not in seen:
                seen.add(ch)
                stack.append(ch)
    return seen


class CircuitBuilder:
    """Append-only gate list. Methods return the new gate id.

    With ``share_leaves`` the builder reuses one gate per variable and per
    constant, which gives a circuit rather than a formula.
    """

    def __init__(
        self,
        n_vars: int,
        fanin_bound: int = 2,
        ctx: FieldContext = DEFAULT_FIELD,
        share_leaves: bool = False,
        division_bearing: bool | None = None,
    ):
        self.n_vars = n_vars
        self.fanin_bound = fanin_bound
        self.ctx = ctx
        self.share_leaves = share_leaves
        self.division_bearing = division_bearing
        self.gates: list[Gate] = []
        self._leaf_cache: dict[tuple, int] = {}

    def raw(self, g: Gate) -> int:
        self.gates.append(g)
        return len(self.gates) - 1

    def input(self, var: int) -> int:
        if self.share_leaves:
            key = (INPUT, var)
            if key not in self._leaf_cache:
                self._leaf_cache[key] = self.raw(Input(var))
            return self._leaf_cache[key]
        return self.raw(Input(var))

    def const(self, value: int) -> int:
        value %= self.ctx.p
        if self.share_leaves:
            key = (CONST, value)
            if key not in self._leaf_cache:
                self._leaf_cache[key] = self.raw(Const(value))
            return self._leaf_cache[key]
        return self.raw(Const(value))

    def add(self, *children: int) -> int:
        if len(children) == 1 and not isinstance(children[0], int):
            children = tuple(children[0])
        return self.raw(Add(*children))

    def mul(self, *children: int) -> int:
        if len(children) == 1 and not isinstance(children[0], int):
            children = tuple(children[0])
        return self.raw(Mul(*children))

    def div(self, num: int, den: int) -> int:
        return self.raw(Div(num, den))

    def neg(self, a: int) -> int:
        return self.mul(self.const(-1), a)

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def one_minus(self, a: int) -> int:
        return self.add(self.const(1), self.neg(a))

    def copy_of(self, c: Circuit, var_map: Mapping[int, int] | None = None) -> int:
        """Append the gates of ``c``; ``var_map`` sends variables to gate ids."""
        ids: list[int] = []
        for g in c.gates:
            if g.kind == INPUT:
                if var_map is not None and g.var in var_map:
                    ids.append(var_map[g.var])
                else:
                    ids.append(self.input(g.var))
            elif g.kind == CONST:
                ids.append(self.const(g.const))
            else:
                ids.append(self.raw(Gate(g.kind, children=tuple(ids[ch] for ch in g.children))))
        return ids[c.output]

    def build(self, output: int, prune: bool = True) -> Circuit:
        gates, out = self.gates, output
        if prune:
            reach = _reachable(gates, output)
            if len(reach) != len(gates):
                remap: dict[int, int] = {}
                kept: list[Gate] = []
                for i, g in enumerate(gates):
                    if i in reach:
                        remap[i] = len(kept)
                        kept.append(Gate(g.kind, g.var, g.const, tuple(remap[c] for c in g.children)))
                gates, out = kept, remap[output]
        return Circuit(
            gates, out, self.n_vars, self.fanin_bound, self.ctx, self.division_bearing
        )


def substitute(c: Circuit, subs: Mapping[int, Circuit], n_vars: int | None = None) -> Circuit:
    """Replace variable ``i`` by the sub-circuit ``subs[i]``.

    Unlisted variables stay put. ``n_vars`` sets the arity of the result
    (default: the larger of ``c.n_vars`` and the substituted arities).
    """
    if n_vars is None:
        n_vars = max([c.n_vars] + [s.n_vars for s in subs.values()])
    b = CircuitBuilder(n_vars, c.fanin_bound, c.ctx, division_bearing=None)
    ids: list[int] = []
    for g in c.gates:
        if g.kind == INPUT and g.var in subs:
            # every use gets its own copy so formulas stay formulas
            ids.append(b.copy_of(subs[g.var]))
        elif g.kind == INPUT:
            ids.append(b.input(g.var))
        elif g.kind == CONST:
            ids.append(b.const(g.const))
        else:
            ids.append(b.raw(Gate(g.kind, children=tuple(ids[ch] for ch in g.children))))
    return b.build(ids[c.output])


def reorder(c: Circuit, order: Sequence[int]) -> Circuit:
    """Same circuit with gates listed in another topological order."""
    pos = {old: new for new, old in enumerate(order)}
    gates = [None] * len(order)
    for old, g in enumerate(c.gates):
        gates[pos[old]] = Gate(g.kind, g.var, g.const, tuple(pos[ch] for ch in g.children))
    return Circuit(gates, pos[c.output], c.n_vars, c.fanin_bound, c.ctx, c.division_bearing)


# parse trees ---------------------------------------------------------------


@dataclass(frozen=True)
class ParseTree:
    selected: frozenset[int]
    choice: Mapping[int, int] = field(default_factory=dict)


def parse_trees(
    c: Circuit, point: Sequence[int], cap: int = 100_000
) -> Iterator[tuple[ParseTree, FieldElem]]:
    """All parse trees of a division-free formula with their weights at ``point``.

    An add gate keeps one child, a mul gate keeps all of them; the weight is the
    product of the selected leaves.
    """
    if not c.is_formula:
        raise CircuitError("parse trees are defined for formulas")
    if c.division_bearing:
        raise CircuitError("parse trees need a division-free formula")
    count = count_parse_trees(c)
    if count > cap:
        raise EnumerationCapExceeded(f"{count} parse trees exceed cap {cap}")
    p = c.ctx.p
    vals = [0] * len(c.gates)
    for i, g in enumerate(c.gates):
        if g.kind == INPUT:
            vals[i] = int(point[g.var]) % p
        elif g.kind == CONST:
            vals[i] = g.const

    def trees(i: int) -> list[tuple[frozenset, tuple, int]]:
        g = c.gates[i]
        if g.is_leaf:
            return [(frozenset((i,)), (), vals[i])]
        if g.kind == ADD:
            out = []
            for ch in g.children:
                for sel, ch_choice, w in trees(ch):
                    out.append((sel | {i}, ch_choice + ((i, ch),), w))
            return out
        partial = [(frozenset((i,)), (), 1)]
        for ch in g.children:
            sub = trees(ch)
            partial = [
                (s1 | s2, c1 + c2, w1 * w2 % p)
                for s1, c1, w1 in partial
                for s2, c2, w2 in sub
            ]
        return partial

    for sel, choice, w in trees(c.output):
        yield ParseTree(sel, dict(choice)), FieldElem(w, c.ctx)


def count_parse_trees(c: Circuit) -> int:
    cnt = [1] * len(c.gates)
    for i, g in enumerate(c.gates):
        if g.kind == ADD:
            cnt[i] = sum(cnt[ch] for ch in g.children)
        elif g.kind in (MUL, DIV):
            acc = 1
            for ch in g.children:
                acc *= cnt[ch]
            cnt[i] = acc
    return cnt[c.output]


# text format ---------------------------------------------------------------


def dumps(c: Circuit) -> str:
    lines = [f"VARS {c.n_vars} FANIN {c.fanin_bound} MODULUS {c.ctx.p}"]
    for i, g in enumerate(c.gates):
        if g.kind == INPUT:
            lines.append(f"{i} INPUT {g.var}")
        elif g.kind == CONST:
            lines.append(f"{i} CONST {g.const}")
        else:
            lines.append(f"{i} {g.kind.upper()} " + " ".join(map(str, g.children)))
    lines.append(f"OUTPUT {c.output}")
    return "\n".join(lines) + "\n"


class MalformedInput(ValueError):
    pass


def loads(text: str | Iterable[str]) -> Circuit:
    lines = text.splitlines() if isinstance(text, str) else list(text)
    lines = [ln.strip() for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise MalformedInput("empty circuit file")
    head = lines[0].split()
    if len(head) != 6 or head[0::2] != ["VARS", "FANIN", "MODULUS"]:
        raise MalformedInput(f"bad header: {lines[0]!r}")
    try:
        n_vars, b, p = int(head[1]), int(head[3]), int(head[5])
        ctx = FieldContext(p)
    except ValueError as e:
        raise MalformedInput(str(e)) from None
    gates: dict[int, Gate] = {}
    output = None
    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] == "OUTPUT":
            if output is not None or len(parts) != 2:
                raise MalformedInput(f"bad OUTPUT line: {ln!r}")
            output = int(parts[1])
            continue
        try:
            gid, kind, args = int(parts[0]), parts[1], [int(x) for x in parts[2:]]
        except (ValueError, IndexError):
            raise MalformedInput(f"bad gate line: {ln!r}") from None
        if gid in gates:
            raise MalformedInput(f"duplicate gate id {gid}")
        if kind == "INPUT" and len(args) == 1:
            gates[gid] = Input(args[0])
        elif kind == "CONST" and len(args) == 1:
            gates[gid] = Const(args[0] % p)
        elif kind in ("ADD", "MUL") and args:
            gates[gid] = Gate(kind.lower(), children=tuple(args))
        elif kind == "DIV" and len(args) == 2:
            gates[gid] = Div(*args)
        else:
            raise MalformedInput(f"bad gate line: {ln!r}")
    if output is None:
        raise MalformedInput("missing OUTPUT line")
    ids = list(gates)
    if ids == list(range(len(ids))) and all(
        ch < i for i, g in enumerate(gates.values()) for ch in g.children
    ):
        for i, g in gates.items():
            if i in g.children:
                raise CycleDetected(f"gate {i} references itself")
        return Circuit(list(gates.values()), output, n_vars, b, ctx)
    for gid, g in gates.items():
        for ch in g.children:
            if ch not in gates:
                raise DanglingChild(f"gate {gid} references missing gate {ch}")
    sinks = set(gates) - {ch for g in gates.values() for ch in g.children}
    if len(sinks) > 1:
        raise MultipleOutputs(f"gates of out-degree 0: {sorted(sinks)[:8]}")
    return from_unordered(gates, output, n_vars, fanin_bound=b, ctx=ctx)
