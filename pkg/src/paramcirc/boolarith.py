"""Boolean-arithmetic formulas and the support-component pipeline.

A Boolean-arithmetic (BA) formula is a weight-restricted sum

    sum_{e in ones(n, W)} B(e) * prod_i (R_i(X) e_i + 1 - e_i)

with B a Boolean formula and R_i circuits (possibly with divisions) over X.
:func:`build_spc_ba` writes spc_k of a five-layer formula as one BA formula
using restrictions f|_A, Moebius quotients of restricted child polynomials
and zero sentinels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Iterable, Sequence

from .circuit import Circuit, CircuitBuilder, EnumerationCapExceeded, MalformedInput, dumps, loads, ADD, MUL
from .exactfield import DEFAULT_FIELD, FieldContext, FieldElem
from .modelcount import weighted_model_count
from .polyoracle import SparsePoly, expand_all, restrict, spc, support
from .sums import (
    AND,
    BCONST,
    FALSE,
    NOT,
    OR,
    TRUE,
    VAR,
    BooleanFormula,
    And,
    Implies,
    Not,
    Or,
    Var,
    balanced_and,
    from_prefix,
    gadget_general,
    ones,
    to_prefix,
)
from .transforms import FiveLayerFormula

SUPPORT_CAP = 8
BA_ENUM_CAP = 10**6


class LayoutMismatch(ValueError):
    pass


class SupportTooLarge(ValueError):
    pass


# formulas --------------------------------------------------------------------


@dataclass(frozen=True)
class BAFormula:
    B: BooleanFormula
    coeffs: tuple[Circuit | None, ...]  # None means R_i = 1
    weight: int
    n_x: int
    ctx: FieldContext = DEFAULT_FIELD
    hints: tuple[int, ...] = field(default=(), compare=False)
    info: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if self.B.variables and self.B.max_var() >= self.n_assign:
            raise ValueError("formula uses a variable beyond the coefficient list")
        for r in self.coeffs:
            if r is not None and r.n_vars != self.n_x:
                raise LayoutMismatch(f"coefficient over {r.n_vars} variables, expected {self.n_x}")

    @property
    def n_assign(self) -> int:
        return len(self.coeffs)

    def coefficient_values(self, x: Sequence[int]) -> list[int]:
        cache: dict[int, int] = {}
        out = []
        for r in self.coeffs:
            if r is None:
                out.append(1)
            else:
                if id(r) not in cache:
                    cache[id(r)] = r(x)
                out.append(cache[id(r)])
        return out

    def to_text(self) -> str:
        lines = [f"BA ASSIGN {self.n_assign} XVARS {self.n_x} MODULUS {self.ctx.p}",
                 f"FORMULA {to_prefix(self.B)}"]
        for i, r in enumerate(self.coeffs):
            if r is not None:
                lines.append(f"R {i}")
                lines.append(dumps(r).rstrip("\n"))
        if self.hints:
            lines.append("HINTS " + " ".join(map(str, self.hints)))
        lines.append(f"WEIGHT {self.weight}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BAFormula":
        rows = [ln for ln in text.splitlines() if ln.strip()]
        try:
            head = rows[0].split()
            if head[0] != "BA" or head[1] != "ASSIGN" or head[3] != "XVARS" or head[5] != "MODULUS":
                raise MalformedInput("BA file must start with 'BA ASSIGN n XVARS m MODULUS p'")
            n, n_x, p = int(head[2]), int(head[4]), int(head[6])
            if not rows[1].startswith("FORMULA "):
                raise MalformedInput("second line must be 'FORMULA <prefix>'")
            B = from_prefix(rows[1][len("FORMULA "):])
            coeffs: list[Circuit | None] = [None] * n
            hints: tuple[int, ...] = ()
            i = 2
            while not rows[i].startswith("WEIGHT"):
                if rows[i].startswith("R "):
                    idx = int(rows[i].split()[1])
                    j = i + 1
                    while not rows[j].startswith("OUTPUT"):
                        j += 1
                    coeffs[idx] = loads("\n".join(rows[i + 1 : j + 1]))
                    i = j + 1
                elif rows[i].startswith("HINTS"):
                    hints = tuple(int(t) for t in rows[i].split()[1:])
                    i += 1
                else:
                    raise MalformedInput(f"unexpected line {rows[i]!r}")
            weight = int(rows[i].split()[1])
        except (IndexError, ValueError) as e:
            if isinstance(e, MalformedInput):
                raise
            raise MalformedInput(f"bad BA file: {e}") from None
        return cls(B, tuple(coeffs), weight, n_x, FieldContext(p), hints)


def _const_circuit(n_x: int, value: int, ctx: FieldContext) -> Circuit:
    b = CircuitBuilder(n_x, ctx=ctx)
    return b.build(b.const(value))


def ba_const(value: int, n_x: int = 0, ctx: FieldContext = DEFAULT_FIELD) -> BAFormula:
    """One variable forced to 1 carrying the constant."""
    return BAFormula(Var(0), (_const_circuit(n_x, value, ctx),), 1, n_x, ctx)


def ba_zero(n_x: int = 0, ctx: FieldContext = DEFAULT_FIELD) -> BAFormula:
    return BAFormula(FALSE, (), 0, n_x, ctx)


def ba_eval(ba: BAFormula, x: Sequence[int], node_cap: int | None = None) -> FieldElem:
    """The defining weighted sum, by exact weighted model counting."""
    vals = ba.coefficient_values([int(v) for v in x])
    val = weighted_model_count(ba.B, ba.n_assign, ba.weight, w1=vals, p=ba.ctx.p,
                               priority=ba.hints, node_cap=node_cap)
    return FieldElem(val, ba.ctx)


def ba_eval_enumerate(ba: BAFormula, x: Sequence[int], cap: int = BA_ENUM_CAP) -> FieldElem:
    """The defining weighted sum by direct enumeration (oracle)."""
    if comb(ba.n_assign, ba.weight) > cap:
        raise EnumerationCapExceeded(f"C({ba.n_assign},{ba.weight}) exceeds cap {cap}")
    vals = ba.coefficient_values([int(v) for v in x])
    p = ba.ctx.p
    total = 0
    for e in ones(ba.n_assign, ba.weight):
        if ba.B.evaluate(e):
            term = 1
            for i, bit in enumerate(e):
                if bit:
                    term = term * vals[i] % p
            total += term
    return FieldElem(total % p, ba.ctx)


def rename(f: BooleanFormula, mapping: Sequence[int] | dict[int, int]) -> BooleanFormula:
    if f.op == VAR:
        return Var(mapping[f.var])
    if f.op == BCONST:
        return f
    return BooleanFormula(f.op, tuple(rename(a, mapping) for a in f.args))


def _big_or(parts: Sequence[BooleanFormula]) -> BooleanFormula:
    parts = list(parts)
    if not parts:
        return FALSE
    return parts[0] if len(parts) == 1 else Or(*parts)


def _iff(a: BooleanFormula, b: BooleanFormula) -> BooleanFormula:
    if b is TRUE:
        return a
    if b is FALSE:
        return Not(a)
    return And(Implies(a, b), Implies(b, a))


def _big_and(parts: Sequence[BooleanFormula]) -> BooleanFormula:
    parts = list(parts)
    if not parts:
        return TRUE
    return parts[0] if len(parts) == 1 else And(*parts)


# combining BA formulas -------------------------------------------------------


def ba_scale(f: BAFormula, c: int) -> BAFormula:
    """c * f, via one extra variable forced to 1 with coefficient c."""
    c %= f.ctx.p
    if c == 0:
        return ba_zero(f.n_x, f.ctx)
    if c == 1:
        return f
    t = f.n_assign
    return BAFormula(
        balanced_and([f.B, Var(t)]),
        f.coeffs + (_const_circuit(f.n_x, c, f.ctx),),
        f.weight + 1,
        f.n_x,
        f.ctx,
        f.hints,
        dict(f.info),
    )


def ba_add(f: BAFormula, g: BAFormula) -> BAFormula:
    """One BA formula with value f + g.

    A selector s picks the contributing side; the other side's variables are
    forced to 0, so its product is 1. A prefix chain of padding variables
    (p_{i+1} -> p_i) with a branch-specific length equalizes the weights, so
    the selector bit and both sums live in a single weight-restricted sum.
    """
    if f.n_x != g.n_x or f.ctx.p != g.ctx.p:
        raise LayoutMismatch("BA formulas over different X layouts or fields")
    nf, ng = f.n_assign, g.n_assign
    s = nf + ng
    W = max(f.weight + 1, g.weight)
    r1, r0 = W - f.weight - 1, W - g.weight
    D = max(r1, r0)
    pads = [s + 1 + i for i in range(D)]

    def exact(r: int) -> list[BooleanFormula]:
        out = []
        if r >= 1:
            out.append(Var(pads[r - 1]))
        if r < D:
            out.append(Not(Var(pads[r])))
        return out

    gB = _shift(g.B, nf)
    zero_g = _big_and([Not(Var(nf + j)) for j in range(ng)])
    zero_f = _big_and([Not(Var(i)) for i in range(nf)])
    side_f = balanced_and([Var(s), f.B, zero_g] + exact(r1))
    side_g = balanced_and([Not(Var(s)), zero_f, gB] + exact(r0))
    chain_ = _big_and([Implies(Var(pads[i + 1]), Var(pads[i])) for i in range(D - 1)])
    B = balanced_and([Or(side_f, side_g), chain_])
    hints = (s,) + f.hints + tuple(nf + h for h in g.hints)
    return BAFormula(B, f.coeffs + g.coeffs + (None,) * (1 + D), W, f.n_x, f.ctx, hints)


def _shift(f: BooleanFormula, offset: int) -> BooleanFormula:
    if f.op == VAR:
        return Var(f.var + offset)
    if f.op == BCONST:
        return f
    return BooleanFormula(f.op, tuple(_shift(a, offset) for a in f.args))


def ba_sum(parts: Sequence[BAFormula], n_x: int = 0, ctx: FieldContext = DEFAULT_FIELD) -> BAFormula:
    """Balanced tree of :func:`ba_add`, skipping formulas that are identically 0."""
    parts = [p for p in parts if p.B is not FALSE]
    if not parts:
        return ba_zero(n_x, ctx)
    while len(parts) > 1:
        parts = [ba_add(parts[i], parts[i + 1]) if i + 1 < len(parts) else parts[i]
                 for i in range(0, len(parts), 2)]
    return parts[0]


def merge_blocks_gadget(
    B: BooleanFormula,
    coeffs: Sequence[Circuit | None],
    block1: Sequence[int],
    k1: int,
    block2: Sequence[int],
    k2: int,
    n_x: int,
    ctx: FieldContext,
) -> BAFormula:
    """Turn a sum with k1 ones on block1 and k2 on block2 into one bounded sum.

    The blocks are wired into the X and Y sides of the general selection
    gadget; its padding and Z variables carry coefficient 1. Every variable
    must belong to one of the blocks.
    """
    if k1 > k2:
        block1, k1, block2, k2 = block2, k2, block1, k1
    n = len(coeffs)
    if k1 == 0:
        forced = [Not(Var(v)) for v in block1]
        return BAFormula(balanced_and([B, _big_and(forced)]), tuple(coeffs), k2, n_x, ctx)
    if k2 > len(block2):
        return ba_zero(n_x, ctx)
    l, m, G = gadget_general(len(block1), len(block2), k1, k2)
    mapping: dict[int, int] = {}
    nxt = n
    for v in range(m * m + 2 * m):
        mapping[v] = -1
    for i, v in enumerate(block1):
        mapping[i] = v
    for j, v in enumerate(block2):
        mapping[m + j] = v
    for v in range(m * m + 2 * m):
        if mapping[v] < 0:
            mapping[v] = nxt
            nxt += 1
    new_coeffs = tuple(coeffs) + (None,) * (nxt - n)
    return BAFormula(balanced_and([B, rename(G, mapping)]), new_coeffs, l * l + 2 * l, n_x, ctx)


# restrictions ----------------------------------------------------------------


def subsets(T: Iterable[int]) -> list[frozenset[int]]:
    T = sorted(T)
    return [frozenset(c) for r in range(len(T) + 1) for c in combinations(T, r)]


@dataclass
class RestrictionTable:
    """For gates c of a five-layer formula: p_c, its support T_c and every p_c|_B, B within T_c."""

    n_vars: int
    ctx: FieldContext
    polys: dict[int, SparsePoly] = field(default_factory=dict)
    supports: dict[int, frozenset[int]] = field(default_factory=dict)
    restricted: dict[tuple[int, frozenset[int]], SparsePoly] = field(default_factory=dict)
    at_ones: dict[tuple[int, frozenset[int]], int] = field(default_factory=dict)

    @classmethod
    def build(cls, f5: FiveLayerFormula, gates: Iterable[int] | None = None,
              support_cap: int = SUPPORT_CAP) -> "RestrictionTable":
        c = f5.circuit
        gates = f5.gates_in_layer(4) if gates is None else list(gates)
        all_polys = expand_all(c)
        if not gates:
            return cls(c.n_vars, c.ctx)
        return cls.from_polys({g: all_polys[g] for g in gates}, support_cap)

    @classmethod
    def from_polys(cls, polys: dict[int, SparsePoly], support_cap: int = SUPPORT_CAP) -> "RestrictionTable":
        first = next(iter(polys.values()))
        t = cls(first.n_vars, first.ctx)
        ones_pt = [1] * first.n_vars
        for g, p in polys.items():
            T = frozenset().union(*(support(e) for e in p.terms)) if p.terms else frozenset()
            if len(T) > support_cap:
                raise SupportTooLarge(f"polynomial {g} has support size {len(T)} > {support_cap}")
            t.polys[g] = p
            t.supports[g] = T
            for B in subsets(T):
                r = restrict(p, B)
                t.restricted[(g, B)] = r
                t.at_ones[(g, B)] = r(ones_pt)
        return t

    def key(self, g: int, A: Iterable[int]) -> tuple[int, frozenset[int]]:
        return g, frozenset(A) & self.supports[g]

    def restrict(self, g: int, A: Iterable[int]) -> SparsePoly:
        """p_g|_A, looked up as p_g|_(A within T_g)."""
        return self.restricted[self.key(g, A)]

    def value_at_ones(self, g: int, A: Iterable[int]) -> int:
        return self.at_ones[self.key(g, A)]

    def is_zero(self, g: int, B: Iterable[int], at_ones: bool) -> bool:
        if at_ones:
            return self.value_at_ones(g, B) == 0
        return self.restrict(g, B).is_zero()


def moebius_exponents(B: frozenset[int]) -> list[tuple[frozenset[int], int]]:
    """(C, (-1)^(|B| - |C|)) for every C within B."""
    return [(C, 1 if (len(B) - len(C)) % 2 == 0 else -1) for C in subsets(B)]


def moebius_Q(table: RestrictionTable, c: int, B: Iterable[int], at_ones: bool):
    """Q_{c,B} = prod_{C in B} (p_c|_C)^(+-1), zero factors omitted.

    Returns a residue when ``at_ones`` (factors evaluated at all-ones), else a
    circuit over X with at most one division.
    """
    return _rational(table, [(c, frozenset(B))], at_ones, table.n_vars)


def _poly_into(b: CircuitBuilder, f: SparsePoly) -> int:
    terms = []
    for e, cf in sorted(f.terms.items()):
        factors = ([b.const(cf)] if cf != 1 or not any(e) else []) + [
            b.input(v) for v, k in enumerate(e) for _ in range(k)
        ]
        terms.append(factors[0] if len(factors) == 1 else b.mul(factors))
    if not terms:
        return b.const(0)
    return terms[0] if len(terms) == 1 else b.add(terms)


def _rational(table: RestrictionTable, items: Sequence[tuple[int, frozenset[int]]], at_ones: bool, n_x: int):
    ctx = table.ctx
    num: list[tuple[int, frozenset[int]]] = []
    den: list[tuple[int, frozenset[int]]] = []
    for c, B in items:
        for C, sign in moebius_exponents(B):
            if table.is_zero(c, C, at_ones):
                continue
            (num if sign > 0 else den).append((c, C))
    if at_ones:
        v = 1
        for c, C in num:
            v = v * table.value_at_ones(c, C) % ctx.p
        for c, C in den:
            v = v * ctx.inv(table.value_at_ones(c, C)) % ctx.p
        return v
    b = CircuitBuilder(n_x, ctx=ctx)

    def product(keys: list[tuple[int, frozenset[int]]]) -> int:
        factors = [_poly_into(b, table.restrict(c, C)) for c, C in keys]
        if not factors:
            return b.const(1)
        return factors[0] if len(factors) == 1 else b.mul(factors)

    top = product(num)
    if den:
        top = b.div(top, product(den))
    return b.build(top)


def _coeff_circuit(value, n_x: int, ctx: FieldContext) -> Circuit | None:
    if isinstance(value, Circuit):
        return value
    return None if value == 1 else _const_circuit(n_x, value, ctx)


def restricted_gate_poly(f5: FiveLayerFormula, table: RestrictionTable, u: int, A: Iterable[int]) -> SparsePoly:
    """q_u|_A for a layer-3 gate u, assembled from its children's restrictions."""
    g = f5.circuit.gates[u]
    parts = [table.restrict(c, A) for c in g.children]
    acc = parts[0]
    for p in parts[1:]:
        acc = acc * p if g.kind == MUL else acc + p
    return acc


# the support-component construction ------------------------------------------


@dataclass
class _Vars:
    n: int = 0
    coeffs: list = field(default_factory=list)
    names: list = field(default_factory=list)

    def new(self, name, coeff=None) -> int:
        self.coeffs.append(coeff)
        self.names.append(name)
        self.n += 1
        return self.n - 1


def restricted_sum_ba(
    f5: FiveLayerFormula,
    table: RestrictionTable,
    u: int,
    ell: int,
    at_ones: bool,
    merge: str = "twins",
) -> BAFormula:
    """BA formula for the sum over |A| = ell of q_u|_A, u a layer-2 gate.

    Variables: y_i (X_i in A), x_B for subsets of supports of children of
    multiplication gates, switches s_{j,c} choosing one child c of each
    addition gate, z_{c,B} for the chosen children, and zero sentinels w, w'.
    """
    c = f5.circuit
    n, ctx = c.n_vars, c.ctx
    n_x = n
    gate = c.gates[u]
    mul_kids = [v for v in gate.children if c.gates[v].kind == MUL]
    add_kids = [v for v in gate.children if c.gates[v].kind == ADD]
    V = _Vars()
    y = [V.new(("y", i)) for i in range(n)]

    def pattern(cg: int, B: frozenset[int]) -> BooleanFormula:
        T = table.supports[cg]
        return balanced_and([Var(y[i]) for i in sorted(B)] + [Not(Var(y[i])) for i in sorted(T - B)])

    small: list[BooleanFormula] = []  # clauses under the one unbounded AND
    top: list[BooleanFormula] = []  # parts holding an unbounded OR

    # multiplication children: x_B shared across children
    mul_children = [cg for v in mul_kids for cg in c.gates[v].children]
    fam: dict[frozenset[int], list[int]] = {}
    for cg in mul_children:
        for B in subsets(table.supports[cg]):
            fam.setdefault(B, []).append(cg)
    xvar = {}
    for B in sorted(fam, key=lambda s: (len(s), sorted(s))):
        R = _rational(table, [(cg, B) for cg in fam[B]], at_ones, n_x)
        xvar[B] = V.new(("x", tuple(sorted(B))), _coeff_circuit(R, n_x, ctx))
        small.append(_iff(Var(xvar[B]), balanced_and([Var(y[i]) for i in sorted(B)])))
    zero_mul = [(cg, B) for cg in mul_children for B in subsets(table.supports[cg]) if table.is_zero(cg, B, at_ones)]

    # addition children: one switch per child, z_{c,B} per subset
    zero_add = []
    for j, v in enumerate(add_kids):
        kids = c.gates[v].children
        svars = [V.new(("s", j, cg)) for cg in kids]
        top.append(_big_or([Var(s) for s in svars]))
        for a, b_ in combinations(svars, 2):
            small.append(Not(And(Var(a), Var(b_))))
        for s, cg in zip(svars, kids):
            for B in subsets(table.supports[cg]):
                R = _rational(table, [(cg, B)], at_ones, n_x)
                z = V.new(("z", j, cg, tuple(sorted(B))), _coeff_circuit(R, n_x, ctx))
                small.append(_iff(Var(z), balanced_and([Var(s)] + [Var(y[i]) for i in sorted(B)])))
                if table.is_zero(cg, B, at_ones):
                    zero_add.append((z, cg, B))

    zero = _const_circuit(n_x, 0, ctx)
    w = V.new(("w",), zero)
    w2 = V.new(("w'",), zero)
    cond_w = _big_or([pattern(cg, B) for cg, B in zero_mul])
    cond_w2 = _big_or([balanced_and([Var(z), pattern(cg, B)]) for z, cg, B in zero_add])
    for var, cond in ((w, cond_w), (w2, cond_w2)):
        if cond is FALSE:
            small.append(Not(Var(var)))
        else:
            top.append(_iff(Var(var), cond))

    others = list(range(n, V.n))
    info = {"u": u, "ell": ell, "n_core": V.n}
    if merge == "twins":
        # a complement twin for every non-y variable fixes that block's count
        for o in others:
            t = V.new(("twin", o))
            small.append(Or(Var(o), Var(t)))
            small.append(Not(And(Var(o), Var(t))))
        B = balanced_and([_big_and(small)] + top)
        s_vars = [v for v, nm in enumerate(V.names) if nm[0] == "s"]
        return BAFormula(B, tuple(V.coeffs), ell + len(others), n_x, ctx, tuple(s_vars) + tuple(y), info)
    if merge != "gadget":
        raise ValueError(f"unknown merge {merge!r}")
    q = _extension_bound(table, fam, add_kids, c, ell)
    dummies = [V.new(("d", i)) for i in range(q)]
    small += [Implies(Var(dummies[i + 1]), Var(dummies[i])) for i in range(q - 1)]
    info["dummies"] = q
    B = balanced_and([_big_and(small)] + top)
    out = merge_blocks_gadget(B, V.coeffs, y, ell, others + dummies, q, n_x, ctx)
    s_vars = [v for v, nm in enumerate(V.names) if nm[0] == "s"]
    return BAFormula(out.B, out.coeffs, out.weight, n_x, ctx, tuple(s_vars) + tuple(y), info)


def _extension_bound(table: RestrictionTable, fam, add_kids, c: Circuit, ell: int) -> int:
    """Most ones a satisfying extension of |A| = ell sets outside the y block."""
    x_max = sum(1 for B in fam if len(B) <= ell)
    z_max = 0
    for v in add_kids:
        z_max += max(sum(1 for B in subsets(table.supports[cg]) if len(B) <= ell) for cg in c.gates[v].children)
    return x_max + len(add_kids) + z_max + 2


def build_spc_ba(
    f5: FiveLayerFormula,
    k: int,
    at_ones: bool = True,
    merge: str = "twins",
    support_cap: int = SUPPORT_CAP,
) -> BAFormula:
    """BA formula for spc_k(f) (its value at all-ones when ``at_ones``).

    spc_k(f) = sum_{l <= k} (-1)^(k-l) C(n-l, k-l) sum_{|A| = l} f|_A and f|_A
    is the sum of q_u|_A over the layer-2 gates u.
    """
    c = f5.circuit
    n, ctx = c.n_vars, c.ctx
    table = RestrictionTable.build(f5, support_cap=support_cap)
    l2 = list(c.gates[c.output].children)
    parts = []
    for ell in range(min(k, n) + 1):
        coef = (-1) ** (k - ell) * comb(n - ell, k - ell)
        if coef % ctx.p == 0:
            continue
        for u in l2:
            parts.append(ba_scale(restricted_sum_ba(f5, table, u, ell, at_ones, merge), coef))
    out = ba_sum(parts, n, ctx)
    out.info.update({"k": k, "at_ones": at_ones, "merge": merge, "parts": len(parts)})
    return out


def weighted_spc_sum(g: SparsePoly, k: int) -> int:
    """sum_{l <= k} C(m - l, k - l) spc_l(g)(1, ..., 1), checked against the direct sum."""
    m = g.n_vars
    if not 0 <= k <= m:
        raise ValueError("need 0 <= k <= m")
    p = g.ctx.p
    ones_pt = [1] * m
    via_spc = sum(comb(m - l, k - l) * spc(g, l)(ones_pt) for l in range(k + 1)) % p
    direct = sum(g(e) for e in ones(m, k)) % p
    if via_spc != direct:
        raise AssertionError(f"support-component sum {via_spc} != direct sum {direct}")
    return via_spc
