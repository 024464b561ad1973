"""Circuit passes: formula conversion, the weft-1 five-layer normal form,
homogeneous-component extraction and division elimination."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit import ADD, CONST, DIV, INPUT, MUL, Circuit, CircuitBuilder, DenominatorZeroAtPoint, Gate
from .polyoracle import SparsePoly, TermCapExceeded, interpolate_univariate, inverse_vandermonde, mul

FORMULA_SIZE_CAP = 10**6
DEPTH_CAP = 12


class SizeCapExceeded(RuntimeError):
    pass


class WeftTooHigh(ValueError):
    pass


class DepthCapExceeded(ValueError):
    pass


class InsufficientFieldPoints(ValueError):
    pass


class NoValidShiftFound(RuntimeError):
    pass


class DegreeBoundViolated(ValueError):
    pass


def formal_degrees(c: Circuit) -> list[int]:
    """Syntactic degree of every gate of a division-free circuit."""
    deg = [0] * len(c.gates)
    for i, g in enumerate(c.gates):
        if g.kind == INPUT:
            deg[i] = 1
        elif g.kind == ADD:
            deg[i] = max(deg[ch] for ch in g.children)
        elif g.kind == MUL:
            deg[i] = sum(deg[ch] for ch in g.children)
        elif g.kind == DIV:
            raise ValueError("formal degree needs a division-free circuit")
    return deg


def formal_degree(c: Circuit) -> int:
    return formal_degrees(c)[c.output]


# formulas --------------------------------------------------------------------


def formula_size(c: Circuit) -> int:
    """Edge count of the formula obtained by duplicating shared gates."""
    fs = [0] * len(c.gates)
    for i, g in enumerate(c.gates):
        fs[i] = sum(1 + fs[ch] for ch in g.children)
    return fs[c.output]


def to_formula(c: Circuit, cap: int = FORMULA_SIZE_CAP) -> Circuit:
    """Copy every gate once per use so that all out-degrees are at most 1."""
    if c.is_formula:
        return c
    size = formula_size(c)
    if size > cap:
        raise SizeCapExceeded(f"formula would have {size} edges (cap {cap})")
    b = CircuitBuilder(c.n_vars, c.fanin_bound, c.ctx, division_bearing=c.division_bearing)

    def emit(i: int) -> int:
        g = c.gates[i]
        if g.is_leaf:
            return b.raw(g)
        return b.raw(Gate(g.kind, children=tuple(emit(ch) for ch in g.children)))

    return b.build(emit(c.output))


# five-layer normal form ------------------------------------------------------


@dataclass(frozen=True)
class FiveLayerFormula:
    circuit: Circuit
    layers: tuple[int, ...]  # 1..5 for inner gates, 6 for leaves
    fanin_bound: int

    def gates_in_layer(self, layer: int) -> list[int]:
        return [i for i, l in enumerate(self.layers) if l == layer]

    def violations(self) -> list[str]:
        c, L, b = self.circuit, self.layers, self.fanin_bound
        out = []
        if not c.is_formula:
            out.append("not a formula")
        if L[c.output] != 1:
            out.append("root is not in layer 1")
        for i, g in enumerate(c.gates):
            lay = L[i]
            if g.is_leaf:
                if lay != 6:
                    out.append(f"leaf {i} in layer {lay}")
                continue
            for ch in g.children:
                if L[ch] != lay + 1:
                    out.append(f"gate {i} (layer {lay}) has child {ch} in layer {L[ch]}")
            if lay != 3 and g.fanin > b:
                out.append(f"gate {i} in layer {lay} has fan-in {g.fanin} > {b}")
            if lay == 1 and g.kind != ADD:
                out.append("root is not an addition gate")
            if lay in (2, 5) and g.kind != MUL:
                out.append(f"gate {i} in layer {lay} is not a multiplication")
            if lay == 3 and g.kind not in (ADD, MUL):
                out.append(f"gate {i} in layer 3 is {g.kind}")
            if lay == 4:
                if g.kind != ADD:
                    out.append(f"gate {i} in layer 4 is not an addition")
                consts = sum(1 for ch in g.children if _computes_constant(c, ch))
                if consts > 1:
                    out.append(f"gate {i} in layer 4 has {consts} constant children")
            if lay == 5:
                consts = sum(1 for ch in g.children if c.gates[ch].kind == CONST)
                if consts != 1:
                    out.append(f"gate {i} in layer 5 has {consts} constant inputs")
        return out

    def check(self) -> None:
        v = self.violations()
        if v:
            raise AssertionError("; ".join(v[:5]))

    @property
    def add_gates_l3(self) -> list[int]:
        return [i for i in self.gates_in_layer(3) if self.circuit.gates[i].kind == ADD]

    @property
    def mul_gates_l3(self) -> list[int]:
        return [i for i in self.gates_in_layer(3) if self.circuit.gates[i].kind == MUL]


def _computes_constant(c: Circuit, i: int) -> bool:
    stack = [i]
    while stack:
        g = c.gates[stack.pop()]
        if g.kind == INPUT:
            return False
        stack.extend(g.children)
    return True


def weft1_normal_form(c: Circuit, depth_cap: int = DEPTH_CAP, term_cap: int = 10**5) -> FiveLayerFormula:
    """Rewrite a constant-depth weft-1 circuit into the five-layer form.

    Every bounded-fan-in part is expanded into monomials: the part above the
    unbounded gates gives layers 1-2, each child of an unbounded gate gives a
    layer-4 sum of layer-5 monomials. Shorter paths are padded with fan-in-1
    gates.
    """
    if c.division_bearing:
        raise ValueError("weft-1 normal form needs a division-free circuit")
    m = c.metrics
    if m.weft > 1:
        raise WeftTooHigh(f"weft {m.weft} > 1")
    if m.depth > depth_cap:
        raise DepthCapExceeded(f"depth {m.depth} exceeds cap {depth_cap}")
    b0 = c.fanin_bound
    n = c.n_vars
    unbounded = [i for i, g in enumerate(c.gates) if g.fanin > b0]
    # reachability from the output without passing through an unbounded gate
    top = set()
    stack = [c.output]
    while stack:
        i = stack.pop()
        if i in top:
            continue
        top.add(i)
        if c.gates[i].fanin <= b0:
            stack.extend(c.gates[i].children)
    top_unbounded = sorted(i for i in unbounded if i in top)
    zindex = {g: n + j for j, g in enumerate(top_unbounded)}
    nz = n + len(top_unbounded)
    ctx = c.ctx

    def polys(nvars: int, stop: dict[int, int]) -> dict[int, SparsePoly]:
        memo: dict[int, SparsePoly] = {}
        for i, g in enumerate(c.gates):
            if i in stop:
                memo[i] = SparsePoly.var(nvars, stop[i], ctx)
            elif g.kind == INPUT:
                memo[i] = SparsePoly.var(nvars, g.var, ctx)
            elif g.kind == CONST:
                memo[i] = SparsePoly.const(nvars, g.const, ctx)
            elif any(ch not in memo for ch in g.children):
                continue
            elif g.kind == ADD:
                acc = memo[g.children[0]]
                for ch in g.children[1:]:
                    acc = acc + memo[ch]
                memo[i] = acc
            else:
                acc = memo[g.children[0]]
                for ch in g.children[1:]:
                    acc = mul(acc, memo[ch], term_cap)
                memo[i] = acc
            if i in memo and len(memo[i]) > term_cap:
                raise TermCapExceeded(f"expansion of gate {i} exceeds {term_cap} terms")
        return memo

    try:
        q = polys(nz, zindex)[c.output]
        low = polys(n, {})
    except TermCapExceeded as e:
        raise SizeCapExceeded(str(e)) from None

    bld = CircuitBuilder(n, ctx=ctx)
    layer: list[int] = []

    def put(gate_id: int, lay: int) -> int:
        while len(layer) <= gate_id:
            layer.append(0)
        layer[gate_id] = lay
        return gate_id

    def leaf_const(v: int) -> int:
        return put(bld.const(v), 6)

    def l5_monomial(exps: Sequence[int], coeff: int) -> int:
        kids = [leaf_const(coeff)]
        for var, d in enumerate(exps[:n]):
            for _ in range(d):
                kids.append(put(bld.input(var), 6))
        return put(bld.mul(kids), 5)

    def l4_sum(poly: SparsePoly) -> int:
        terms = sorted(poly.terms.items()) or [((0,) * n, 0)]
        return put(bld.add([l5_monomial(e, cf) for e, cf in terms]), 4)

    def padded(poly: SparsePoly) -> int:
        """A fan-in-1 layer-3 gate over a layer-4 sum."""
        return put(bld.mul(l4_sum(poly)), 3)

    def l3_gate(g: int) -> int:
        gate = c.gates[g]
        kids = [l4_sum(low[ch]) for ch in gate.children]
        return put(bld.add(kids) if gate.kind == ADD else bld.mul(kids), 3)

    l2 = []
    q_terms = sorted(q.terms.items()) or [((0,) * nz, 0)]
    for exps, coeff in q_terms:
        x_part = tuple(exps[:n])
        kids = [l3_gate(g) for j, g in enumerate(top_unbounded) for _ in range(exps[n + j])]
        if coeff != 1 or any(x_part) or not kids:
            kids.insert(0, padded(SparsePoly(n, {x_part: coeff} if coeff else {}, ctx)))
        l2.append(put(bld.mul(kids), 2))
    root = put(bld.add(l2), 1)
    out = bld.build(root, prune=False)
    bmax = max(
        [b0] + [g.fanin for i, g in enumerate(out.gates) if layer[i] in (1, 2, 4, 5)]
    )
    out = Circuit(out.gates, out.output, out.n_vars, bmax, out.ctx)
    return FiveLayerFormula(out, tuple(layer), bmax)


# homogeneous components ------------------------------------------------------


def scaled_copy(b: CircuitBuilder, c: Circuit, alpha: int, shift: Sequence[int] | None = None) -> int:
    """Append c(alpha * X + shift) to a builder; every variable use gets its own leaf."""
    return _copy_with_leaf_factory(b, c, alpha, shift)


def _copy_with_leaf_factory(b: CircuitBuilder, c: Circuit, alpha: int, shift) -> int:
    ids: list[int] = []
    p = c.ctx.p
    for g in c.gates:
        if g.kind == INPUT:
            x = b.input(g.var)
            if alpha != 1:
                x = b.mul(b.const(alpha), x)
            if shift is not None and shift[g.var] % p:
                x = b.add(x, b.const(shift[g.var]))
            ids.append(x)
        elif g.kind == CONST:
            ids.append(b.const(g.const))
        else:
            ids.append(b.raw(Gate(g.kind, children=tuple(ids[ch] for ch in g.children))))
    return ids[c.output]


def homogeneous_extract(c: Circuit, k: int, degree: int | None = None) -> Circuit:
    """Circuit for the degree-k homogeneous part: sum_i beta_i c(alpha_i X).

    alpha_i = 1, 2, ..., degree+1; beta is row k of the inverse Vandermonde
    matrix on these nodes.
    """
    if c.division_bearing:
        raise ValueError("homogeneous_extract needs a division-free circuit")
    d = formal_degree(c) if degree is None else degree
    b = CircuitBuilder(c.n_vars, c.fanin_bound, c.ctx)
    if k > d or k < 0:
        return b.build(b.const(0))
    if d + 1 >= c.ctx.p:
        raise InsufficientFieldPoints(f"need {d + 1} distinct nonzero points, p = {c.ctx.p}")
    nodes = list(range(1, d + 2))
    row = inverse_vandermonde(nodes, c.ctx)[k]
    terms = [b.mul(b.const(beta), scaled_copy(b, c, alpha)) for alpha, beta in zip(nodes, row) if beta]
    return b.build(b.add(terms) if terms else b.const(0))


# division elimination --------------------------------------------------------


def shift_candidates(n: int, count: int = 64) -> list[list[int]]:
    """Deterministic shift points: 0, then the moment curve (j, j^2, ..., j^n)."""
    return [[pow(j, i + 1) for i in range(n)] if j else [0] * n for j in range(count)]


def _denominators_ok(c: Circuit, a: Sequence[int]) -> bool:
    try:
        c(a)
    except DenominatorZeroAtPoint:
        return False
    return True


def _power_series_form(c: Circuit, a: Sequence[int], d: int) -> Circuit:
    """c(X + a) with every division replaced by a truncated power-series inverse."""
    p = c.ctx.p
    at_a = c.evaluate_all(a)
    b = CircuitBuilder(c.n_vars, c.fanin_bound, c.ctx)
    ids: list[int] = []
    for i, g in enumerate(c.gates):
        if g.kind == INPUT:
            x = b.input(g.var)
            if a[g.var] % p:
                x = b.add(x, b.const(a[g.var]))
            ids.append(x)
        elif g.kind == CONST:
            ids.append(b.const(g.const))
        elif g.kind == DIV:
            num, den = ids[g.children[0]], ids[g.children[1]]
            u0 = at_a[g.children[1]]
            u0_inv = pow(u0, -1, p)
            # 1/den = u0^-1 * sum_{j<=d} h^j with h = 1 - den/u0
            h = b.add(b.const(1), b.mul(b.const(-u0_inv), den))
            s = b.const(1)
            for _ in range(d):
                s = b.add(b.const(1), b.mul(h, s))
            ids.append(b.mul(num, b.mul(b.const(u0_inv), s)))
        else:
            ids.append(b.raw(Gate(g.kind, children=tuple(ids[ch] for ch in g.children))))
    return b.build(ids[c.output])


def check_degree_bound(c: Circuit, d: int, a: Sequence[int], lines: int = 3, seed: int = 0) -> None:
    """Interpolate c along random lines through a; nonzero coefficients above d
    mean c is not a polynomial of degree <= d."""
    rng = np.random.default_rng(seed)
    p = c.ctx.p
    for _ in range(lines):
        r = [int(v) for v in rng.integers(1, p, size=c.n_vars)]
        pts = []
        t = 1
        while len(pts) < d + 3 and t < 4 * (d + 3) + 64:
            x = [(ai + t * ri) % p for ai, ri in zip(a, r)]
            try:
                pts.append((t, c(x)))
            except DenominatorZeroAtPoint:
                pass
            t += 1
        coeffs = interpolate_univariate(pts, c.ctx)
        if any(coeffs[d + 1 :]):
            raise DegreeBoundViolated(f"coefficient above degree {d} is nonzero along a line")


def eliminate_divisions(c: Circuit, d: int, candidates: int = 64) -> Circuit:
    """Division-free circuit for a division-bearing circuit of degree <= d.

    Taylor-shift to a point a where no denominator vanishes, replace every
    division by a truncated power-series inverse, substitute X -> T X and
    interpolate in T, keep the T-coefficients of degree <= d (evaluated at
    T = 1) and undo the shift.
    """
    if not c.division_bearing:
        return c
    a = next((s for s in shift_candidates(c.n_vars, candidates) if _denominators_ok(c, s)), None)
    if a is None:
        raise NoValidShiftFound(f"no shift among {candidates} candidates avoids all zero denominators")
    check_degree_bound(c, d, a)
    series = _power_series_form(c, a, d)
    D = max(formal_degree(series), d)
    if D + 1 >= c.ctx.p:
        raise InsufficientFieldPoints(f"need {D + 1} interpolation nodes")
    nodes = list(range(1, D + 2))
    vinv = inverse_vandermonde(nodes, c.ctx)
    p = c.ctx.p
    weights = [sum(vinv[j][m] for j in range(d + 1)) % p for m in range(len(nodes))]
    b = CircuitBuilder(c.n_vars, c.fanin_bound, c.ctx)
    unshift = [-v for v in a]
    terms = []
    for t, w in zip(nodes, weights):
        if not w:
            continue
        # series(t * (X - a))
        ids: list[int] = []
        for g in series.gates:
            if g.kind == INPUT:
                x = b.input(g.var)
                if unshift[g.var] % p:
                    x = b.add(x, b.const(unshift[g.var]))
                ids.append(b.mul(b.const(t), x) if t != 1 else x)
            elif g.kind == CONST:
                ids.append(b.const(g.const))
            else:
                ids.append(b.raw(Gate(g.kind, children=tuple(ids[ch] for ch in g.children))))
        terms.append(b.mul(b.const(w), ids[series.output]))
    return b.build(b.add(terms) if terms else b.const(0))
