"""Exact weight-restricted weighted model counting.

Computes sum over assignments e of {0,1}^n with exactly W ones of
[all conjuncts true at e] * prod_i (w1[i] if e_i else w0[i]).

The search simplifies the conjuncts under the partial assignment, propagates
unit literals, splits independent components and branches on the most shared
variable. Each component returns its generating polynomial in a weight
variable t, truncated at degree W.
"""

from __future__ import annotations

from collections import Counter
from typing import Mapping, Sequence

from .circuit import EnumerationCapExceeded
from .sums import AND, BCONST, FALSE, NOT, OR, TRUE, VAR, BooleanFormula, Not

Poly = dict  # {number of ones: weighted count}, truncated at the target weight


def simplify(f: BooleanFormula, assign: Mapping[int, int]) -> BooleanFormula:
    op = f.op
    if op == VAR:
        v = assign.get(f.var)
        if v is None:
            return f
        return TRUE if v else FALSE
    if op == BCONST:
        return f
    if op == NOT:
        a = simplify(f.args[0], assign)
        if a.op == BCONST:
            return FALSE if a.value else TRUE
        if a is f.args[0]:
            return f
        if a.op == NOT:
            return a.args[0]
        return Not(a)
    absorbing = op == OR  # OR absorbs on True, AND on False
    out = []
    changed = False
    for arg in f.args:
        s = simplify(arg, assign)
        if s is not arg:
            changed = True
        if s.op == BCONST:
            if s.value == absorbing:
                return TRUE if absorbing else FALSE
            continue
        out.append(s)
    if not out:
        return FALSE if absorbing else TRUE
    if len(out) == 1:
        return out[0]
    if not changed:
        return f
    return BooleanFormula(op, tuple(out))


def _literal(f: BooleanFormula) -> tuple[int, int] | None:
    if f.op == VAR:
        return f.var, 1
    if f.op == NOT and f.args[0].op == VAR:
        return f.args[0].var, 0
    return None


class WeightedCounter:
    """Generating polynomials are sparse dicts {number of ones: weight}."""

    def __init__(self, n_vars: int, weight: int, w1: Sequence[int], w0: Sequence[int] | None, p: int,
                 priority: Sequence[int] = (), node_cap: int | None = None):
        self.n = n_vars
        self.W = weight
        self.w1 = [int(v) % p for v in w1]
        self.w0 = [1] * n_vars if w0 is None else [int(v) % p for v in w0]
        self.p = p
        self.rank = {v: i for i, v in enumerate(priority)}
        self.nodes = 0
        self.node_cap = node_cap

    def pmul(self, a: Poly, b: Poly) -> Poly:
        W, p = self.W, self.p
        out: Poly = {}
        for i, x in a.items():
            for j, y in b.items():
                if i + j <= W:
                    out[i + j] = (out.get(i + j, 0) + x * y) % p
        return {d: v for d, v in out.items() if v}

    def padd(self, a: Poly, b: Poly) -> Poly:
        out = dict(a)
        for d, v in b.items():
            out[d] = (out.get(d, 0) + v) % self.p
        return {d: v for d, v in out.items() if v}

    def var_poly(self, v: int, value: int | None) -> Poly:
        out: Poly = {}
        if value is None or value == 0:
            out[0] = self.w0[v]
        if (value is None or value == 1) and self.W >= 1:
            out[1] = self.w1[v]
        return {d: c for d, c in out.items() if c}

    def shift_scale(self, poly: Poly, v: int, value: int) -> Poly:
        """poly times the factor of variable v fixed to value."""
        p = self.p
        if value == 0:
            s = self.w0[v]
            return {d: c * s % p for d, c in poly.items() if c * s % p}
        s = self.w1[v]
        return {d + 1: c * s % p for d, c in poly.items() if d + 1 <= self.W and c * s % p}

    def free_block(self, vs: set[int]) -> Poly:
        """Product of unconstrained variable factors."""
        out: Poly = {0: 1}
        for v in sorted(vs):
            out = self.pmul(out, self.var_poly(v, None))
        return out

    def count(self, conjuncts: list[BooleanFormula], free: set[int]) -> Poly:
        """Generating polynomial over the variables in ``free``."""
        self.nodes += 1
        if self.node_cap is not None and self.nodes > self.node_cap:
            raise EnumerationCapExceeded(f"model counting exceeded {self.node_cap} search nodes")
        assign: dict[int, int] = {}
        pending: dict[int, int] = {}
        work = list(conjuncts)
        # simplify with the newest units + unit propagation, to a fixpoint
        while True:
            new: list[BooleanFormula] = []
            units: dict[int, int] = {}
            for c in work:
                s = simplify(c, pending) if pending and not c.variables.isdisjoint(pending) else c
                if s.op == BCONST:
                    if not s.value:
                        return {}
                    continue
                stack = list(s.args) if s.op == AND else [s]
                while stack:
                    part = stack.pop()
                    if part.op == AND:
                        stack.extend(part.args)
                        continue
                    lit = _literal(part)
                    if lit is not None:
                        v, val = lit
                        if units.get(v, val) != val:
                            return {}
                        units[v] = val
                    else:
                        new.append(part)
            if not units:
                work = new
                break
            for v, val in units.items():
                if v not in free and assign.get(v, val) != val:
                    return {}
                assign[v] = val
            pending = units
            work = new
        result: Poly = {0: 1}
        for v, val in assign.items():
            result = self.shift_scale(result, v, val)
        rest = free - assign.keys()
        # independent components over the remaining conjuncts
        owner: dict[int, int] = {}
        parent = list(range(len(work)))

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for i, c in enumerate(work):
            for v in c.variables:
                if v in assign:
                    continue
                if v in owner:
                    parent[find(i)] = find(owner[v])
                else:
                    owner[v] = i
        groups: dict[int, list[BooleanFormula]] = {}
        for i, c in enumerate(work):
            groups.setdefault(find(i), []).append(c)
        result = self.pmul(result, self.free_block(rest - owner.keys()))
        for comp in groups.values():
            if not result:
                break
            comp_vars = set().union(*(c.variables for c in comp)) & rest
            result = self.pmul(result, self.branch(comp, comp_vars))
        return result

    def branch(self, comp: list[BooleanFormula], comp_vars: set[int]) -> Poly:
        hinted = [v for v in comp_vars if v in self.rank]
        if hinted:
            v = min(hinted, key=self.rank.__getitem__)
        else:
            freq = Counter(v for c in comp for v in c.variables if v in comp_vars)
            v = max(sorted(freq), key=lambda u: freq[u])
        out: Poly = {}
        for val in (0, 1):
            sub = [simplify(c, {v: val}) if v in c.variables else c for c in comp]
            poly = self.count(sub, comp_vars - {v})
            out = self.padd(out, self.shift_scale(poly, v, val))
        return out


def flatten_and(f: BooleanFormula) -> list[BooleanFormula]:
    if f.op == AND:
        out = []
        for a in f.args:
            out.extend(flatten_and(a))
        return out
    return [f]


def weighted_model_count(
    conjuncts: Sequence[BooleanFormula] | BooleanFormula,
    n_vars: int,
    weight: int,
    w1: Sequence[int] | None = None,
    w0: Sequence[int] | None = None,
    fixed: Mapping[int, int] | None = None,
    p: int = (1 << 61) - 1,
    priority: Sequence[int] = (),
    node_cap: int | None = None,
) -> int:
    """Weighted count of models with exactly ``weight`` ones (mod p).

    ``priority`` lists variables to branch on first (e.g. selector bits).
    """
    if isinstance(conjuncts, BooleanFormula):
        conjuncts = flatten_and(conjuncts)
    else:
        conjuncts = [c for f in conjuncts for c in flatten_and(f)]
    if weight < 0 or weight > n_vars:
        return 0
    if w1 is None:
        w1 = [1] * n_vars
    wc = WeightedCounter(n_vars, weight, w1, w0, p, priority, node_cap)
    fixed = dict(fixed or {})
    base: Poly = {0: 1}
    for v, val in fixed.items():
        base = wc.shift_scale(base, v, val)
    conj = [simplify(c, fixed) for c in conjuncts] if fixed else list(conjuncts)
    poly = wc.count(conj, set(range(n_vars)) - fixed.keys())
    return wc.pmul(base, poly).get(weight, 0)


def find_model(
    f: BooleanFormula, n_vars: int, weight: int, fixed: Mapping[int, int] | None = None,
    p: int = (1 << 61) - 1,
) -> list[int] | None:
    """Some model of f with exactly ``weight`` ones extending ``fixed``, or None.

    Variables are fixed one at a time, keeping the model count nonzero.
    """
    assign = dict(fixed or {})
    if not weighted_model_count(f, n_vars, weight, fixed=assign, p=p):
        return None
    for v in range(n_vars):
        if v in assign:
            continue
        assign[v] = 1
        if not weighted_model_count(f, n_vars, weight, fixed=assign, p=p):
            assign[v] = 0
    return [assign[v] for v in range(n_vars)]
