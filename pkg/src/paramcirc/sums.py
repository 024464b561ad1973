"""Bounded exponential sums, Boolean formulas and the sum-composition gadgets.

A :class:`BoundedSumSpec` sums a body circuit over all 0/1 assignments with
exactly ``k`` ones to its last ``q`` variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from functools import cached_property
from itertools import combinations
from math import comb, factorial
from typing import Iterator, Sequence

from .circuit import Circuit, CircuitBuilder, EnumerationCapExceeded, MalformedInput, dumps, loads
from .exactfield import DEFAULT_FIELD, FieldContext, FieldElem, is_prime

ENUM_CAP = 10**6


class CharacteristicTooSmall(ValueError):
    pass


class KPlusOneNotPrime(ValueError):
    pass


class ParameterOutOfRange(ValueError):
    pass


def ones(s: int, k: int) -> Iterator[tuple[int, ...]]:
    """All 0/1 vectors of length s with exactly k ones."""
    for pos in combinations(range(s), k):
        v = [0] * s
        for i in pos:
            v[i] = 1
        yield tuple(v)


# bounded sums ----------------------------------------------------------------


@dataclass(frozen=True)
class BoundedSumSpec:
    """Sum of ``body`` over ones(q, k) on its last q variables.

    ``gadget`` and ``payload`` are set by constructions whose body factors as
    arithmetize(gadget) times a circuit that reads the summation block only
    through the ``payload`` positions; :func:`factored_sum_eval` uses them.
    """

    body: Circuit
    q: int
    k: int
    gadget: "BooleanFormula | None" = field(default=None, compare=False)
    payload: tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not 0 <= self.k <= self.q <= self.body.n_vars:
            raise ValueError(f"need 0 <= k <= q <= n_vars, got k={self.k} q={self.q}")

    @property
    def n_free(self) -> int:
        """Number of non-summation variables (they come first)."""
        return self.body.n_vars - self.q

    def to_text(self) -> str:
        return dumps(self.body) + f"SUM q={self.q} k={self.k}\n"

    @classmethod
    def from_text(cls, text: str) -> "BoundedSumSpec":
        lines = text.rstrip("\n").splitlines()
        trailer = lines[-1].split() if lines else []
        if len(trailer) != 3 or trailer[0] != "SUM" or not trailer[1].startswith("q=") or not trailer[2].startswith("k="):
            raise MalformedInput("bounded sum needs a trailer 'SUM q=<q> k=<k>'")
        return cls(loads("\n".join(lines[:-1])), int(trailer[1][2:]), int(trailer[2][2:]))


def bounded_sum_eval(spec: BoundedSumSpec, x: Sequence[int], cap: int = ENUM_CAP) -> FieldElem:
    """Sum of body(x, e) over e in ones(q, k)."""
    if comb(spec.q, spec.k) > cap:
        raise EnumerationCapExceeded(f"C({spec.q},{spec.k}) exceeds cap {cap}")
    if len(x) != spec.n_free:
        raise ValueError(f"expected {spec.n_free} free values, got {len(x)}")
    c = spec.body
    total = 0
    x = [int(v) for v in x]
    for e in ones(spec.q, spec.k):
        total += c(x + list(e))
    return FieldElem(total % c.ctx.p, c.ctx)


def factored_sum_eval(spec: BoundedSumSpec, x: Sequence[int]) -> FieldElem:
    """bounded_sum_eval for bodies of the form arithmetize(gadget) * h.

    For every 0/1 assignment to the payload positions, the gadget models of
    weight k with that payload are counted, and the body is evaluated at one
    such model; the sum of count * value equals the bounded sum.
    """
    from .modelcount import find_model, weighted_model_count

    if spec.gadget is None:
        raise ValueError("spec carries no gadget structure")
    c, p = spec.body, spec.body.ctx.p
    x = [int(v) for v in x]
    total = 0
    for bits in product((0, 1), repeat=len(spec.payload)):
        fixed = dict(zip(spec.payload, bits))
        cnt = weighted_model_count(spec.gadget, spec.q, spec.k, fixed=fixed, p=p)
        if not cnt:
            continue
        g = find_model(spec.gadget, spec.q, spec.k, fixed, p=p)
        total += cnt * c(x + g)
    return FieldElem(total % p, c.ctx)


def bounded_sum_poly(spec: BoundedSumSpec, cap: int = ENUM_CAP):
    """The bounded sum as a polynomial in the free variables (oracle)."""
    from .polyoracle import SparsePoly, expand

    if comb(spec.q, spec.k) > cap:
        raise EnumerationCapExceeded(f"C({spec.q},{spec.k}) exceeds cap {cap}")
    nf, q = spec.n_free, spec.q
    total = SparsePoly(nf, {}, spec.body.ctx)
    for e in ones(q, spec.k):
        total = total + expand(spec.body, fixed={nf + i: e[i] for i in range(q)}, n_vars=nf)
    return total


# Boolean formulas ------------------------------------------------------------

VAR, BCONST, NOT, AND, OR = "var", "const", "not", "and", "or"


@dataclass(frozen=True)
class BooleanFormula:
    op: str
    args: tuple["BooleanFormula", ...] = ()
    var: int = -1
    value: bool = False

    def __repr__(self) -> str:
        return to_prefix(self)

    def __and__(self, other: "BooleanFormula") -> "BooleanFormula":
        return And(self, other)

    def __or__(self, other: "BooleanFormula") -> "BooleanFormula":
        return Or(self, other)

    def __invert__(self) -> "BooleanFormula":
        return Not(self)

    def evaluate(self, assignment: Sequence[int]) -> bool:
        op = self.op
        if op == VAR:
            return bool(assignment[self.var])
        if op == BCONST:
            return self.value
        if op == NOT:
            return not self.args[0].evaluate(assignment)
        if op == AND:
            return all(a.evaluate(assignment) for a in self.args)
        return any(a.evaluate(assignment) for a in self.args)

    @cached_property
    def variables(self) -> frozenset[int]:
        if self.op == VAR:
            return frozenset((self.var,))
        out: frozenset[int] = frozenset()
        for a in self.args:
            out |= a.variables
        return out

    def depth(self) -> int:
        return 0 if not self.args else 1 + max(a.depth() for a in self.args)

    def weft(self, fanin_bound: int = 2) -> int:
        if not self.args:
            return 0
        return max(a.weft(fanin_bound) for a in self.args) + (len(self.args) > fanin_bound)

    def size(self) -> int:
        return len(self.args) + sum(a.size() for a in self.args)

    def max_var(self) -> int:
        return max(self.variables, default=-1)


def Var(i: int) -> BooleanFormula:
    return BooleanFormula(VAR, var=i)


TRUE = BooleanFormula(BCONST, value=True)
FALSE = BooleanFormula(BCONST, value=False)


def Not(a: BooleanFormula) -> BooleanFormula:
    return BooleanFormula(NOT, (a,))


def And(*args: BooleanFormula) -> BooleanFormula:
    if len(args) == 1 and not isinstance(args[0], BooleanFormula):
        args = tuple(args[0])
    if not args:
        return TRUE
    return BooleanFormula(AND, tuple(args))


def Or(*args: BooleanFormula) -> BooleanFormula:
    if len(args) == 1 and not isinstance(args[0], BooleanFormula):
        args = tuple(args[0])
    if not args:
        return FALSE
    return BooleanFormula(OR, tuple(args))


def Iff(a: BooleanFormula, b: BooleanFormula) -> BooleanFormula:
    return Or(And(a, b), And(Not(a), Not(b)))


def Implies(a: BooleanFormula, b: BooleanFormula) -> BooleanFormula:
    return Or(Not(a), b)


def conjunction(parts: Sequence[BooleanFormula], fanin_bound: int = 2) -> BooleanFormula:
    """AND of ``parts`` as one unbounded gate if needed, else a bounded one."""
    parts = list(parts)
    if len(parts) == 1:
        return parts[0]
    return And(*parts)


def balanced_and(parts: Sequence[BooleanFormula], fanin_bound: int = 2) -> BooleanFormula:
    """AND of a few parts as a tree of bounded gates."""
    parts = list(parts)
    if not parts:
        return TRUE
    while len(parts) > 1:
        parts = [
            And(*parts[i : i + fanin_bound]) if len(parts[i : i + fanin_bound]) > 1 else parts[i]
            for i in range(0, len(parts), fanin_bound)
        ]
    return parts[0]


def to_prefix(f: BooleanFormula) -> str:
    if f.op == VAR:
        return f"v{f.var}"
    if f.op == BCONST:
        return "T" if f.value else "F"
    return f"({f.op.upper()} " + " ".join(to_prefix(a) for a in f.args) + ")"


def from_prefix(text: str) -> BooleanFormula:
    tokens = text.replace("(", " ( ").replace(")", " ) ").split()
    pos = 0

    def parse() -> BooleanFormula:
        nonlocal pos
        if pos >= len(tokens):
            raise MalformedInput("unexpected end of formula")
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            op = tokens[pos].lower()
            pos += 1
            args = []
            while tokens[pos] != ")":
                args.append(parse())
            pos += 1
            if op not in (NOT, AND, OR) or (op == NOT and len(args) != 1):
                raise MalformedInput(f"bad operator {op!r}")
            return BooleanFormula(op, tuple(args))
        if tok == "T":
            return TRUE
        if tok == "F":
            return FALSE
        if tok.startswith("v") and tok[1:].isdigit():
            return Var(int(tok[1:]))
        raise MalformedInput(f"bad token {tok!r}")

    try:
        f = parse()
    except IndexError:
        raise MalformedInput("unbalanced parentheses") from None
    if pos != len(tokens):
        raise MalformedInput("trailing tokens after formula")
    return f


def arithmetize(b: BooleanFormula, n_vars: int | None = None, fanin_bound: int = 2,
                ctx: FieldContext = DEFAULT_FIELD) -> Circuit:
    """AND -> product, NOT x -> 1 - x, OR via de Morgan."""
    if n_vars is None:
        n_vars = b.max_var() + 1
    cb = CircuitBuilder(n_vars, fanin_bound, ctx)
    return cb.build(arithmetize_into(cb, b))


def arithmetize_into(cb: CircuitBuilder, b: BooleanFormula, var_map: dict[int, int] | None = None) -> int:
    """Append the arithmetization of ``b`` to a builder; returns the root gate."""

    def go(f: BooleanFormula) -> int:
        if f.op == VAR:
            return var_map[f.var] if var_map is not None else cb.input(f.var)
        if f.op == BCONST:
            return cb.const(int(f.value))
        if f.op == NOT:
            return cb.one_minus(go(f.args[0]))
        if f.op == AND:
            return cb.mul([go(a) for a in f.args])
        return cb.one_minus(cb.mul([cb.one_minus(go(a)) for a in f.args]))

    return go(b)


# exact-weight indicator ---------------------------------------------------------


def exact_ones_indicator(p: int, q: int, k: int, ctx: FieldContext = DEFAULT_FIELD) -> Circuit:
    """alpha * prod_{i<k} (i - sum of first p) * prod_{i<k} (i - sum of last q).

    On vectors with 2k ones it is 1 when each block holds k ones and 0 otherwise;
    alpha = (k!)^-2.
    """
    if ctx.p <= k:
        raise CharacteristicTooSmall(f"characteristic {ctx.p} must exceed k={k}")
    b = CircuitBuilder(p + q, ctx=ctx)
    alpha = ctx.inv(factorial(k) ** 2 % ctx.p)

    def block(idx: range) -> int:
        factors = []
        for i in range(k):
            s = b.add([b.input(j) for j in idx]) if len(idx) else b.const(0)
            factors.append(b.add(b.const(i), b.neg(s)))
        if not factors:
            return b.const(1)
        return factors[0] if len(factors) == 1 else b.mul(factors)

    left, right = block(range(p)), block(range(p, p + q))
    return b.build(b.mul(b.const(alpha), b.mul(left, right)))


# pair equations and primes ----------------------------------------------------


def pair_equation_solutions(k: int) -> list[tuple[int, int, int]]:
    """All integer a, b, c >= 1 with a*b = c and a + b + c = k^2 + 2k.

    Every a in range is tried; for each a the two equations pin down b.
    """
    N = k * k + 2 * k
    out = []
    for a in range(1, N + 1):
        num = N - a  # b + ab = N - a
        if num % (a + 1) == 0:
            b = num // (a + 1)
            if b >= 1:
                c = a * b
                if c >= 1 and a + b + c == N:
                    out.append((a, b, c))
    return out


def next_prime_shifted(s: int) -> int:
    """Smallest l >= s with l + 1 prime."""
    l = max(s, 1)
    while not is_prime(l + 1):
        l += 1
    return l


# gadgets ---------------------------------------------------------------------


@dataclass(frozen=True)
class GadgetLayout:
    """Variables X_1..X_m, Y_1..Y_m, then Z_{i,j} row-major (all 0-based)."""

    m: int

    def x(self, i: int) -> int:
        return i

    def y(self, j: int) -> int:
        return self.m + j

    def z(self, i: int, j: int) -> int:
        return 2 * self.m + i * self.m + j

    @property
    def size(self) -> int:
        return self.m * self.m + 2 * self.m


def _bipartite_core(n: int, extra: Sequence[BooleanFormula] = ()) -> BooleanFormula:
    L = GadgetLayout(n)
    clauses = [
        Iff(Var(L.z(i, j)), And(Var(L.x(i)), Var(L.y(j)))) for i in range(n) for j in range(n)
    ]
    clauses += list(extra)
    big = conjunction(clauses)
    or_x = Or([Var(L.x(i)) for i in range(n)]) if n > 1 else Var(L.x(0))
    or_y = Or([Var(L.y(i)) for i in range(n)]) if n > 1 else Var(L.y(0))
    # one unbounded layer: the clause conjunction and the two ORs meet in bounded ANDs
    return balanced_and([big, or_x, or_y])


def gadget_bipartite(n: int, k: int) -> BooleanFormula:
    """Complete-bipartite selection formula on n^2 + 2n variables.

    Z_ij <-> X_i and Y_j, plus at least one X and one Y. With k+1 prime,
    weight k^2 + 2k forces k ones in each of X and Y.
    """
    if not n >= k >= 1:
        raise ParameterOutOfRange("need n >= k >= 1")
    if not is_prime(k + 1):
        raise KPlusOneNotPrime(f"k+1 = {k + 1} is not prime")
    return _bipartite_core(n)


def gadget_general(n1: int, n2: int, k: int, s: int) -> tuple[int, int, BooleanFormula]:
    """Gadget selecting k of X_1..X_{n1} and s of Y_1..Y_{n2} at weight l^2 + 2l.

    Returns (l, m, B) with l >= s and l + 1 prime, m = max(n1, n2) + l - k.
    """
    if not (k >= 1 and s >= k and s <= n2):
        raise ParameterOutOfRange("need 1 <= k <= s <= n2")
    n = max(n1, n2)
    if k > n:
        raise ParameterOutOfRange("need k <= max(n1, n2)")
    l = next_prime_shifted(s)
    m = n + l - k
    L = GadgetLayout(m)
    extra = []
    extra += [Var(L.x(i)) for i in range(n1, n1 + l - k)]
    extra += [Not(Var(L.x(i))) for i in range(n1 + l - k, m)]
    extra += [Var(L.y(i)) for i in range(n2, n2 + l - s)]
    extra += [Not(Var(L.y(i))) for i in range(n2 + l - s, m)]
    return l, m, _bipartite_core(m, extra)


def count_weight_models(f: BooleanFormula, n_vars: int, weight: int, cap: int = ENUM_CAP) -> int:
    """Number of satisfying assignments with exactly ``weight`` ones (enumeration)."""
    if comb(n_vars, weight) > cap:
        raise EnumerationCapExceeded(f"C({n_vars},{weight}) exceeds cap {cap}")
    return sum(1 for e in ones(n_vars, weight) if f.evaluate(e))


def compose_double_sum(f: Circuit, p: int, q: int, k: int, s: int) -> BoundedSumSpec:
    """One bounded sum equal to sum_{d in ones(p,k)} sum_{e in ones(q,s)} f(X, d, e).

    ``f`` has its free variables first, then the p d-variables, then the q
    e-variables. The result sums B(g) * f(X, g_X[:p], g_Y[:q]) over g in
    ones(m^2 + 2m, l^2 + 2l), with B the arithmetized general gadget.
    """
    nx_ = f.n_vars - p - q
    if nx_ < 0:
        raise ValueError("f has fewer variables than p + q")
    l, m, B = gadget_general(p, q, k, s)
    G = GadgetLayout(m)
    cb = CircuitBuilder(nx_ + G.size, f.fanin_bound, f.ctx)
    g_var = {v: nx_ + v for v in range(G.size)}
    root_b = arithmetize_into(cb, B, {v: cb.input(g_var[v]) for v in B.variables})
    vmap = {i: cb.input(i) for i in range(nx_)}
    vmap.update({nx_ + i: cb.input(nx_ + G.x(i)) for i in range(p)})
    vmap.update({nx_ + p + j: cb.input(nx_ + G.y(j)) for j in range(q)})
    root_f = cb.copy_of(f, vmap)
    body = cb.build(cb.mul(root_b, root_f))
    payload = tuple(G.x(i) for i in range(p)) + tuple(G.y(j) for j in range(q))
    return BoundedSumSpec(body, G.size, l * l + 2 * l, gadget=B, payload=payload)


def double_sum_eval(f: Circuit, p: int, q: int, k: int, s: int, x: Sequence[int]) -> int:
    """Oracle: the two nested bounded sums evaluated directly."""
    x = [int(v) for v in x]
    total = 0
    for d in ones(p, k):
        for e in ones(q, s):
            total += f(x + list(d) + list(e))
    return total % f.ctx.p
