"""Brute-force polynomial ground truth.

:class:`SparsePoly` maps dense exponent tuples to nonzero field residues. It is
deliberately naive and is only used to check circuit constructions at small
sizes.
"""

from __future__ import annotations

from itertools import combinations
from math import comb
from typing import Iterable, Iterator, Mapping, Sequence

from .circuit import ADD, CONST, DIV, INPUT, MUL, Circuit
from .exactfield import DEFAULT_FIELD, FieldContext, FieldElem

TERM_CAP = 10**6
SUBSET_CAP = 10**5


class TermCapExceeded(RuntimeError):
    pass


class SubsetBlowup(RuntimeError):
    pass


class DuplicateNodes(ValueError):
    pass


class SparsePoly:
    __slots__ = ("n_vars", "ctx", "terms")

    def __init__(
        self,
        n_vars: int,
        terms: Mapping[tuple[int, ...], int] | Iterable[tuple[tuple[int, ...], int]] = (),
        ctx: FieldContext = DEFAULT_FIELD,
    ):
        self.n_vars = n_vars
        self.ctx = ctx
        p = ctx.p
        acc: dict[tuple[int, ...], int] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for e, c in items:
            e = tuple(e)
            if len(e) != n_vars:
                raise ValueError(f"exponent {e} has wrong length for {n_vars} variables")
            acc[e] = (acc.get(e, 0) + int(c)) % p
        self.terms = {e: c for e, c in acc.items() if c}

    # constructors ---------------------------------------------------------

    @classmethod
    def const(cls, n_vars: int, c: int, ctx: FieldContext = DEFAULT_FIELD) -> "SparsePoly":
        return cls(n_vars, {(0,) * n_vars: c}, ctx)

    @classmethod
    def var(cls, n_vars: int, i: int, ctx: FieldContext = DEFAULT_FIELD) -> "SparsePoly":
        e = [0] * n_vars
        e[i] = 1
        return cls(n_vars, {tuple(e): 1}, ctx)

    @classmethod
    def monomial(
        cls, n_vars: int, support: Iterable[int], coeff: int = 1, ctx: FieldContext = DEFAULT_FIELD
    ) -> "SparsePoly":
        e = [0] * n_vars
        for i in support:
            e[i] += 1
        return cls(n_vars, {tuple(e): coeff}, ctx)

    def _new(self, terms: dict) -> "SparsePoly":
        out = SparsePoly.__new__(SparsePoly)
        out.n_vars, out.ctx = self.n_vars, self.ctx
        out.terms = {e: c for e, c in terms.items() if c}
        return out

    # arithmetic -----------------------------------------------------------

    def _check(self, other: "SparsePoly") -> None:
        if other.n_vars != self.n_vars or other.ctx != self.ctx:
            raise ValueError("polynomials live in different rings")

    def __add__(self, other):
        if isinstance(other, int):
            other = SparsePoly.const(self.n_vars, other, self.ctx)
        self._check(other)
        p = self.ctx.p
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = (out.get(e, 0) + c) % p
        return self._new(out)

    __radd__ = __add__

    def __neg__(self):
        p = self.ctx.p
        return self._new({e: -c % p for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, SparsePoly) else -int(other))

    def __rsub__(self, other):
        return -self + other

    def scale(self, s: int) -> "SparsePoly":
        p = self.ctx.p
        s %= p
        return self._new({e: c * s % p for e, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, FieldElem)):
            return self.scale(int(other))
        self._check(other)
        return mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "SparsePoly":
        out = SparsePoly.const(self.n_vars, 1, self.ctx)
        for _ in range(e):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = SparsePoly.const(self.n_vars, other, self.ctx)
        if not isinstance(other, SparsePoly):
            return NotImplemented
        return self.n_vars == other.n_vars and self.ctx == other.ctx and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[tuple[tuple[int, ...], int]]:
        return iter(sorted(self.terms.items()))

    def __repr__(self) -> str:
        if not self.terms:
            return "SparsePoly(0)"
        parts = []
        for e, c in sorted(self.terms.items(), reverse=True)[:12]:
            mono = "*".join(
                f"x{i}" + (f"^{d}" if d > 1 else "") for i, d in enumerate(e) if d
            )
            coef = self.ctx.to_signed(c)
            parts.append(f"{coef}*{mono}" if mono else str(coef))
        more = " + ..." if len(self.terms) > 12 else ""
        return f"SparsePoly({' + '.join(parts)}{more})"

    # queries --------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def evaluate(self, point: Sequence[int]) -> int:
        p = self.ctx.p
        total = 0
        for e, c in self.terms.items():
            t = c
            for x, d in zip(point, e):
                if d:
                    t = t * pow(int(x), d, p) % p
            total += t
        return total % p

    __call__ = evaluate

    def extend(self, n_vars: int) -> "SparsePoly":
        """Same polynomial viewed in a ring with more variables."""
        pad = (0,) * (n_vars - self.n_vars)
        return SparsePoly(n_vars, {e + pad: c for e, c in self.terms.items()}, self.ctx)

    # serialization --------------------------------------------------------

    def to_text(self) -> str:
        return "".join(f"{c} " + " ".join(map(str, e)) + "\n" for e, c in sorted(self.terms.items()))

    @classmethod
    def from_text(cls, text: str, n_vars: int | None = None, ctx: FieldContext = DEFAULT_FIELD):
        rows = [ln.split() for ln in text.splitlines() if ln.strip()]
        if n_vars is None:
            if not rows:
                raise ValueError("cannot infer n_vars from an empty term list")
            n_vars = len(rows[0]) - 1
        terms = []
        for r in rows:
            if len(r) != n_vars + 1:
                raise ValueError(f"bad term line {' '.join(r)!r}")
            terms.append((tuple(int(x) for x in r[1:]), int(r[0])))
        return cls(n_vars, terms, ctx)


def mul(f: SparsePoly, g: SparsePoly, cap: int = TERM_CAP) -> SparsePoly:
    p = f.ctx.p
    out: dict[tuple[int, ...], int] = {}
    for e1, c1 in f.terms.items():
        for e2, c2 in g.terms.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = (out.get(e, 0) + c1 * c2) % p
        if len(out) > cap:
            raise TermCapExceeded(f"product exceeds {cap} terms")
    return f._new(out)


def expand_all(c: Circuit, cap: int = TERM_CAP, fixed: Mapping[int, int] | None = None,
               n_vars: int | None = None) -> list[SparsePoly]:
    """Polynomial of every gate of a division-free circuit.

    Variables in ``fixed`` are replaced by constants; ``n_vars`` then limits
    the result to the first n_vars variables (all unfixed ones must be below it).
    """
    n, ctx = (c.n_vars if n_vars is None else n_vars), c.ctx
    fixed = fixed or {}
    polys: list[SparsePoly] = []
    for g in c.gates:
        if g.kind == INPUT and g.var in fixed:
            polys.append(SparsePoly.const(n, fixed[g.var], ctx))
        elif g.kind == INPUT:
            polys.append(SparsePoly.var(n, g.var, ctx))
        elif g.kind == CONST:
            polys.append(SparsePoly.const(n, g.const, ctx))
        elif g.kind == ADD:
            acc = polys[g.children[0]]
            for ch in g.children[1:]:
                acc = acc + polys[ch]
            polys.append(acc)
        elif g.kind == MUL:
            acc = polys[g.children[0]]
            for ch in g.children[1:]:
                acc = mul(acc, polys[ch], cap)
            polys.append(acc)
        elif g.kind == DIV:
            raise ValueError("expand needs a division-free circuit")
        if len(polys[-1]) > cap:
            raise TermCapExceeded(f"gate expansion exceeds {cap} terms")
    return polys


def expand(c: Circuit, cap: int = TERM_CAP, fixed: Mapping[int, int] | None = None,
           n_vars: int | None = None) -> SparsePoly:
    """Polynomial computed by a division-free circuit (see :func:`expand_all`)."""
    return expand_all(c, cap, fixed, n_vars)[c.output]


def compose(f: SparsePoly, subs: Sequence[SparsePoly]) -> SparsePoly:
    """f(subs[0], ..., subs[n-1])."""
    if len(subs) != f.n_vars:
        raise ValueError("need one substitute per variable")
    m = subs[0].n_vars if subs else 0
    total = SparsePoly(m, {}, f.ctx)
    for e, c in f.terms.items():
        t = SparsePoly.const(m, c, f.ctx)
        for s, d in zip(subs, e):
            for _ in range(d):
                t = t * s
        total = total + t
    return total


def hp(f: SparsePoly, k: int) -> SparsePoly:
    """Homogeneous part of degree k."""
    return f._new({e: c for e, c in f.terms.items() if sum(e) == k})


def support(e: Sequence[int]) -> frozenset[int]:
    return frozenset(i for i, d in enumerate(e) if d)


def spc(f: SparsePoly, k: int) -> SparsePoly:
    """Terms whose support has exactly k variables."""
    return f._new({e: c for e, c in f.terms.items() if sum(1 for d in e if d) == k})


def restrict(f: SparsePoly, A: Iterable[int]) -> SparsePoly:
    """Set every variable outside A to zero."""
    A = set(A)
    outside = [i for i in range(f.n_vars) if i not in A]
    return f._new({e: c for e, c in f.terms.items() if not any(e[i] for i in outside)})


def spc_of_restriction(f: SparsePoly, A: Iterable[int]) -> SparsePoly:
    """spc_{|A|}(f|_A) as the alternating sum of f|_B over B ⊆ A."""
    A = sorted(set(A))
    if 2 ** len(A) > SUBSET_CAP:
        raise SubsetBlowup(f"2^{len(A)} subsets exceed cap {SUBSET_CAP}")
    total = SparsePoly(f.n_vars, {}, f.ctx)
    for r in range(len(A) + 1):
        sign = -1 if (len(A) - r) % 2 else 1
        for B in combinations(A, r):
            total = total + restrict(f, B).scale(sign)
    return total


def spc_by_inclusion_exclusion(f: SparsePoly, k: int, cap: int = SUBSET_CAP) -> SparsePoly:
    """spc_k(f) from restrictions to sets of size at most k."""
    n = f.n_vars
    if k > n:
        raise ValueError(f"k={k} exceeds the number of variables {n}")
    subsets = sum(comb(n, l) for l in range(k + 1))
    if subsets > cap:
        raise SubsetBlowup(f"{subsets} subsets exceed cap {cap}")
    total = SparsePoly(n, {}, f.ctx)
    for l in range(k + 1):
        coeff = (-1) ** (k - l) * comb(n - l, k - l)
        layer = SparsePoly(n, {}, f.ctx)
        for A in combinations(range(n), l):
            layer = layer + restrict(f, A)
        total = total + layer.scale(coeff)
    return total


def interpolate_univariate(
    points: Sequence[tuple[int | FieldElem, int | FieldElem]], ctx: FieldContext = DEFAULT_FIELD
) -> list[int]:
    """Coefficients (low degree first) of the interpolating polynomial.

    The result has length ``len(points)``; trailing zeros are kept so that the
    caller can read off coefficients by position.
    """
    p = ctx.p
    xs = [int(x) % p for x, _ in points]
    ys = [int(y) % p for _, y in points]
    if len(set(xs)) != len(xs):
        raise DuplicateNodes("interpolation nodes must be distinct")
    n = len(xs)
    # Newton divided differences, then expand the Newton form.
    coef = list(ys)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) * pow(xs[i] - xs[i - j], -1, p) % p
    poly = [0] * n
    for i in range(n - 1, -1, -1):
        # poly = poly * (x - xs[i]) + coef[i]
        shifted = [0] + poly[:-1]
        poly = [(s - xs[i] * a) % p for s, a in zip(shifted, poly)]
        poly[0] = (poly[0] + coef[i]) % p
    return poly


def inverse_vandermonde(xs: Sequence[int], ctx: FieldContext = DEFAULT_FIELD) -> list[list[int]]:
    """Matrix M with coefficient_j = sum_i M[j][i] * y_i for nodes ``xs``.

    This is the inverse Vandermonde matrix; it lets circuit passes turn
    evaluations at fixed nodes into coefficients with constant gates.
    """
    p = ctx.p
    n = len(xs)
    if len(set(x % p for x in xs)) != n:
        raise DuplicateNodes("interpolation nodes must be distinct")
    cols = []
    for i in range(n):
        unit = [0] * n
        unit[i] = 1
        cols.append(interpolate_univariate(list(zip(xs, unit)), ctx))
    return [[cols[i][j] for i in range(n)] for j in range(n)]
