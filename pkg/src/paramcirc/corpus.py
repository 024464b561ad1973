"""Seeded random instances shared by tests, the CLI and the acceptance suite."""

from __future__ import annotations

import numpy as np

from .circuit import Circuit, CircuitBuilder
from .exactfield import DEFAULT_FIELD, FieldContext


def random_point(rng: np.random.Generator, n: int, ctx: FieldContext = DEFAULT_FIELD) -> list[int]:
    return [int(v) for v in rng.integers(0, ctx.p, size=n, dtype=np.int64)] if n else []


def random_circuit(
    rng: np.random.Generator,
    n_vars: int = 4,
    max_size: int = 40,
    max_depth: int = 6,
    max_weft: int = 1,
    fanin_bound: int = 2,
    max_fanin: int = 4,
    p_const: float = 0.15,
    p_reuse: float = 0.25,
    ctx: FieldContext = DEFAULT_FIELD,
) -> Circuit:
    """Random division-free circuit within the given size, depth and weft limits.

    Built top-down; with probability ``p_reuse`` a child is an existing gate of
    compatible depth and weft, so results are circuits rather than formulas.
    """
    b = CircuitBuilder(n_vars, fanin_bound, ctx)
    depth: list[int] = []
    weft: list[int] = []
    budget = [int(rng.integers(max(3, max_size // 3), max_size + 1))]

    def record(g: int, d: int, w: int) -> int:
        depth.append(d)
        weft.append(w)
        return g

    def leaf() -> int:
        if rng.random() < p_const:
            return record(b.const(int(rng.integers(-3, 4))), 0, 0)
        return record(b.input(int(rng.integers(n_vars))), 0, 0)

    def gen(depth_left: int, weft_left: int) -> int:
        if depth_left == 0 or budget[0] < 2 or rng.random() < 0.15:
            return leaf()
        if depth and rng.random() < p_reuse:
            ok = [i for i in range(len(depth)) if depth[i] <= depth_left and weft[i] <= weft_left]
            if ok:
                return int(rng.choice(ok))
        if weft_left and rng.random() < 0.35:
            fanin = int(rng.integers(fanin_bound + 1, max_fanin + 1))
        else:
            fanin = int(rng.integers(1, fanin_bound + 1)) if rng.random() < 0.1 else fanin_bound
        fanin = min(fanin, budget[0])
        unbounded = fanin > fanin_bound
        budget[0] -= fanin
        children = [gen(depth_left - 1, weft_left - unbounded) for _ in range(fanin)]
        g = b.add(children) if rng.random() < 0.5 else b.mul(children)
        return record(
            g,
            1 + max(depth[c] for c in children),
            max(weft[c] for c in children) + unbounded,
        )

    out = gen(max_depth, max_weft)
    return b.build(out)


def random_sparse_poly(rng: np.random.Generator, n: int, degree: int, terms: int = 4,
                       ctx: FieldContext = DEFAULT_FIELD):
    """Random polynomial of total degree <= ``degree`` with small coefficients."""
    from .polyoracle import SparsePoly

    out = {}
    for _ in range(terms):
        d = int(rng.integers(0, degree + 1))
        e = [0] * n
        for v in rng.integers(0, n, size=d):
            e[int(v)] += 1
        out[tuple(e)] = int(rng.integers(-9, 10))
    return SparsePoly(n, out, ctx)


def poly_into(b: CircuitBuilder, f) -> int:
    """Append a sum-of-monomials circuit for a SparsePoly."""
    terms = []
    for e, cf in sorted(f.terms.items()):
        factors = [b.const(cf)] + [b.input(v) for v, k in enumerate(e) for _ in range(k)]
        terms.append(b.mul(factors) if len(factors) > 1 else factors[0])
    if not terms:
        return b.const(0)
    return b.add(terms) if len(terms) > 1 else terms[0]


def division_suite(rng: np.random.Generator, count: int = 20, n_vars: int = 3,
                   ctx: FieldContext = DEFAULT_FIELD):
    """Division-bearing circuits whose value is a known polynomial of degree <= 6.

    Returns (circuit, polynomial) pairs cycling through five shapes:
    PQ/Q, PQ/Q + RS/S, ((PQR)/R)/Q, (P^2 - Q^2)/(P - Q) and P/c.
    """
    out = []

    def nonzero(deg: int, terms: int = 3):
        while True:
            f = random_sparse_poly(rng, n_vars, deg, terms, ctx)
            if f.degree() >= 1:
                return f

    for i in range(count):
        b = CircuitBuilder(n_vars, ctx=ctx)
        shape = i % 5
        P, Q, R, S = nonzero(3), nonzero(2), nonzero(2), nonzero(2)
        if shape == 0:
            top = b.div(b.mul(poly_into(b, P), poly_into(b, Q)), poly_into(b, Q))
            want = P
        elif shape == 1:
            left = b.div(b.mul(poly_into(b, P), poly_into(b, Q)), poly_into(b, Q))
            right = b.div(b.mul(poly_into(b, R), poly_into(b, S)), poly_into(b, S))
            top = b.add(left, right)
            want = P + R
        elif shape == 2:
            num = b.mul(poly_into(b, P), poly_into(b, Q), poly_into(b, R))
            top = b.div(b.div(num, poly_into(b, R)), poly_into(b, Q))
            want = P
        elif shape == 3:
            while (P - Q).is_zero():
                Q = nonzero(2)
            num = b.sub(b.mul(poly_into(b, P), poly_into(b, P)), b.mul(poly_into(b, Q), poly_into(b, Q)))
            top = b.div(num, b.sub(poly_into(b, P), poly_into(b, Q)))
            want = P + Q
        else:
            c = int(rng.integers(2, 50))
            top = b.div(poly_into(b, P * P), b.const(c))
            want = (P * P).scale(ctx.inv(c))
        out.append((b.build(top), want))
    return out

