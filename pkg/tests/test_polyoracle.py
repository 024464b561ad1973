from itertools import combinations, product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paramcirc.circuit import CircuitBuilder, substitute
from paramcirc.corpus import random_circuit, random_point
from paramcirc.polyoracle import (
    DuplicateNodes,
    SparsePoly,
    SubsetBlowup,
    TermCapExceeded,
    compose,
    expand,
    hp,
    interpolate_univariate,
    restrict,
    spc,
    spc_by_inclusion_exclusion,
    spc_of_restriction,
)


def X(n, i):
    return SparsePoly.var(n, i)


def random_poly(rng, n, terms=6, max_exp=2):
    return SparsePoly(
        n,
        [
            (tuple(int(e) for e in rng.integers(0, max_exp + 1, size=n)), int(rng.integers(-5, 6)))
            for _ in range(terms)
        ],
    )


poly_seeds = st.integers(0, 2**32)


def test_expand_examples():
    b = CircuitBuilder(2)
    c = b.build(b.mul(b.add(b.const(1), b.input(0)), b.add(b.const(1), b.input(1))))
    f = expand(c)
    assert len(f) == 4
    assert f == (1 + X(2, 0)) * (1 + X(2, 1))
    b = CircuitBuilder(2)
    assert expand(b.build(b.const(0))).is_zero()


def test_expand_term_cap():
    b = CircuitBuilder(6)
    factors = [b.add(b.const(1), b.input(i)) for i in range(6)]
    c = b.build(b.mul(factors))
    assert len(expand(c)) == 64
    with pytest.raises(TermCapExceeded):
        expand(c, cap=20)


def test_hp_examples():
    f = (1 + X(2, 0)) * (1 + X(2, 1))
    assert hp(f, 1) == X(2, 0) + X(2, 1)
    assert hp(f, f.degree() + 1).is_zero()


def test_spc_examples():
    f = X(2, 0) ** 2 + X(2, 0) * X(2, 1)
    assert spc(f, 1) == X(2, 0) ** 2
    assert spc(f, 2) == X(2, 0) * X(2, 1)


def test_restrict_examples():
    f = X(3, 0) * X(3, 1) + X(3, 2)
    assert restrict(f, {0, 1}) == X(3, 0) * X(3, 1)
    assert restrict(f, range(3)) == f


def test_inclusion_exclusion_examples():
    assert spc_by_inclusion_exclusion(X(2, 0) * X(2, 1), 2) == X(2, 0) * X(2, 1)
    assert spc_by_inclusion_exclusion(SparsePoly.const(3, 7), 1).is_zero()
    with pytest.raises(SubsetBlowup):
        spc_by_inclusion_exclusion(SparsePoly.const(20, 1), 10, cap=1000)


def test_support_bounded_by_degree(rng):
    f = random_poly(rng, 4, terms=20, max_exp=3)
    for e in f.terms:
        assert sum(1 for d in e if d) <= sum(e)
        assert (sum(1 for d in e if d) == sum(e)) == all(d <= 1 for d in e)


@settings(max_examples=40, deadline=None)
@given(poly_seeds)
def test_spc_partitions(seed):
    rng = np.random.default_rng(seed)
    f = random_poly(rng, 5, terms=10)
    total = SparsePoly(5)
    for k in range(6):
        total = total + spc(f, k)
    assert total == f


@settings(max_examples=40, deadline=None)
@given(poly_seeds, st.integers(0, 3))
def test_inclusion_exclusion_matches_spc(seed, k):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(max(k, 1), 7))
    f = random_poly(rng, n, terms=12)
    assert spc_by_inclusion_exclusion(f, k) == spc(f, k)


@settings(max_examples=30, deadline=None)
@given(poly_seeds)
def test_subset_form_for_small_sets(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 7))
    f = random_poly(rng, n, terms=12)
    for r in range(min(3, n) + 1):
        for A in combinations(range(n), r):
            assert spc_of_restriction(f, A) == spc(restrict(f, A), len(A))


@settings(max_examples=40, deadline=None)
@given(poly_seeds)
def test_restriction_is_a_ring_homomorphism(seed):
    rng = np.random.default_rng(seed)
    f, g = random_poly(rng, 4), random_poly(rng, 4)
    A = [i for i in range(4) if rng.random() < 0.5]
    assert restrict(f + g, A) == restrict(f, A) + restrict(g, A)
    assert restrict(f * g, A) == restrict(f, A) * restrict(g, A)


@settings(max_examples=40, deadline=None)
@given(poly_seeds)
def test_hp_and_spc_are_linear(seed):
    rng = np.random.default_rng(seed)
    f, g = random_poly(rng, 3), random_poly(rng, 3)
    a, b = (int(v) for v in rng.integers(-9, 10, size=2))
    for k in range(5):
        assert hp(f * a + g * b, k) == hp(f, k) * a + hp(g, k) * b
        assert spc(f * a + g * b, k) == spc(f, k) * a + spc(g, k) * b


@settings(max_examples=25, deadline=None)
@given(poly_seeds)
def test_expand_commutes_with_composition(seed):
    rng = np.random.default_rng(seed)
    outer = random_circuit(rng, n_vars=2, max_size=8, max_depth=3)
    inner = {v: random_circuit(rng, n_vars=2, max_size=6, max_depth=3) for v in range(2)}
    composed = substitute(outer, inner)
    assert expand(composed) == compose(expand(outer), [expand(inner[0]), expand(inner[1])])


def test_expand_agrees_with_evaluation(rng):
    for _ in range(20):
        c = random_circuit(rng, n_vars=3, max_size=20)
        f = expand(c)
        x = random_point(rng, 3)
        assert f(x) == c(x)


def test_interpolation_examples(F):
    assert interpolate_univariate([(0, 0), (1, 1), (2, 4)]) == [0, 0, 1]
    assert interpolate_univariate([(5, 9)]) == [9]
    with pytest.raises(DuplicateNodes):
        interpolate_univariate([(1, 2), (1, 3)])


@settings(max_examples=40)
@given(st.lists(st.integers(0, 2**61 - 2), min_size=7, max_size=7), st.integers(0, 2**20))
def test_interpolation_round_trip(coeffs, shift):
    p = 2**61 - 1
    xs = [shift + 3 * i for i in range(7)]
    pts = [(x, sum(c * pow(x, j, p) for j, c in enumerate(coeffs)) % p) for x in xs]
    assert interpolate_univariate(pts) == coeffs


def test_term_list_round_trip(rng):
    f = random_poly(rng, 4, terms=15)
    text = f.to_text()
    assert SparsePoly.from_text(text, 4) == f
    lines = text.splitlines()
    exps = [tuple(map(int, ln.split()[1:])) for ln in lines]
    assert exps == sorted(exps)


def test_evaluate_on_cube_matches_brute_force():
    f = X(3, 0) * X(3, 1) + X(3, 2) * 2
    vals = {x: f(x) for x in product((0, 1), repeat=3)}
    assert vals[(1, 1, 0)] == 1 and vals[(1, 1, 1)] == 3 and vals[(0, 0, 0)] == 0
