import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paramcirc.exactfield import (
    DEFAULT_MODULUS,
    DivisionByZero,
    FieldContext,
    FieldElem,
    NonInvertibleDenominator,
    embed_rational,
    field_arith,
    is_prime,
)

P = DEFAULT_MODULUS
residues = st.integers(min_value=0, max_value=P - 1)


def test_default_modulus_is_mersenne_61():
    assert P == 2**61 - 1
    assert is_prime(P)


@pytest.mark.parametrize("n, expected", [(2, True), (9, False), (101, True), (561, False), (2**31 - 1, True), (2**61 + 1, False)])
def test_is_prime(n, expected):
    assert is_prime(n) is expected


@pytest.mark.parametrize("bad", [1, 2, 4, 100, 2**61])
def test_context_rejects_non_odd_primes(bad):
    with pytest.raises(ValueError):
        FieldContext(bad)


def test_examples(F, F101):
    one = FieldElem(1, F)
    assert field_arith("add", one, P - 1) == 0
    two = FieldElem(2, F)
    assert field_arith("mul", field_arith("inv", two), two) == 1
    assert field_arith("pow", FieldElem(3, F101), 100) == 1
    assert embed_rational(1, 2) * 2 == 1
    assert embed_rational(-1, 2) + embed_rational(1, 2) == 0
    assert embed_rational(3, 4, FieldContext(7)).value == 6


def test_division_by_zero(F):
    with pytest.raises(DivisionByZero):
        field_arith("inv", FieldElem(0, F))
    with pytest.raises(DivisionByZero):
        FieldElem(3, F) / 0


def test_non_invertible_denominator():
    with pytest.raises(NonInvertibleDenominator):
        embed_rational(1, 14, FieldContext(7))


def test_field_mismatch_is_an_error():
    with pytest.raises(ValueError):
        FieldElem(1, FieldContext(7)) + FieldElem(1, FieldContext(11))


@settings(max_examples=1000)
@given(residues, residues, residues)
def test_field_axioms(a, b, c):
    x, y, z = FieldElem(a), FieldElem(b), FieldElem(c)
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x + y == y + x and x * y == y * x
    assert x - x == 0
    if a:
        assert x / x == 1


nonzero = st.integers(min_value=-10**6, max_value=10**6).filter(bool)


@given(st.integers(-10**6, 10**6), nonzero, st.integers(-10**6, 10**6), nonzero)
def test_embed_rational_is_a_homomorphism(a, b, c, d):
    lhs_sum = embed_rational(a * d + c * b, b * d)
    assert lhs_sum == embed_rational(a, b) + embed_rational(c, d)
    assert embed_rational(a * c, b * d) == embed_rational(a, b) * embed_rational(c, d)


def test_negative_power_is_inverse(F101):
    x = FieldElem(5, F101)
    assert x ** -2 * x**2 == 1
