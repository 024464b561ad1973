"""Exact arithmetic over an odd prime field.

Residues are plain Python ints in ``[0, p)``. :class:`FieldContext` carries the
modulus and does the arithmetic; :class:`FieldElem` is a small immutable
wrapper with operator overloads for code that prefers ``a * b`` over
``F.mul(a, b)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

DEFAULT_MODULUS = (1 << 61) - 1


class DivisionByZero(ZeroDivisionError):
    pass


class NonInvertibleDenominator(ZeroDivisionError):
    pass


# Deterministic Miller-Rabin witnesses valid for all n < 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    """Deterministic primality test for n below 3.3e24, trial division above."""
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    if n >= 3_317_044_064_679_887_385_961_981:
        d = 43
        while d * d <= n:
            if n % d == 0:
                return False
            d += 2
        return True
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class FieldContext:
    """The prime field F_p. Read-only after construction."""

    __slots__ = ("p",)

    def __init__(self, modulus: int = DEFAULT_MODULUS):
        modulus = int(modulus)
        if modulus <= 2 or not is_prime(modulus):
            raise ValueError(f"modulus {modulus} is not an odd prime")
        object.__setattr__(self, "p", modulus)

    def __setattr__(self, name, value):
        raise AttributeError("FieldContext is immutable")

    def __repr__(self) -> str:
        return f"FieldContext({self.p})"

    def __eq__(self, other) -> bool:
        return isinstance(other, FieldContext) and other.p == self.p

    def __hash__(self) -> int:
        return hash(("FieldContext", self.p))

    # residue-level arithmetic -------------------------------------------

    def reduce(self, a: int) -> int:
        return a % self.p

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        return a * b % self.p

    def neg(self, a: int) -> int:
        return -a % self.p

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise DivisionByZero("inverse of 0")
        return pow(a, -1, self.p)

    def div(self, a: int, b: int) -> int:
        return a * self.inv(b) % self.p

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return pow(self.inv(a), -e, self.p)
        return pow(a % self.p, e, self.p)

    def embed_rational(self, num: int, den: int = 1) -> int:
        """Residue of num/den. Raises NonInvertibleDenominator when p | den."""
        if den % self.p == 0:
            raise NonInvertibleDenominator(f"{den} is divisible by {self.p}")
        return num * pow(den, -1, self.p) % self.p

    def from_fraction(self, q: Fraction | int) -> int:
        q = Fraction(q)
        return self.embed_rational(q.numerator, q.denominator)

    def to_signed(self, a: int) -> int:
        """Representative in (-p/2, p/2], handy for printing small values."""
        a %= self.p
        return a - self.p if a > self.p // 2 else a

    def check_points(self, count: int) -> None:
        """Interpolation needs ``count`` distinct nodes in the field."""
        if count > self.p:
            raise ValueError(f"need {count} distinct points but p = {self.p}")

    def elem(self, value: int) -> "FieldElem":
        return FieldElem(value % self.p, self)

    def sum(self, values) -> int:
        return sum(values) % self.p

    def prod(self, values) -> int:
        p = self.p
        out = 1
        for v in values:
            out = out * v % p
        return out


DEFAULT_FIELD = FieldContext()


@dataclass(frozen=True, slots=True)
class FieldElem:
    value: int
    ctx: FieldContext = DEFAULT_FIELD

    def __post_init__(self):
        if not 0 <= self.value < self.ctx.p:
            object.__setattr__(self, "value", self.value % self.ctx.p)

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElem):
            if other.ctx != self.ctx:
                raise ValueError("field mismatch")
            return other.value
        if isinstance(other, int):
            return other % self.ctx.p
        return NotImplemented

    def __add__(self, other):
        b = self._coerce(other)
        return b if b is NotImplemented else FieldElem(self.ctx.add(self.value, b), self.ctx)

    __radd__ = __add__

    def __sub__(self, other):
        b = self._coerce(other)
        return b if b is NotImplemented else FieldElem(self.ctx.sub(self.value, b), self.ctx)

    def __rsub__(self, other):
        b = self._coerce(other)
        return b if b is NotImplemented else FieldElem(self.ctx.sub(b, self.value), self.ctx)

    def __mul__(self, other):
        b = self._coerce(other)
        return b if b is NotImplemented else FieldElem(self.ctx.mul(self.value, b), self.ctx)

    __rmul__ = __mul__

    def __truediv__(self, other):
        b = self._coerce(other)
        return b if b is NotImplemented else FieldElem(self.ctx.div(self.value, b), self.ctx)

    def __rtruediv__(self, other):
        b = self._coerce(other)
        return b if b is NotImplemented else FieldElem(self.ctx.div(b, self.value), self.ctx)

    def __neg__(self):
        return FieldElem(self.ctx.neg(self.value), self.ctx)

    def __pow__(self, e: int):
        return FieldElem(self.ctx.pow(self.value, e), self.ctx)

    def inv(self) -> "FieldElem":
        return FieldElem(self.ctx.inv(self.value), self.ctx)

    def __eq__(self, other) -> bool:
        if isinstance(other, FieldElem):
            return self.ctx == other.ctx and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.ctx.p
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.value, self.ctx.p))

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"FieldElem({self.value})"


_OPS = {
    "add": FieldContext.add,
    "sub": FieldContext.sub,
    "mul": FieldContext.mul,
    "div": FieldContext.div,
    "pow": FieldContext.pow,
}


def field_arith(op: str, a: FieldElem, b: FieldElem | int | None = None) -> FieldElem:
    """Apply ``op`` in {add, sub, mul, div, pow, neg, inv} to field elements."""
    ctx = a.ctx
    if op == "neg":
        return FieldElem(ctx.neg(a.value), ctx)
    if op == "inv":
        return FieldElem(ctx.inv(a.value), ctx)
    if op not in _OPS:
        raise ValueError(f"unknown op {op!r}")
    if b is None:
        raise TypeError(f"{op} needs two operands")
    if op == "pow":
        bv = int(b)
    else:
        bv = b.value if isinstance(b, FieldElem) else int(b) % ctx.p
    return FieldElem(_OPS[op](ctx, a.value, bv), ctx)


def embed_rational(num: int, den: int, ctx: FieldContext = DEFAULT_FIELD) -> FieldElem:
    return FieldElem(ctx.embed_rational(num, den), ctx)
