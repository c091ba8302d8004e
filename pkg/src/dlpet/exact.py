"""Exact scalars and checked integer 3-vectors.

Planar work uses ``fractions.Fraction`` (arbitrary precision).  The polyhedral
work uses :class:`IVec3`, whose operations refuse to leave the signed 64-bit
range and refuse cross products on entries of size 2**30 or more.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

Rational = Fraction
RationalLike = Union[int, str, Fraction]

INT64_MAX = 2**63 - 1
INT64_MIN = -(2**63)
CROSS_BOUND = 2**30


class NonDivisibleError(ArithmeticError):
    """Raised by exact division when a coordinate is not a multiple of d."""


def as_rational(value: RationalLike) -> Fraction:
    """Coerce ints, Fractions and "p/q" strings.  Floats are rejected."""
    if isinstance(value, bool):
        raise TypeError("bool is not a rational")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot convert {type(value).__name__} exactly")


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def parse_rational(text: str) -> Fraction:
    return as_rational(text)


def floor(q: RationalLike) -> int:
    return math.floor(as_rational(q))


def ceil(q: RationalLike) -> int:
    return math.ceil(as_rational(q))


def frac(q: RationalLike) -> Fraction:
    q = as_rational(q)
    return q - math.floor(q)


def lcm_of_denominators(values: Iterable[Fraction]) -> int:
    out = 1
    for v in values:
        out = math.lcm(out, Fraction(v).denominator)
    return out


def check_int64(n: int) -> int:
    if not INT64_MIN <= n <= INT64_MAX:
        raise OverflowError(f"{n} does not fit in a signed 64-bit integer")
    return n


@dataclass(frozen=True, slots=True)
class IVec3:
    x: int
    y: int
    z: int

    def __post_init__(self) -> None:
        for c in (self.x, self.y, self.z):
            if not isinstance(c, int) or isinstance(c, bool):
                raise TypeError("IVec3 entries must be ints")
            check_int64(c)

    @classmethod
    def of(cls, seq: Iterable[int]) -> "IVec3":
        x, y, z = seq
        return cls(int(x), int(y), int(z))

    def __iter__(self):
        yield self.x
        yield self.y
        yield self.z

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.x, self.y, self.z)

    def __add__(self, other: "IVec3") -> "IVec3":
        return IVec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "IVec3") -> "IVec3":
        return IVec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def __neg__(self) -> "IVec3":
        return IVec3(-self.x, -self.y, -self.z)

    def scale(self, k: int) -> "IVec3":
        return IVec3(k * self.x, k * self.y, k * self.z)

    def dot(self, other: "IVec3") -> int:
        return check_int64(self.x * other.x + self.y * other.y + self.z * other.z)

    def cross(self, other: "IVec3") -> "IVec3":
        for c in (*self, *other):
            if abs(c) >= CROSS_BOUND:
                raise OverflowError(f"cross product input {c} exceeds 2**30")
        return IVec3(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )

    def divide_exact(self, d: int) -> "IVec3":
        if d == 0:
            raise ZeroDivisionError("divide_exact by zero")
        if any(c % d for c in self):
            raise NonDivisibleError(f"{self.as_tuple()} is not divisible by {d}")
        return IVec3(self.x // d, self.y // d, self.z // d)

    def is_zero(self) -> bool:
        return self.x == 0 and self.y == 0 and self.z == 0


def add(v: IVec3, w: IVec3) -> IVec3:
    return v + w


def sub(v: IVec3, w: IVec3) -> IVec3:
    return v - w


def dot(v: IVec3, w: IVec3) -> int:
    return v.dot(w)


def cross(v: IVec3, w: IVec3) -> IVec3:
    return v.cross(w)


def divide_exact(v: IVec3, d: int) -> IVec3:
    return v.divide_exact(d)


def primitive(v: IVec3) -> IVec3:
    """Divide out the gcd of the entries (zero vector stays zero)."""
    g = math.gcd(v.x, v.y, v.z)
    return v if g in (0, 1) else v.divide_exact(g)
