"""Exact rational helpers and the "num/den" string encoding used in every file format."""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Union

RationalLike = Union[int, str, Fraction]


def to_fraction(value) -> Fraction:
    """Parse ints, Fractions and strings such as ``"3/4"``, ``"-2"`` or ``"0.125"``.

    Floats are rejected: call :func:`from_float` explicitly if you really want one.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        raise TypeError(f"float {value!r} given where an exact rational is required")
    raise TypeError(f"cannot interpret {value!r} as a rational")


def from_float(value: float) -> Fraction:
    # exact binary expansion of the float, no rounding
    return Fraction(value)


def fmt(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


def _denominator(v) -> int:
    return v.denominator if isinstance(v, (int, Fraction)) else Fraction(v).denominator


def common_denominator(values: Iterable[Fraction]) -> int:
    out = 1
    for d in map(_denominator, values):
        if d != 1 and out % d:
            out = lcm(out, d)
    return out
