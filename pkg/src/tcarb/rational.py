"""Exact rational parsing, formatting and small vector helpers."""

from __future__ import annotations

import re
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

_INT = re.compile(r"[+-]?\d+\Z")
_RATIO = re.compile(r"[+-]?\d+\s*/\s*\d+\Z")
_DECIMAL = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?\Z")


class RationalError(ValueError):
    pass


def to_rational(value) -> Fraction:
    """Convert an integer, ``"p/q"`` string or finite decimal string exactly.

    Floats are refused: the binary value of ``0.1`` is not one tenth.
    """
    if isinstance(value, bool):
        raise RationalError(f"boolean is not a number: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        raise RationalError(f"binary float {value!r} is not exact; pass a string")
    if isinstance(value, str):
        s = value.strip()
        if _INT.match(s):
            return Fraction(int(s))
        if _RATIO.match(s):
            p, q = s.split("/")
            if int(q) == 0:
                raise RationalError(f"zero denominator in {value!r}")
            return Fraction(int(p), int(q))
        if _DECIMAL.match(s):
            return Fraction(s)
        raise RationalError(f"not an exact rational: {value!r}")
    raise RationalError(f"unsupported numeric type {type(value).__name__}")


def fmt(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def fmt_vec(v: Iterable) -> list[str]:
    return [fmt(x) for x in v]


def dot(a: Sequence, b: Sequence) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def is_zero(v: Iterable) -> bool:
    return all(x == 0 for x in v)


def canonical_ray(v: Sequence) -> tuple[Fraction, ...]:
    """Scale to a primitive integer vector whose first nonzero entry is positive.

    Only for directions where the sign does not matter; see `primitive` otherwise.
    """
    p = primitive(v)
    for x in p:
        if x != 0:
            if x < 0:
                p = tuple(-y for y in p)
            break
    return p


def primitive(v: Sequence) -> tuple[Fraction, ...]:
    """Positive rescaling of `v` to coprime integers (direction preserved)."""
    v = [Fraction(x) for x in v]
    if all(x == 0 for x in v):
        return tuple(v)
    den = 1
    for x in v:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for k in ints:
        g = gcd(g, abs(k))
    return tuple(Fraction(k // g) for k in ints)
