"""Exact arithmetic on sums of rational multiples of square roots.

Beamsplitter cascades with angles ``pi/4`` and ``arccos(1/sqrt(m))`` only ever
produce coefficients of the form ``q * sqrt(n)``.  :class:`Surd` keeps these
exact so that coefficient identities can be checked with ``==`` instead of a
tolerance.  Mixing a surd with a float degrades to a plain float.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Union

Number = Union["Surd", float, int, Fraction]


@lru_cache(maxsize=4096)
def _squarefree_split(n: int) -> tuple[int, int]:
    """Return ``(a, b)`` with ``n == a*a*b`` and ``b`` squarefree."""
    a, b = 1, 1
    d = 2
    while d * d <= n:
        while n % (d * d) == 0:
            a *= d
            n //= d * d
        if n % d == 0:
            b *= d
            n //= d
        d += 1
    return a, b * n


class Surd:
    """An exact number ``sum_n q_n * sqrt(n)`` with squarefree ``n``."""

    __slots__ = ("_parts",)

    def __init__(self, parts: dict[int, Fraction] | None = None):
        self._parts = {n: Fraction(q) for n, q in (parts or {}).items() if q != 0}

    @classmethod
    def rational(cls, q: int | Fraction) -> Surd:
        return cls({1: Fraction(q)})

    @classmethod
    def sqrt(cls, q: int | Fraction) -> Surd:
        """Exact square root of a non-negative rational."""
        q = Fraction(q)
        if q < 0:
            raise ValueError("square root of a negative rational")
        # sqrt(a/b) = sqrt(a*b)/b
        a, b = _squarefree_split(q.numerator * q.denominator)
        return cls({b: Fraction(a, q.denominator)})

    @property
    def parts(self) -> dict[int, Fraction]:
        return dict(self._parts)

    def is_zero(self) -> bool:
        return not self._parts

    def __float__(self) -> float:
        return math.fsum(float(q) * math.sqrt(n) for n, q in self._parts.items())

    def __add__(self, other: Number) -> Number:
        if isinstance(other, (int, Rational)):
            other = Surd.rational(other)
        if isinstance(other, Surd):
            out = dict(self._parts)
            for n, q in other._parts.items():
                out[n] = out.get(n, Fraction(0)) + q
            return Surd(out)
        return float(self) + other

    __radd__ = __add__

    def __neg__(self) -> Surd:
        return Surd({n: -q for n, q in self._parts.items()})

    def __sub__(self, other: Number) -> Number:
        return self + (-other)

    def __rsub__(self, other: Number) -> Number:
        return (-self) + other

    def __mul__(self, other: Number) -> Number:
        if isinstance(other, (int, Rational)):
            return Surd({n: q * other for n, q in self._parts.items()})
        if isinstance(other, Surd):
            out: dict[int, Fraction] = {}
            for n1, q1 in self._parts.items():
                for n2, q2 in other._parts.items():
                    a, b = _squarefree_split(n1 * n2)
                    out[b] = out.get(b, Fraction(0)) + q1 * q2 * a
            return Surd(out)
        return float(self) * other

    __rmul__ = __mul__

    def __truediv__(self, other: int | Fraction) -> Surd:
        if not isinstance(other, (int, Rational)):
            return float(self) / other
        return self * (1 / Fraction(other))

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Rational)):
            other = Surd.rational(other)
        if isinstance(other, Surd):
            return self._parts == other._parts
        if isinstance(other, float):
            return float(self) == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self._parts.items()))

    def __repr__(self) -> str:
        if not self._parts:
            return "Surd(0)"
        terms = []
        for n, q in sorted(self._parts.items()):
            terms.append(str(q) if n == 1 else f"{q}*sqrt({n})")
        return "Surd(" + " + ".join(terms) + ")"


def to_float(value: Number) -> float:
    return float(value)


def is_zero(value: Number) -> bool:
    if isinstance(value, Surd):
        return value.is_zero()
    return value == 0
