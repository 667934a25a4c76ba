"""Exact asymptotic arithmetic for sequences indexed by a block counter ``j``.

A :class:`Series` is a finite sum ``sum c_i * j**p_i`` with rational
coefficients and rational exponents, optionally followed by a remainder
``O(j**rho)``.  Sums, products, reciprocals and index shifts ``j -> j + n`` are
closed in this class, and every operation tracks its remainder, so the sign and
the limit of a series are decided exactly whenever the leading term dominates
the remainder.  When it does not, the answer is ``None`` (undecided) rather than
a guess.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Optional, Union

Number = Union[int, float, Fraction, str]

# Terms more than DEPTH powers below the leading exponent are folded into the
# remainder.
DEPTH = Fraction(4)

INF = math.inf


def as_fraction(value: Number) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r} in an exact series")
        return Fraction(repr(value))
    return Fraction(value)


def _binom(p: Fraction, m: int) -> Fraction:
    out = Fraction(1)
    for i in range(m):
        out *= (p - i) / (i + 1)
    return out


class Series:
    __slots__ = ("terms", "rem")

    def __init__(self, terms: Iterable = (), rem: Optional[Number] = None):
        acc: dict[Fraction, Fraction] = {}
        for exp, coef in terms:
            e, c = as_fraction(exp), as_fraction(coef)
            acc[e] = acc.get(e, Fraction(0)) + c
        r = None if rem is None else as_fraction(rem)
        items = sorted(((e, c) for e, c in acc.items() if c != 0), reverse=True)
        if items:
            floor = items[0][0] - DEPTH
            if any(e < floor for e, _ in items):
                r = floor if r is None else max(r, floor)
        if r is not None:
            items = [(e, c) for e, c in items if e > r]
        self.terms: tuple = tuple(items)
        self.rem: Optional[Fraction] = r

    # -- constructors ----------------------------------------------------
    @classmethod
    def const(cls, c: Number) -> "Series":
        return cls([(0, c)])

    @classmethod
    def power(cls, coef: Number, exponent: Number) -> "Series":
        return cls([(exponent, coef)])

    @classmethod
    def index(cls) -> "Series":
        return cls([(1, 1)])

    @classmethod
    def lift(cls, value: Union["Series", Number]) -> "Series":
        return value if isinstance(value, Series) else cls.const(value)

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other):
        other = Series.lift(other)
        rem = _max_rem(self.rem, other.rem)
        return Series(self.terms + other.terms, rem)

    __radd__ = __add__

    def __neg__(self):
        return Series([(e, -c) for e, c in self.terms], self.rem)

    def __sub__(self, other):
        return self + (-Series.lift(other))

    def __rsub__(self, other):
        return Series.lift(other) - self

    def __mul__(self, other):
        other = Series.lift(other)
        terms = [(e1 + e2, c1 * c2) for e1, c1 in self.terms for e2, c2 in other.terms]
        rem = None
        if self.rem is not None:
            lead = other.terms[0][0] if other.terms else other.rem
            if lead is not None:
                rem = _max_rem(rem, self.rem + lead)
        if other.rem is not None:
            lead = self.terms[0][0] if self.terms else self.rem
            if lead is not None:
                rem = _max_rem(rem, other.rem + lead)
        return Series(terms, rem)

    __rmul__ = __mul__

    def reciprocal(self) -> "Series":
        if not self.terms:
            raise ZeroDivisionError("reciprocal of a series without a decided leading term")
        p, c = self.terms[0]
        if self.rem is not None and self.rem >= p:
            raise ZeroDivisionError("leading term does not dominate the remainder")
        # self = c j^p (1 + u), u built from lower-order terms only.
        u = Series([(e - p, ci / c) for e, ci in self.terms[1:]],
                   None if self.rem is None else self.rem - p)
        if not u.terms and u.rem is None:
            return Series([(-p, 1 / c)])
        top = u.terms[0][0] if u.terms else u.rem
        steps = int(math.ceil(DEPTH / -top)) + 1 if top < 0 else 1
        acc = Series.const(1)
        power = Series.const(1)
        neg_u = -u
        for _ in range(steps):
            power = power * neg_u
            acc = acc + power
        acc = Series(acc.terms, _max_rem(acc.rem, top * (steps + 1)))
        return acc * Series([(-p, 1 / c)])

    def __truediv__(self, other):
        return self * Series.lift(other).reciprocal()

    def __rtruediv__(self, other):
        return Series.lift(other) * self.reciprocal()

    def shift(self, n: int) -> "Series":
        """Substitute ``j -> j + n``."""
        if n == 0:
            return self
        out: list = []
        rem = self.rem
        for e, c in self.terms:
            if e.denominator == 1 and e >= 0:
                m_max = int(e)
                out += [(e - m, c * _binom(e, m) * Fraction(n) ** m) for m in range(m_max + 1)]
            else:
                m_max = int(DEPTH) + 1
                out += [(e - m, c * _binom(e, m) * Fraction(n) ** m) for m in range(m_max)]
                rem = _max_rem(rem, e - m_max)
        return Series(out, rem)

    # -- queries ---------------------------------------------------------
    def is_exact_zero(self) -> bool:
        return not self.terms and self.rem is None

    def is_constant(self) -> bool:
        return self.rem is None and all(e == 0 for e, _ in self.terms)

    def leading(self):
        """Return ``(exponent, coefficient)`` of the dominant term, or None if undecided."""
        if not self.terms:
            return None
        e, c = self.terms[0]
        if self.rem is not None and self.rem >= e:
            return None
        return e, c

    def sign(self) -> Optional[int]:
        """Eventual sign (-1, 0, 1); None when the remainder hides it."""
        if self.is_exact_zero():
            return 0
        lead = self.leading()
        if lead is None:
            return None
        return 1 if lead[1] > 0 else -1

    def limit(self):
        """Limit as j -> infinity: a Fraction, +-inf, or None when undecided."""
        if not self.terms:
            if self.rem is None or self.rem < 0:
                return Fraction(0)
            return None
        lead = self.leading()
        if lead is None:
            # the remainder may still be negligible for a finite limit
            if self.rem is not None and self.rem < 0 and all(e <= 0 for e, _ in self.terms):
                return sum((c for e, c in self.terms if e == 0), Fraction(0))
            return None
        e, c = lead
        if e > 0:
            return INF if c > 0 else -INF
        if e == 0:
            return c
        return Fraction(0)

    def __call__(self, j: float) -> float:
        """Numeric value of the retained terms (the remainder is dropped)."""
        return float(sum(float(c) * float(j) ** float(e) for e, c in self.terms))

    # -- serialization ---------------------------------------------------
    def to_json(self) -> list:
        if self.rem is not None:
            raise ValueError("only exact series serialize")
        return [[_num_out(c), _num_out(e)] for e, c in self.terms]

    @classmethod
    def from_json(cls, data) -> "Series":
        if isinstance(data, (int, float, str)):
            return cls.const(data)
        return cls([(e, c) for c, e in data])

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return self.terms == other.terms and self.rem == other.rem

    def __hash__(self):
        return hash((self.terms, self.rem))

    def __repr__(self):
        parts = [f"{c}*j^{e}" for e, c in self.terms] or ["0"]
        if self.rem is not None:
            parts.append(f"O(j^{self.rem})")
        return "Series(" + " + ".join(parts) + ")"


def _max_rem(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b)


def _num_out(x: Fraction):
    if x.denominator == 1:
        return int(x)
    return str(x)


# -- extended-real helpers for limits ----------------------------------------

def ext_max(values):
    """Maximum of extended reals; None if any entry is undecided."""
    vals = list(values)
    if any(v is None for v in vals):
        return None
    return max(vals) if vals else None


def ext_min(values):
    vals = list(values)
    if any(v is None for v in vals):
        return None
    return min(vals) if vals else None


def fmt_limit(value) -> Union[str, float, None]:
    if value is None:
        return None
    if value == INF:
        return "+inf"
    if value == -INF:
        return "-inf"
    return float(value)
