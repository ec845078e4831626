"""Exact arithmetic in the ring Z[1/2] of dyadic rationals.

A :class:`Dyadic` stores ``num / 2**scale`` in canonical form (``num`` odd
unless the value is an integer), so equal values always have equal fields.
:class:`SignedDigitRepr` holds a finite sum ``sum(a_i * 2**-i)`` with digits
in {-1, 0, 1}.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

__all__ = [
    "Dyadic",
    "SignedDigitRepr",
    "normalize",
    "combine",
    "eval_repr",
    "lsb_position",
    "parse_dyadic",
]


@dataclass(frozen=True, order=False)
class Dyadic:
    num: int
    scale: int = 0

    def __post_init__(self):
        if self.scale < 0:
            raise ValueError(f"scale must be non-negative, got {self.scale}")
        if self.num == 0:
            if self.scale != 0:
                raise ValueError("zero must have scale 0; use normalize()")
        elif self.scale > 0 and self.num % 2 == 0:
            raise ValueError(f"non-canonical dyadic {self.num}/2^{self.scale}; use normalize()")

    @classmethod
    def from_fraction(cls, q: Union[Fraction, int]) -> "Dyadic":
        q = Fraction(q)
        d = q.denominator
        if d & (d - 1):
            raise ValueError(f"{q} is not a dyadic rational")
        return cls(q.numerator, d.bit_length() - 1)

    def to_fraction(self) -> Fraction:
        return Fraction(self.num, 1 << self.scale)

    def __float__(self) -> float:
        return self.num / (1 << self.scale)

    def __bool__(self) -> bool:
        return self.num != 0

    def __neg__(self) -> "Dyadic":
        return Dyadic(-self.num, self.scale)

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return combine(1, self, 1, other)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return combine(1, self, -1, other)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return combine(1, other, -1, self)

    def __mul__(self, other):
        if isinstance(other, Dyadic):
            return normalize(self.num * other.num, self.scale + other.scale)
        if isinstance(other, int):
            return normalize(self.num * other, self.scale)
        return NotImplemented

    __rmul__ = __mul__

    def _cmp_key(self, other) -> tuple[int, int]:
        other = _coerce(other)
        if other is NotImplemented:
            raise TypeError(f"cannot compare Dyadic with {type(other).__name__}")
        s = max(self.scale, other.scale)
        return self.num << (s - self.scale), other.num << (s - other.scale)

    def __lt__(self, other):
        a, b = self._cmp_key(other)
        return a < b

    def __le__(self, other):
        a, b = self._cmp_key(other)
        return a <= b

    def __gt__(self, other):
        a, b = self._cmp_key(other)
        return a > b

    def __ge__(self, other):
        a, b = self._cmp_key(other)
        return a >= b

    def __abs__(self) -> "Dyadic":
        return Dyadic(abs(self.num), self.scale)

    def is_integer(self) -> bool:
        return self.scale == 0

    def __str__(self) -> str:
        if self.scale == 0:
            return str(self.num)
        if self.scale == 1:
            return f"{self.num}/2"
        return f"{self.num}/2^{self.scale}"

    def to_decimal(self, digits: int = 20) -> str:
        """Debug printer: exact decimal expansion, truncated to ``digits`` places."""
        q = self.to_fraction()
        sign = "-" if q < 0 else ""
        q = abs(q)
        whole, rest = divmod(q.numerator, q.denominator)
        out = []
        for _ in range(digits):
            if not rest:
                break
            rest *= 10
            d, rest = divmod(rest, q.denominator)
            out.append(str(d))
        return f"{sign}{whole}" + ("." + "".join(out) if out else "")


def _coerce(x):
    if isinstance(x, Dyadic):
        return x
    if isinstance(x, int):
        return Dyadic(x, 0)
    return NotImplemented


def normalize(num: int, scale: int) -> Dyadic:
    """Canonical :class:`Dyadic` equal to ``num / 2**scale``."""
    if scale < 0:
        raise ValueError(f"scale must be non-negative, got {scale}")
    if num == 0:
        return Dyadic(0, 0)
    # strip common factors of two between num and 2**scale
    tz = (num & -num).bit_length() - 1
    shift = min(tz, scale)
    return Dyadic(num >> shift, scale - shift)


def combine(u: int, x: Dyadic, v: int, y: Dyadic) -> Dyadic:
    """Exact ``u*x + v*y`` for integers ``u``, ``v``."""
    s = max(x.scale, y.scale)
    total = u * (x.num << (s - x.scale)) + v * (y.num << (s - y.scale))
    return normalize(total, s)


class SignedDigitRepr(Mapping[int, int]):
    """Finite map position -> digit in {-1, 1}; value is ``sum(a * 2**-i)``.

    Zero digits are dropped on construction, so ``len`` counts nonzero digits.
    """

    __slots__ = ("_digits",)

    def __init__(self, digits: Union[Mapping[int, int], Iterable[tuple[int, int]], None] = None):
        items = digits.items() if isinstance(digits, Mapping) else (digits or ())
        clean = {}
        for pos, a in items:
            if a not in (-1, 0, 1):
                raise ValueError(f"digit {a} at position {pos} is not in {{-1, 0, 1}}")
            if a:
                clean[int(pos)] = a
        self._digits = dict(sorted(clean.items()))

    def __getitem__(self, pos: int) -> int:
        return self._digits[pos]

    def __iter__(self):
        return iter(self._digits)

    def __len__(self) -> int:
        return len(self._digits)

    def __eq__(self, other):
        if isinstance(other, SignedDigitRepr):
            return self._digits == other._digits
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self._digits.items()))

    def __repr__(self) -> str:
        body = ", ".join(f"{i}: {'+' if a > 0 else '-'}1" for i, a in self._digits.items())
        return f"SignedDigitRepr({{{body}}})"

    def negated(self) -> "SignedDigitRepr":
        return SignedDigitRepr({i: -a for i, a in self._digits.items()})


def eval_repr(repr_: Mapping[int, int]) -> Dyadic:
    """Exact value of a signed-digit (or any integer-digit) representation."""
    if not repr_:
        return Dyadic(0, 0)
    # bring every term over the finest denominator 2**s
    s = max(max(repr_), 0)
    total = sum(a << (s - i) for i, a in repr_.items())
    return normalize(total, s)


def lsb_position(x: Dyadic) -> int:
    """Finest position at which every signed-digit representation of ``x`` has a digit.

    For canonical ``x = k / 2**m`` with ``k`` odd this is ``m``; for an integer
    it is ``-v`` where ``2**v`` is the largest power of two dividing ``k``.
    """
    if x.num == 0:
        raise ValueError("lsb_position is undefined for zero")
    if x.scale > 0:
        return x.scale
    return -((x.num & -x.num).bit_length() - 1)


_DYADIC_RE = re.compile(
    r"""^\s*(?P<num>[+-]?\d+)
        (?:\s*/\s*(?:(?P<base>2)\s*\^\s*(?P<exp>\d+)|(?P<den>\d+)))?\s*$""",
    re.VERBOSE,
)


def parse_dyadic(text: str) -> Dyadic:
    """Parse ``"k"``, ``"k/2^m"`` or ``"p/q"`` (q a power of two)."""
    m = _DYADIC_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse dyadic rational from {text!r}")
    num = int(m.group("num"))
    if m.group("exp") is not None:
        return normalize(num, int(m.group("exp")))
    if m.group("den") is not None:
        den = int(m.group("den"))
        if den <= 0 or den & (den - 1):
            raise ValueError(f"denominator {den} in {text!r} is not a power of two")
        return normalize(num, den.bit_length() - 1)
    return Dyadic(num, 0)
