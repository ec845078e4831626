"""Stevens' weighted group norm on the dyadic rationals.

For weights ``(r_i)`` indexed by all integers, with ``r_{i+1} <= r_i <= 2 r_{i+1}``
and ``r_i -> 0``, the norm of ``x`` is the cheapest way to write
``x = sum(a_i * 2**-i)`` when every nonzero digit at position ``i`` costs
``|a_i| * r_i``.  Digits may be restricted to {-1, 0, 1} without changing the
infimum; :func:`norm` exploits that with a two-state carry recursion and
:func:`norm_oracle` re-derives the value by exhaustive search over integer
digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Mapping, Optional, Union

from .dyadic import Dyadic, SignedDigitRepr, eval_repr, lsb_position, normalize

__all__ = [
    "WeightSequence",
    "HarmonicTail",
    "GeometricTail",
    "Table",
    "WeightViolation",
    "UndecidableTail",
    "SearchSpaceTooLarge",
    "NormResult",
    "validate_weights",
    "norm",
    "norm_oracle",
    "circle_norm",
    "divergence_flag",
    "parse_weights",
    "load_weight_table",
]


class WeightViolation(ValueError):
    """A weight sequence breaks positivity, the doubling constraint, or decay."""

    def __init__(self, index: Optional[int], reason: str):
        self.index = index
        self.reason = reason
        where = "tail" if index is None else f"index {index}"
        super().__init__(f"weight violation at {where}: {reason}")


class UndecidableTail(ValueError):
    pass


class SearchSpaceTooLarge(ValueError):
    pass


class WeightSequence:
    """Bi-infinite sequence of positive rational weights ``r_i``."""

    def weight_at(self, i: int) -> Fraction:
        raise NotImplementedError

    def tail_decays(self) -> Optional[bool]:
        """Whether ``r_i -> 0`` as ``i -> +inf``; ``None`` when the kind cannot say."""
        raise NotImplementedError

    def tail_diverges(self) -> bool:
        """Whether ``sum_{i >= 1} r_i`` diverges."""
        raise NotImplementedError

    def __getitem__(self, i: int) -> Fraction:
        return self.weight_at(i)


@dataclass(frozen=True)
class HarmonicTail(WeightSequence):
    """``r_i = 1`` for ``i <= 0`` and ``r_i = 1/i`` for ``i >= 1``."""

    def weight_at(self, i: int) -> Fraction:
        return Fraction(1) if i <= 0 else Fraction(1, i)

    def tail_decays(self) -> bool:
        return True

    def tail_diverges(self) -> bool:
        return True

    def __str__(self):
        return "harmonic"


@dataclass(frozen=True)
class GeometricTail(WeightSequence):
    """``r_i = q**i`` for every integer ``i``."""

    q: Fraction

    def __post_init__(self):
        object.__setattr__(self, "q", Fraction(self.q))
        if self.q <= 0:
            raise ValueError(f"geometric ratio must be positive, got {self.q}")

    def weight_at(self, i: int) -> Fraction:
        return self.q**i

    def tail_decays(self) -> bool:
        return self.q < 1

    def tail_diverges(self) -> bool:
        return self.q >= 1

    def __str__(self):
        return f"geometric:{self.q}"


@dataclass(frozen=True)
class Table(WeightSequence):
    """Explicit weights on finitely many positions, ``tail`` everywhere else."""

    entries: Mapping[int, Fraction] = field(default_factory=dict)
    tail: Optional[WeightSequence] = None

    def __post_init__(self):
        object.__setattr__(
            self, "entries", {int(i): Fraction(r) for i, r in dict(self.entries).items()}
        )

    def __hash__(self):
        return hash((tuple(sorted(self.entries.items())), self.tail))

    def weight_at(self, i: int) -> Fraction:
        if i in self.entries:
            return self.entries[i]
        if self.tail is None:
            raise WeightViolation(i, "weight undefined outside the table and no tail rule given")
        return self.tail.weight_at(i)

    def tail_decays(self) -> Optional[bool]:
        return None if self.tail is None else self.tail.tail_decays()

    def tail_diverges(self) -> bool:
        if self.tail is None:
            raise UndecidableTail("table without a tail rule: divergence of the weight sum is undecidable")
        return self.tail.tail_diverges()

    def __str__(self):
        return f"table[{len(self.entries)} entries, tail={self.tail}]"


def validate_weights(ws: WeightSequence, lo: int, hi: int) -> None:
    """Check positivity on ``[lo, hi]``, the doubling constraint on consecutive
    pairs inside the window, and the symbolic tail decay.

    Raises :class:`WeightViolation` carrying the first offending index.
    """
    if hi < lo:
        raise ValueError(f"empty window [{lo}, {hi}]")
    prev = None
    for i in range(lo, hi + 1):
        r = ws.weight_at(i)
        if r <= 0:
            raise WeightViolation(i, f"r_{i} = {r} is not positive")
        if prev is not None and not (r <= prev <= 2 * r):
            raise WeightViolation(i - 1, f"r_{i} <= r_{i - 1} <= 2 r_{i} fails ({r}, {prev})")
        prev = r
    decays = ws.tail_decays()
    if decays is None:
        raise WeightViolation(None, "tail decay cannot be certified without a tail rule")
    if not decays:
        raise WeightViolation(None, "weights do not tend to zero")


_validated: dict = {}


def _ensure_valid(ws: WeightSequence, lo: int, hi: int) -> None:
    # cache the widest window already checked per weight sequence
    try:
        done = _validated.get(ws)
    except TypeError:
        done = None
    if done is not None and done[0] <= lo and hi <= done[1]:
        return
    if done is not None:
        lo, hi = min(lo, done[0]), max(hi, done[1])
    validate_weights(ws, lo, hi)
    try:
        _validated[ws] = (lo, hi)
    except TypeError:
        pass


@dataclass(frozen=True)
class NormResult:
    value: Fraction
    witness: SignedDigitRepr

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("norm value must be non-negative")


def norm(x: Dyadic, ws: WeightSequence) -> NormResult:
    """Exact Stevens norm of ``x`` together with an optimal signed-digit witness."""
    if x.num == 0:
        return NormResult(Fraction(0), SignedDigitRepr())
    mag = abs(x.num)
    nbits = mag.bit_length()
    finest = x.scale
    _ensure_valid(ws, finest - nbits - 2, finest)

    # cost[c] is the cheapest prefix ending with carry c into the next coarser position
    cost: list[Optional[Fraction]] = [Fraction(0), None]
    back: list[tuple] = []
    for j in range(nbits):
        pos = finest - j
        b = (mag >> j) & 1
        r = ws.weight_at(pos)
        new: list[Optional[Fraction]] = [None, None]
        step: list[Optional[tuple[int, int]]] = [None, None]
        for c in (0, 1):
            if cost[c] is None:
                continue
            t = b + c
            if t == 0:
                moves = ((0, 0),)
            elif t == 1:
                moves = ((1, 0), (-1, 1))
            else:
                moves = ((0, 1),)
            for a, nc in moves:
                val = cost[c] + (r if a else 0)
                if new[nc] is None or val < new[nc]:
                    new[nc] = val
                    step[nc] = (c, a)
        cost = new
        back.append(step)

    top = finest - nbits
    options = []
    if cost[0] is not None:
        options.append((cost[0], 0, 0))
    if cost[1] is not None:
        options.append((cost[1] + ws.weight_at(top), 1, 1))
    value, carry, top_digit = min(options, key=lambda o: o[0])

    digits = {}
    if top_digit:
        digits[top] = top_digit
    for j in range(nbits - 1, -1, -1):
        c, a = back[j][carry]
        if a:
            digits[finest - j] = a
        carry = c
    if x.num < 0:
        digits = {i: -a for i, a in digits.items()}
    return NormResult(value, SignedDigitRepr(digits))


def norm_oracle(
    x: Dyadic,
    ws: WeightSequence,
    window: tuple[int, int],
    maxcoeff: int = 1,
) -> Optional[Fraction]:
    """Minimum of ``sum |a_i| r_i`` over all integer digit vectors with
    ``|a_i| <= maxcoeff`` supported on positions ``window = (lo, hi)``.

    Exhaustive search from the finest position; identical sub-searches are
    shared through a memo table.  Returns ``None`` when ``x`` has no
    representation inside the window.
    """
    lo, hi = window
    if hi < lo:
        raise ValueError(f"empty window {window}")
    npos = hi - lo + 1
    if maxcoeff < 1:
        raise ValueError("maxcoeff must be at least 1")
    if npos > 64 or maxcoeff > 16:
        raise SearchSpaceTooLarge(f"{npos} positions with maxcoeff {maxcoeff} is beyond exhaustive range")
    if x.num == 0:
        return Fraction(0)
    if x.scale > hi:
        return None
    target = x.num << (hi - x.scale)
    weights = [ws.weight_at(p) for p in range(hi, lo - 1, -1)]

    @lru_cache(maxsize=None)
    def best(j: int, residual: int) -> Optional[Fraction]:
        # residual is what remains to express with positions hi-j, hi-j-1, ..., lo (unit 2**-(hi-j))
        remaining = npos - j
        if remaining == 0:
            return Fraction(0) if residual == 0 else None
        if abs(residual) > maxcoeff * ((1 << remaining) - 1):
            return None
        out = None
        for a in range(-maxcoeff, maxcoeff + 1):
            if (residual - a) % 2:
                continue
            sub = best(j + 1, (residual - a) // 2)
            if sub is None:
                continue
            total = sub + abs(a) * weights[j]
            if out is None or total < out:
                out = total
        return out

    return best(0, target)


def circle_norm(x: Dyadic, ws: WeightSequence) -> Fraction:
    """Quotient norm ``min_k ||x + k||`` on Z[1/2] / Z.

    Any representation with ``|y| >= 2`` spends at least one digit at a
    position ``i <= -1``, and valid weights are nonincreasing, so the window
    ``|x + k| < 2`` already contains a minimizer.
    """
    # r_i >= r_0 for i <= 0 follows from r_{i+1} <= r_i; validate that explicitly
    _ensure_valid(ws, -2, max(x.scale, 1))
    if x.num == 0:
        return Fraction(0)
    q = x.to_fraction()
    k_lo = math.floor(-2 - q) + 1
    k_hi = math.ceil(2 - q) - 1
    best = None
    for k in range(k_lo, k_hi + 1):
        y = x + k
        if abs(y.to_fraction()) >= 2:
            continue
        v = norm(y, ws).value
        if best is None or v < best:
            best = v
    return best


def divergence_flag(ws: WeightSequence) -> bool:
    """True when ``sum_{i >= 1} r_i = +inf``, i.e. the completion is totally disconnected."""
    return ws.tail_diverges()


def load_weight_table(path: Union[str, Path]) -> Table:
    """Read ``i,r_i`` lines; a ``tail,<rule>`` line declares the tail rule."""
    entries = {}
    tail = None
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, val = (s.strip() for s in line.partition(","))
        if key == "tail":
            tail = parse_weights(val) if val and val != "none" else None
            continue
        try:
            entries[int(key)] = Fraction(val)
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: bad weight line {raw!r}") from exc
    return Table(entries, tail)


def parse_weights(text: str) -> WeightSequence:
    """``harmonic``, ``geometric:<q>`` or a path to a weight table file."""
    text = text.strip()
    if text == "harmonic":
        return HarmonicTail()
    if text.startswith("geometric:"):
        return GeometricTail(Fraction(text.split(":", 1)[1]))
    if text.startswith("file:"):
        text = text[5:]
    if Path(text).is_file():
        return load_weight_table(text)
    raise ValueError(f"unknown weight sequence {text!r}")


def signed_digit_count(n: int) -> int:
    """Nonzero digits in the non-adjacent form of ``n`` (its minimal signed-digit weight)."""
    n = abs(n)
    count = 0
    while n:
        if n & 1:
            count += 1
            n -= 2 - (n & 3)
        n >>= 1
    return count
