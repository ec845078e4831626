"""Finitely supported permutations of the naturals and submeasure metrics.

``d_lambda(s, t) = lambda({n : s(n) != t(n)})`` for a submeasure ``lambda``
on the naturals; the uniform metric ``d_u`` on ``n`` points is the special
case of normalized counting measure.  Also here: the escape construction
showing the harmonic ``S_lambda`` is not non-archimedean, breadth-first word
balls, and the support-union check behind the quasi non-archimedean bound.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional, Sequence

import gmpy2

__all__ = [
    "FinPerm",
    "Submeasure",
    "WeightedSum",
    "Capped",
    "UniformMeasure",
    "harmonic",
    "EscapeWitness",
    "BallTooLarge",
    "compose",
    "submeasure_eval",
    "d_lambda",
    "escape_construction",
    "word_ball",
    "QnaReport",
    "qna_modulus_check",
    "disjoint_control",
]


class FinPerm:
    """Permutation of the naturals moving finitely many points.

    Stored as the sorted tuple of ``(n, sigma(n))`` pairs with ``sigma(n) != n``;
    that tuple is the canonical form used for hashing and equality.
    """

    __slots__ = ("_map", "_keycache")

    def __init__(self, mapping: Optional[Mapping[int, int]] = None, *, _trusted: bool = False):
        if _trusted:
            moved = mapping
        else:
            moved = {int(n): int(m) for n, m in (mapping or {}).items() if n != m}
            if any(n < 0 for n in moved):
                raise ValueError("points must be natural numbers")
            if set(moved) != set(moved.values()):
                raise ValueError(f"{moved} is not a bijection of its support")
        self._map = moved
        self._keycache = None

    @property
    def _key(self) -> tuple:
        if self._keycache is None:
            self._keycache = tuple(sorted(self._map.items()))
        return self._keycache

    @classmethod
    def cycle(cls, *points: int) -> "FinPerm":
        """The cycle ``points[0] -> points[1] -> ... -> points[0]``."""
        if len(set(points)) != len(points):
            raise ValueError("cycle points must be distinct")
        if len(points) < 2:
            return cls()
        return cls({p: points[(i + 1) % len(points)] for i, p in enumerate(points)})

    @classmethod
    def identity(cls) -> "FinPerm":
        return cls()

    def __call__(self, n: int) -> int:
        return self._map.get(n, n)

    @property
    def support(self) -> frozenset:
        return frozenset(self._map)

    def items(self):
        return self._key

    def inverse(self) -> "FinPerm":
        return FinPerm({m: n for n, m in self._map.items()}, _trusted=True)

    def __mul__(self, other: "FinPerm") -> "FinPerm":
        return compose(self, other)

    def __eq__(self, other):
        if isinstance(other, FinPerm):
            return self._key == other._key
        return NotImplemented

    def __hash__(self):
        return hash(self._key)

    def __bool__(self):
        return bool(self._map)

    def __repr__(self):
        if not self._map:
            return "FinPerm()"
        return f"FinPerm({dict(self._key)})"

    def cycles(self) -> list[tuple[int, ...]]:
        seen = set()
        out = []
        for start in sorted(self._map):
            if start in seen:
                continue
            cyc = [start]
            seen.add(start)
            n = self._map[start]
            while n != start:
                cyc.append(n)
                seen.add(n)
                n = self._map[n]
            out.append(tuple(cyc))
        return out


def compose(sigma: FinPerm, tau: FinPerm) -> FinPerm:
    """``sigma o tau``: apply ``tau`` first."""
    out = {}
    smap, tmap = sigma._map, tau._map
    for n in smap.keys() | tmap.keys():
        t = tmap.get(n, n)
        m = smap.get(t, t)
        if m != n:
            out[n] = m
    return FinPerm(out, _trusted=True)


class Submeasure:
    """Monotone, subadditive set function on finite subsets of the naturals."""

    def __call__(self, points: Iterable[int]) -> Fraction:
        raise NotImplementedError

    def point_weight(self, n: int) -> Fraction:
        return self({n})


def _pairwise_sum(values: Sequence):
    # balanced summation keeps intermediate denominators small
    vals = list(values)
    if not vals:
        return Fraction(0)
    while len(vals) > 1:
        nxt = [vals[i] + vals[i + 1] for i in range(0, len(vals) - 1, 2)]
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]


def _runs(points: Iterable[int]) -> list[tuple[int, int]]:
    """Maximal runs ``(a, b)`` of consecutive integers, inclusive."""
    out = []
    pts = points if isinstance(points, (set, frozenset)) else set(points)
    for n in sorted(pts):
        if out and out[-1][1] == n - 1:
            out[-1] = (out[-1][0], n)
        else:
            out.append((n, n))
    return out


@dataclass(frozen=True)
class WeightedSum(Submeasure):
    """``lambda(A) = sum(w(n) for n in A)`` for a positive weight function ``w``.

    ``range_sum(a, b)``, when given, returns the exact sum over ``a..b`` and is
    used for runs of consecutive points; ``approx`` is a float version of
    ``weight`` used only to guide searches whose result is then checked exactly.
    """

    weight: Callable[[int], Fraction]
    name: str = "weighted"
    range_sum: Optional[Callable[[int, int], object]] = None
    approx: Optional[Callable[[int], float]] = None

    def point_weight(self, n: int) -> Fraction:
        w = self.weight(n)
        if not w > 0:
            raise ValueError(f"point weight at {n} must be positive, got {w}")
        return w

    def span(self, a: int, b: int):
        """Exact weight of ``{a, ..., b}``."""
        if b < a:
            return Fraction(0)
        if self.range_sum is not None:
            self.point_weight(a)
            return self.range_sum(a, b)
        return _pairwise_sum([self.point_weight(n) for n in range(a, b + 1)])

    def __call__(self, points: Iterable[int]):
        return _pairwise_sum([self.span(a, b) for a, b in _runs(points)])

    def __str__(self):
        return self.name


def _harmonic_weight(n: int) -> Fraction:
    if n < 1:
        raise ValueError(f"harmonic weight 1/n is undefined at n = {n}")
    return Fraction(1, n)


def _harmonic_split(a: int, b: int) -> tuple:
    # sum of 1/n for a <= n < b as an unreduced pair (p, q)
    if b - a == 1:
        return gmpy2.mpz(1), gmpy2.mpz(a)
    if b - a < 16:
        p, q = gmpy2.mpz(0), gmpy2.mpz(1)
        for n in range(a, b):
            p, q = p * n + q, q * n
        return p, q
    mid = (a + b) // 2
    p1, q1 = _harmonic_split(a, mid)
    p2, q2 = _harmonic_split(mid, b)
    return p1 * q2 + p2 * q1, q1 * q2


def harmonic_range(a: int, b: int):
    """Exact ``sum(1/n for n in range(a, b + 1))`` as a reduced ``gmpy2.mpq``."""
    if a < 1:
        raise ValueError(f"harmonic weight 1/n is undefined at n = {a}")
    if b < a:
        return gmpy2.mpq(0)
    p, q = _harmonic_split(a, b + 1)
    return gmpy2.mpq(p, q)


def harmonic() -> WeightedSum:
    """The measure ``lambda(A) = sum(1/n for n in A)`` on ``{1, 2, ...}``.

    Values over long runs come back as ``gmpy2.mpq``; they compare and
    combine with :class:`~fractions.Fraction` transparently.
    """
    return WeightedSum(_harmonic_weight, "harmonic", harmonic_range, lambda n: 1.0 / n)


@dataclass(frozen=True)
class Capped(Submeasure):
    """``min(cap, inner(A))``."""

    inner: Submeasure
    cap: Fraction

    def __post_init__(self):
        object.__setattr__(self, "cap", Fraction(self.cap))
        if self.cap <= 0:
            raise ValueError("cap must be positive")

    def __call__(self, points: Iterable[int]) -> Fraction:
        pts = list(points)
        if not pts:
            return Fraction(0)
        return min(self.cap, self.inner(pts))

    def __str__(self):
        return f"capped({self.inner},{self.cap})"


@dataclass(frozen=True)
class UniformMeasure(Submeasure):
    """Normalized counting measure on ``{0, ..., n-1}``: the ``d_u`` model."""

    n: int

    def __call__(self, points: Iterable[int]) -> Fraction:
        pts = set(points)
        if any(p < 0 or p >= self.n for p in pts):
            raise ValueError(f"points outside the {self.n}-point space")
        return Fraction(len(pts), self.n)

    def __str__(self):
        return f"du:{self.n}"


def submeasure_eval(lam: Submeasure, points: Iterable[int]) -> Fraction:
    return lam(points)


def difference_set(sigma: FinPerm, tau: FinPerm) -> set[int]:
    smap, tmap = sigma._map, tau._map
    if not tmap or not smap:
        return set(smap or tmap)
    return {n for n in smap.keys() | tmap.keys() if smap.get(n, n) != tmap.get(n, n)}


def d_lambda(lam: Submeasure, sigma: FinPerm, tau: FinPerm) -> Fraction:
    return lam(difference_set(sigma, tau))


@dataclass(frozen=True)
class EscapeWitness:
    epsilon: Fraction
    blocks: tuple[tuple[int, ...], ...]
    block_values: tuple[Fraction, ...]
    generators: tuple[FinPerm, ...]
    product: FinPerm
    distance: Fraction

    def check(self) -> None:
        seen: set[int] = set()
        half = self.epsilon / 2
        for blk, val, gen in zip(self.blocks, self.block_values, self.generators):
            if seen & set(blk):
                raise AssertionError("escape blocks overlap")
            seen |= set(blk)
            if not half < val < self.epsilon:
                raise AssertionError(f"block value {val} outside ({half}, {self.epsilon})")
            if gen.support != frozenset(blk):
                raise AssertionError("generator support differs from its block")
        if self.distance < len(self.blocks) * half:
            raise AssertionError("product is closer than N * eps / 2")


def _greedy_block_end(lam: WeightedSum, a: int, half) -> tuple[int, object]:
    """Smallest ``b`` with ``lambda({a..b}) > half`` and that exact value."""
    if lam.range_sum is None or lam.approx is None:
        b, total = a - 1, Fraction(0)
        while total <= half:
            b += 1
            total += lam.point_weight(b)
        return b, total
    # float scan to a candidate, then settle the boundary exactly
    target = float(half)
    acc, b = 0.0, a - 1
    while acc <= target:
        b += 1
        acc += lam.approx(b)
    total = lam.span(a, b)
    while total <= half:
        b += 1
        total += lam.point_weight(b)
    while b > a and total - lam.point_weight(b) > half:
        total -= lam.point_weight(b)
        b -= 1
    return b, total


def escape_construction(lam: WeightedSum, epsilon, N: int) -> EscapeWitness:
    """Greedy disjoint blocks of consecutive integers, each with
    ``eps/2 < lambda(block) < eps``, and the product of one cycle per block.

    Blocks start past the first point whose weight is below ``eps/2``, so the
    weight that pushes a block over ``eps/2`` keeps it under ``eps``.
    """
    eps = Fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    if N < 0:
        raise ValueError("N must be non-negative")
    half = eps / 2
    if N == 0:
        return EscapeWitness(eps, (), (), (), FinPerm(), Fraction(0))

    n = 1
    while lam.point_weight(n) >= half:
        n += 1
    blocks, values, gens = [], [], []
    product_map = {}
    for _ in range(N):
        b, total = _greedy_block_end(lam, n, half)
        blk = tuple(range(n, b + 1))
        cyc = {p: p + 1 for p in range(n, b)}
        cyc[b] = n
        product_map.update(cyc)
        blocks.append(blk)
        values.append(total)
        gens.append(FinPerm(cyc, _trusted=True))
        n = b + 1

    # cycles on disjoint blocks commute, so the product is their union
    product = FinPerm(product_map, _trusted=True)
    witness = EscapeWitness(
        eps, tuple(blocks), tuple(values), tuple(gens), product, d_lambda(lam, product, FinPerm())
    )
    witness.check()
    return witness


class BallTooLarge(RuntimeError):
    pass


def word_ball(
    generators: Sequence,
    L: int,
    identity=None,
    *,
    cap: int = 2_000_000,
    check: Optional[Callable[[object], None]] = None,
) -> dict:
    """All products of at most ``L`` generators and inverses.

    Elements need ``*``, ``inverse()`` and hashing by canonical form.  Returns a
    dict ``element -> word length`` in breadth-first discovery order.
    ``check`` is called on every new element.
    """
    if L < 0:
        raise ValueError("L must be non-negative")
    if identity is None:
        identity = FinPerm()
    letters = []
    for g in generators:
        for x in (g, g.inverse()):
            if x not in letters:
                letters.append(x)
    ball = {identity: 0}
    if check is not None:
        check(identity)
    frontier = [identity]
    for length in range(1, L + 1):
        nxt = []
        for w in frontier:
            for x in letters:
                y = w * x
                if y in ball:
                    continue
                ball[y] = length
                if check is not None:
                    check(y)
                nxt.append(y)
                if len(ball) > cap:
                    raise BallTooLarge(f"word ball exceeded {cap} elements at length {length}")
        if not nxt:
            break
        frontier = nxt
    return ball


def random_small_perm(n: int, max_support: int, rng: random.Random) -> FinPerm:
    """Random permutation of ``{0..n-1}`` moving at most ``max_support`` points."""
    if max_support < 2:
        return FinPerm()
    size = rng.randint(2, max_support)
    pts = rng.sample(range(n), size)
    # random derangement of the chosen points
    while True:
        img = pts[:]
        rng.shuffle(img)
        if all(a != b for a, b in zip(pts, img)):
            return FinPerm(dict(zip(pts, img)))


@dataclass
class QnaReport:
    n: int
    epsilon: Fraction
    k: int
    L: int
    trials: int
    seed: int
    passes: int = 0
    failures: int = 0
    words_checked: int = 0
    max_distance: Fraction = Fraction(0)
    rows: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def as_dict(self) -> dict:
        return {
            "model": f"du:{self.n}",
            "eps": str(self.epsilon),
            "k": self.k,
            "L": self.L,
            "trials": self.trials,
            "seed": self.seed,
            "passes": self.passes,
            "failures": self.failures,
            "words_checked": self.words_checked,
            "max_distance": str(self.max_distance),
            "ok": self.ok,
        }


def _run_trial(n: int, eps: Fraction, L: int, gens: Sequence[FinPerm]):
    mu = UniformMeasure(n)
    union = frozenset().union(*(g.support for g in gens)) if gens else frozenset()
    bound = mu(union)
    bad = []

    def check(w):
        if not w.support <= union:
            bad.append(("support", w))

    ball = word_ball(gens, L, check=check)
    worst = Fraction(0)
    for w in ball:
        d = mu(w.support)
        worst = max(worst, d)
        if d > bound or d > eps:
            bad.append(("distance", w))
    return len(ball), worst, bound, bad


def qna_modulus_check(
    n: int,
    epsilon,
    k: int,
    L: int,
    trials: int,
    seed: int,
    generators: Optional[Sequence[Sequence[FinPerm]]] = None,
) -> QnaReport:
    """Sample ``k`` generators in the open ``d_u``-ball of radius ``eps/k`` and
    check every word of length ``<= L`` stays supported in the union of their
    supports, hence within ``eps`` of the identity.

    ``generators`` overrides sampling with explicit per-trial generator lists.
    """
    eps = Fraction(epsilon)
    if eps <= 0 or k < 1:
        raise ValueError("need eps > 0 and k >= 1")
    rng = random.Random(seed)
    # d_u(id, g) = |supp g| / n < eps / k
    max_support = math.ceil(eps * n / k) - 1
    report = QnaReport(n, eps, k, L, trials, seed)
    for t in range(trials):
        if generators is not None:
            gens = list(generators[t % len(generators)])
        else:
            gens = [random_small_perm(n, max_support, rng) for _ in range(k)]
        size, worst, bound, bad = _run_trial(n, eps, L, gens)
        report.words_checked += size
        report.max_distance = max(report.max_distance, worst)
        if bad:
            report.failures += 1
        else:
            report.passes += 1
        report.rows.append((t, size, worst, bound, not bad))
    return report


def disjoint_control(n: int, epsilon, k: int, L: int):
    """Negative control: ``k`` generators each at distance exactly ``eps``, on
    disjoint supports.  Returns the largest ``d_u(id, w)`` over the word ball."""
    eps = Fraction(epsilon)
    s = eps * n
    if s.denominator != 1 or s < 2 or k * s > n:
        raise ValueError("eps * n must be an integer >= 2 with k disjoint blocks fitting in n points")
    s = int(s)
    gens = [FinPerm.cycle(*range(i * s, (i + 1) * s)) for i in range(k)]
    mu = UniformMeasure(n)
    ball = word_ball(gens, L)
    return max(mu(w.support) for w in ball), gens
