"""Dense generating pairs in Z[1/2] with exact Bezout certificates.

Given ``g0 = k1 / 2**m`` and ``h0 = k2 / 2**m`` the perturbation
``h = h0 + beta / 2**(m+N)`` with a suitable odd ``beta`` makes
``2**N k1`` and ``2**N k2 + beta`` coprime for every ``N``, so the group
generated by ``g0`` and ``h`` contains ``2**-(m+N)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from ._parallel import worker_count
from .dyadic import Dyadic, combine, normalize

__all__ = [
    "PairCertificate",
    "NotCoprime",
    "odd_prime_factors",
    "extended_gcd",
    "compute_beta",
    "certify",
    "certify_batch",
    "common_scale",
    "construct_pair",
    "reach_target",
]


class NotCoprime(ValueError):
    def __init__(self, a: int, b: int, g: int):
        self.gcd = g
        super().__init__(f"gcd({a}, {b}) = {g}, no Bezout certificate for 1")


def odd_prime_factors(n: int) -> list[int]:
    """Distinct odd primes dividing ``n``, by trial division."""
    n = abs(n)
    if n == 0:
        raise ValueError("0 has no finite prime factorization")
    while n % 2 == 0:
        n //= 2
    primes = []
    p = 3
    while p * p <= n:
        if n % p == 0:
            primes.append(p)
            while n % p == 0:
                n //= p
        p += 2
    if n > 1:
        primes.append(n)
    return primes


def extended_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, x, y)`` with ``a*x + b*y = g = gcd(a, b) >= 0``."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def compute_beta(k1: int, k2: int) -> int:
    """Odd ``beta > 0`` with ``gcd(2**N k1, 2**N k2 + beta) = 1`` for all ``N >= 0``.

    Primes dividing both ``k1`` and ``k2`` contribute to ``2 + prod``; primes
    dividing ``k1`` only multiply the result.
    """
    if k1 == 0:
        raise ValueError("k1 must be nonzero: g0 = 0 cannot be part of a generating pair")
    shared = 1
    only_k1 = 1
    for p in odd_prime_factors(k1):
        if k2 % p == 0:
            shared *= p
        else:
            only_k1 *= p
    return (2 + shared) * only_k1


def certify(k1: int, k2: int, beta: int, N: int) -> tuple[int, int]:
    """Integers ``(u, v)`` with ``u * 2**N k1 + v * (2**N k2 + beta) = 1``."""
    if N < 0:
        raise ValueError("N must be non-negative")
    a = k1 << N
    b = (k2 << N) + beta
    g, u, v = extended_gcd(a, b)
    if g != 1:
        raise NotCoprime(a, b, g)
    assert u * a + v * b == 1
    return u, v


def certify_batch(triples: Iterable[tuple[int, int, int]], workers: Optional[int] = None) -> list[tuple[int, int]]:
    """Certify many ``(k1, k2, N)`` triples; output order follows input order."""
    jobs = [(k1, k2, compute_beta(k1, k2), N) for k1, k2, N in triples]
    n = worker_count() if workers is None else workers
    if n <= 1 or len(jobs) < 64:
        return [certify(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(lambda job: certify(*job), jobs))


def common_scale(g0: Dyadic, h0: Dyadic) -> tuple[int, int, int]:
    """``(m, k1, k2)`` with ``g0 = k1/2**m``, ``h0 = k2/2**m`` and ``m`` minimal."""
    m = max(g0.scale, h0.scale)
    return m, g0.num << (m - g0.scale), h0.num << (m - h0.scale)


@dataclass(frozen=True)
class PairCertificate:
    g0: Dyadic
    h0: Dyadic
    m: int
    k1: int
    k2: int
    beta: int
    N: int
    h: Dyadic
    u: int
    v: int

    @property
    def step(self) -> Dyadic:
        """The smallest positive element ``2**-(m+N)`` the pair is certified to reach."""
        return Dyadic(1, self.m + self.N)

    def verify(self) -> None:
        """Re-check every invariant exactly; raises ``AssertionError`` on failure."""
        a = self.k1 << self.N
        b = (self.k2 << self.N) + self.beta
        if self.beta % 2 != 1 or self.beta <= 0:
            raise AssertionError(f"beta = {self.beta} is not a positive odd integer")
        if math.gcd(a, b) != 1:
            raise AssertionError(f"gcd({a}, {b}) != 1")
        if self.u * a + self.v * b != 1:
            raise AssertionError("Bezout identity fails")
        if self.h != combine(1, self.h0, self.beta, self.step):
            raise AssertionError("h != h0 + beta / 2^(m+N)")
        if combine(self.u, self.g0, self.v, self.h) != self.step:
            raise AssertionError("u*g0 + v*h != 2^-(m+N)")

    def as_dict(self) -> dict:
        return {
            "g0": str(self.g0),
            "h0": str(self.h0),
            "m": self.m,
            "k1": self.k1,
            "k2": self.k2,
            "beta": self.beta,
            "N": self.N,
            "h": str(self.h),
            "u": self.u,
            "v": self.v,
            "step": str(self.step),
        }


def construct_pair(g0: Dyadic, h0: Dyadic, N: int) -> PairCertificate:
    if g0.num == 0:
        raise ValueError("g0 must be nonzero")
    if N < 0:
        raise ValueError("N must be non-negative")
    m, k1, k2 = common_scale(g0, h0)
    beta = compute_beta(k1, k2)
    u, v = certify(k1, k2, beta, N)
    h = combine(1, h0, beta, Dyadic(1, m + N))
    cert = PairCertificate(g0, h0, m, k1, k2, beta, N, h, u, v)
    cert.verify()
    return cert


def reach_target(cert: PairCertificate, target: Dyadic) -> Optional[tuple[int, int]]:
    """Integers ``(u', v')`` with ``u' g0 + v' h = target``, or ``None`` when
    ``target`` is not a multiple of ``2**-(m+N)``."""
    depth = cert.m + cert.N
    if target.scale > depth:
        return None
    t = target.num << (depth - target.scale)
    pair = (t * cert.u, t * cert.v)
    if combine(pair[0], cert.g0, pair[1], cert.h) != target:
        raise AssertionError(f"reach_target produced an inexact combination for {target}")
    return pair


def perturbation(cert: PairCertificate) -> Dyadic:
    """``h - h0 = beta / 2**(m+N)``."""
    return normalize(cert.beta, cert.m + cert.N)
