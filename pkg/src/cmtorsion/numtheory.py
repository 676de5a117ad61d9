"""
Integer primitives: sieving, primality, factorization, divisors, and the
exact-rational helpers shared by the density and bounds code.

Rationals are plain :class:`fractions.Fraction` objects; everything that
needs exactness (densities, inclusion-exclusion sums) works with them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, NamedTuple, Sequence

import numpy as np

ExactRational = Fraction

SEGMENT_SIZE = 1 << 20       # odd numbers per sieve segment
MAX_SEGMENTS = 1 << 16       # caps hi - lo at about 2**37
WORD_LIMIT = 1 << 62


class Factorization(NamedTuple):
    value: int
    factors: tuple[tuple[int, int], ...]

    def __int__(self):
        return self.value

    @property
    def primes(self) -> list[int]:
        return [p for p, _ in self.factors]

    def valuation(self, p: int) -> int:
        for q, e in self.factors:
            if q == p:
                return e
        return 0

    def num_divisors(self) -> int:
        return math.prod(e + 1 for _, e in self.factors)


def primes_up_to(n: int) -> np.ndarray:
    """All primes <= n as an int64 array (plain Eratosthenes, odd-only)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    size = (n - 1) // 2          # index i <-> 2i + 3
    mask = np.ones(size, dtype=bool)
    for i in range((math.isqrt(n) - 1) // 2):
        if mask[i]:
            p = 2 * i + 3
            mask[(p * p - 3) // 2::p] = False
    odd = 2 * np.flatnonzero(mask).astype(np.int64) + 3
    return np.concatenate([np.array([2], dtype=np.int64), odd])


_base_primes = primes_up_to(1 << 16)


def _base_primes_to(n: int) -> np.ndarray:
    global _base_primes
    if _base_primes[-1] < n:
        _base_primes = primes_up_to(max(n, 2 * int(_base_primes[-1])))
    return _base_primes[: np.searchsorted(_base_primes, n, side="right")]


def sieve_segment(lo: int, hi: int, base: np.ndarray | None = None) -> np.ndarray:
    """Primes in [lo, hi] from a single odd-only segment (no size checks)."""
    if hi < lo or hi < 2:
        return np.zeros(0, dtype=np.int64)
    lo = max(lo, 2)
    out = [np.array([2], dtype=np.int64)] if lo <= 2 else []
    start = lo | 1 if lo > 2 else 3
    if start > hi:
        return out[0] if out else np.zeros(0, dtype=np.int64)
    count = (hi - start) // 2 + 1
    mask = np.ones(count, dtype=bool)
    if base is None:
        base = _base_primes_to(math.isqrt(hi))
    for p in base[1:]:
        p = int(p)
        pp = p * p
        if pp > hi:
            break
        first = max(pp, (start + p - 1) // p * p)
        if first % 2 == 0:
            first += p
        if first <= hi:
            mask[(first - start) // 2::p] = False
    out.append(start + 2 * np.flatnonzero(mask).astype(np.int64))
    return np.concatenate(out)


@dataclass
class PrimeStream:
    """Primes in [lo, hi], optionally restricted to residues mod ``modulus``.

    Iterating yields Python ints; :meth:`chunks` yields numpy arrays one
    segment at a time, which is what the bulk sums use.  Single consumer.
    """

    lo: int
    hi: int
    residue_filter: tuple[int, frozenset[int]] | None = None
    segment_size: int = SEGMENT_SIZE
    _base: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self._base = _base_primes_to(math.isqrt(self.hi) if self.hi >= 2 else 1)

    def num_segments(self) -> int:
        span = 2 * self.segment_size
        return max(0, (self.hi - self.lo) // span + 1)

    def chunks(self) -> Iterator[np.ndarray]:
        span = 2 * self.segment_size
        a = self.lo
        while a <= self.hi:
            b = min(self.hi, a + span - 1)
            ps = sieve_segment(a, b, self._base)
            if self.residue_filter is not None:
                m, allowed = self.residue_filter
                ps = ps[np.isin(ps % m, np.fromiter(allowed, dtype=np.int64))]
            yield ps
            a = b + 1

    def __iter__(self) -> Iterator[int]:
        for chunk in self.chunks():
            yield from chunk.tolist()


def sieve_segmented(lo: int, hi: int, residue_filter=None,
                    segment_size: int = SEGMENT_SIZE,
                    max_segments: int = MAX_SEGMENTS) -> PrimeStream:
    """Stream the primes of [lo, hi] segment by segment.

    ``residue_filter`` is ``(modulus, allowed_residues)``; memory use is set
    by ``segment_size`` regardless of ``hi``.
    """
    if lo < 2 or hi < lo:
        raise ValueError(f"need 2 <= lo <= hi, got lo={lo}, hi={hi}")
    if hi >= WORD_LIMIT:
        raise OverflowError(f"hi={hi} exceeds the supported word size")
    if (hi - lo) > 2 * segment_size * max_segments:
        raise ValueError("range exceeds the configured segment budget")
    if residue_filter is not None:
        m, allowed = residue_filter
        residue_filter = (int(m), frozenset(int(r) % m for r in allowed))
    return PrimeStream(lo, hi, residue_filter, segment_size)


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin; exact for n < 3.3e24."""
    n = int(n)
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def factorize(n: int) -> Factorization:
    """Trial division by primes up to sqrt(n)."""
    n = int(n)
    if n < 1:
        raise ValueError("factorize needs n >= 1")
    value, factors = n, []
    root = math.isqrt(n)
    if root > 1:
        for p in _base_primes_to(root).tolist():
            if p * p > n:
                break
            if n % p == 0:
                e = 0
                while n % p == 0:
                    n //= p
                    e += 1
                factors.append((p, e))
    if n > 1:
        factors.append((n, 1))
    return Factorization(value, tuple(factors))


def divisors(n: int | Factorization) -> list[int]:
    f = n if isinstance(n, Factorization) else factorize(n)
    divs = [1]
    for p, e in f.factors:
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def num_divisors(n: int) -> int:
    return factorize(n).num_divisors()


def divisor_count_table(n: int) -> np.ndarray:
    """tau(k) for 0 <= k <= n (tau(0) is reported as 0)."""
    tau = np.zeros(n + 1, dtype=np.int64)
    for k in range(1, n + 1):
        tau[k::k] += 1
    return tau


def lcm_all(values: Sequence[int]) -> int:
    return math.lcm(*values) if values else 1


def truncated_decimal(x: Fraction, digits: int = 15) -> str:
    """Decimal expansion of a nonnegative rational truncated after ``digits``
    fractional digits, e.g. ``0.264991512979231``."""
    if x < 0:
        return "-" + truncated_decimal(-x, digits)
    whole, rem = divmod(x.numerator, x.denominator)
    frac = rem * 10**digits // x.denominator
    return f"{whole}.{frac:0{digits}d}"


def format_rational(x: Fraction, digits: int = 15) -> str:
    return f"{x.numerator}/{x.denominator} (≈ {truncated_decimal(x, digits)})"
