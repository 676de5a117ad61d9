"""
Class numbers of Q(sqrt(-l)) for primes l = 3 (mod 4), counted as reduced
binary quadratic forms of discriminant -l.

Two routes produce the same counts:

* :func:`class_number` walks a = 1 .. sqrt(l/3) for a single prime;
* :func:`batch_class_numbers` fixes (a, b) and strides through every n with
  b^2 + n = 0 (mod 4a), which counts forms for all n = 3 (mod 4) in a range
  at once.  This is what fills the persistent cache.

Nothing here depends on GRH or on analytic formulas.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .numtheory import is_prime, sieve_segment

CLASSNUM_CEILING = 10**7
LONG_RUN_CEILING = 10**9     # roughly 6 s * (limit / 1e7)^1.5 and 100 bytes per entry
WATKINS_BOUND = 2383747      # every |D| with h(D) <= 100 satisfies |D| <= this
BLOCK = 1 << 16


class ClassNumberError(ValueError):
    pass


def _check_ell(ell: int) -> None:
    if ell % 4 != 3:
        raise ClassNumberError(f"{ell} is not 3 mod 4")
    if not is_prime(ell):
        raise ClassNumberError(f"{ell} is not prime")


def class_number(ell: int) -> int:
    """h(-ell) by enumerating reduced forms (a, b, c), b^2 - 4ac = -ell."""
    _check_ell(ell)
    if ell == 3:
        return 1
    if ell > CLASSNUM_CEILING:
        raise ClassNumberError(
            f"ell={ell} is above the form-counting ceiling {CLASSNUM_CEILING}")
    amax = math.isqrt(ell // 3)
    # every (a, b) with b odd in [1, a]; b must be odd since -ell = 1 mod 4
    a_vals = np.arange(1, amax + 1, dtype=np.int64)
    per_a = (a_vals + 1) // 2
    a = np.repeat(a_vals, per_a)
    b = 2 * (np.arange(a.size) - np.repeat(np.cumsum(per_a) - per_a, per_a)) + 1
    num = b * b + ell
    hit = num % (4 * a) == 0
    a, b, c = a[hit], b[hit], num[hit] // (4 * a[hit])
    ok = c >= a
    a, b, c = a[ok], b[ok], c[ok]
    # (a, +-b, c) are distinct unless b == a or a == c
    h = int(np.where((b == a) | (a == c), 1, 2).sum())
    _genus_check(ell, h)
    return h


def _genus_check(ell: int, h: int) -> None:
    if h % 2 == 0:
        raise ArithmeticError(f"even class number {h} for prime {ell}; counting is broken")


def form_counts(n_lo: int, n_hi: int) -> np.ndarray:
    """Reduced-form counts for n = n_lo, n_lo + 4, ..., n <= n_hi.

    ``n_lo`` must be 3 mod 4.  Entry k belongs to n = n_lo + 4k.  Counts are
    class numbers only at fundamental discriminants; callers read off primes.
    """
    if n_lo % 4 != 3:
        raise ValueError("n_lo must be 3 mod 4")
    size = (n_hi - n_lo) // 4 + 1
    counts = np.zeros(max(size, 0), dtype=np.int32)
    if size <= 0:
        return counts
    n_last = n_lo + 4 * (size - 1)
    for a in range(1, math.isqrt(n_last // 3) + 1):
        m = 4 * a
        for b in range(1, a + 1, 2):
            floor_n = 4 * a * a - b * b          # c >= a
            r = (-b * b) % m
            first = max(n_lo, floor_n)
            first += (r - first) % m
            if first > n_last:
                continue
            k0 = (first - n_lo) // 4
            counts[k0::a] += 1 if b == a else 2
            if first == floor_n and b < a:
                counts[k0] -= 1
    return counts


@dataclass
class ClassNumberCache:
    """h(-ell) for every prime ell = 3 (mod 4) up to ``covered_limit``."""

    entries: dict[int, int] = field(default_factory=dict)
    covered_limit: int = 0

    def __contains__(self, ell):
        return ell in self.entries

    def __getitem__(self, ell: int) -> int:
        return self.entries[ell]

    def __len__(self):
        return len(self.entries)

    def get(self, ell: int) -> int:
        if ell in self.entries:
            return self.entries[ell]
        if ell <= self.covered_limit:
            _check_ell(ell)
            raise KeyError(ell)
        return class_number(ell)

    def ells(self) -> list[int]:
        return sorted(self.entries)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        ells = np.array(self.ells(), dtype=np.int64)
        return ells, np.array([self.entries[e] for e in ells.tolist()], dtype=np.int64)

    def extend(self, limit: int, long_run: bool = False) -> "ClassNumberCache":
        """Fill entries up to ``limit``; existing entries are never touched.

        Limits above CLASSNUM_CEILING need ``long_run``.
        """
        if limit <= self.covered_limit:
            return self
        ceiling = LONG_RUN_CEILING if long_run else CLASSNUM_CEILING
        if limit > ceiling:
            raise ClassNumberError(
                f"limit {limit} above the form-counting ceiling {ceiling}"
                + ("" if long_run else " (long-run mode raises it)"))
        lo = self.covered_limit + 1
        if lo <= 3 <= limit:
            self.entries[3] = 1
        n_lo = max(7, lo + (3 - lo) % 4)
        # blocks keep the counts array small for large extensions
        step = 4 * BLOCK * 16
        while n_lo <= limit:
            n_hi = min(limit, n_lo + step - 4)
            counts = form_counts(n_lo, n_hi)
            primes = sieve_segment(n_lo, n_hi)
            primes = primes[primes % 4 == 3]
            hs = counts[(primes - n_lo) // 4]
            for ell, h in zip(primes.tolist(), hs.tolist()):
                _genus_check(ell, h)
                self.entries[ell] = h
            n_lo = n_hi + 4
        self.covered_limit = limit
        return self

    def save(self, path: str | os.PathLike) -> None:
        lines = [f"#covered_limit={self.covered_limit}"]
        lines += [f"{ell},{self.entries[ell]}" for ell in self.ells()]
        Path(path).write_bytes(("\n".join(lines) + "\n").encode("ascii"))

    @classmethod
    def load(cls, path: str | os.PathLike) -> "ClassNumberCache":
        text = Path(path).read_text(encoding="ascii").splitlines()
        if not text or not text[0].startswith("#covered_limit="):
            raise ValueError(f"{path}: missing covered_limit header")
        cache = cls(covered_limit=int(text[0].split("=", 1)[1]))
        prev = 0
        for line in text[1:]:
            ell, h = (int(x) for x in line.split(","))
            if ell <= prev:
                raise ValueError(f"{path}: entries not ascending at {ell}")
            cache.entries[ell] = h
            prev = ell
        return cache


def batch_class_numbers(limit: int, cache: ClassNumberCache | None = None) -> ClassNumberCache:
    if limit < 3:
        raise ValueError("limit must be >= 3")
    return (cache if cache is not None else ClassNumberCache()).extend(limit)


_shared = ClassNumberCache()


def shared_cache(limit: int = 0, long_run: bool = False) -> ClassNumberCache:
    """Process-wide cache, extended on demand.  Optional on-disk seed via
    the ``CMTORSION_CLASSNUM_CACHE`` environment variable."""
    global _shared
    if not _shared.entries:
        path = os.environ.get("CMTORSION_CLASSNUM_CACHE")
        if path and Path(path).exists():
            _shared = ClassNumberCache.load(path)
    if limit > _shared.covered_limit:
        _shared.extend(limit, long_run)
    return _shared


def class_number_floor(ell: int) -> int:
    """A lower bound for h(-ell) usable without computing it: 101 past the
    largest discriminant of class number <= 100, otherwise 1."""
    return 101 if ell > WATKINS_BOUND else 1


@dataclass(frozen=True)
class LValue:
    ell: int
    value: float


def l_value(ell: int, cache: ClassNumberCache | None = None) -> LValue:
    """L(1, (-ell/.)) = pi h / sqrt(ell) from the class number formula."""
    if ell == 3:
        raise ClassNumberError("ell = 3 has extra roots of unity (w = 6)")
    h = (cache or shared_cache()).get(ell)
    return LValue(ell, math.pi * h / math.sqrt(ell))
