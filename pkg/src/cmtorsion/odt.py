"""
Which torsion groups of CM elliptic curves occur over number fields of odd
degree d.

Every candidate group G has an odd *threshold* b(G): G occurs in odd degree
d exactly when b(G) divides d.  For l = 3 (mod 4), n >= 1 and
h = h(Q(sqrt(-l))):

    Z/l^n     needs l = 3 (mod 8),  b = h (l-1)/2 l^delta
    Z/2l^n    l = 3 (mod 8):        b = 3 h (l-1)/2 l^delta   (Z/6 is free)
              l = 7 (mod 8):        b = h (l-1)/2 l^delta

with delta = floor(3n/2) - 1 for l > 3, and 0 resp. floor(3n/2) - 2 for
l = 3 with n = 1 resp. n >= 2.  The trivial group, Z/2, Z/4 and Z/2+Z/2
occur in every odd degree.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable

from .classnum import ClassNumberCache, WATKINS_BOUND, shared_cache
from .numtheory import divisors, factorize, is_prime


class Kind(enum.IntEnum):
    TRIVIAL = 0
    Z2 = 1
    Z4 = 2
    Z2xZ2 = 3
    CYCLIC = 4          # Z/l^n
    TWO_CYCLIC = 5      # Z/2l^n


class NeverRealizableInOddDegree(ValueError):
    pass


class EvenDegreeError(ValueError):
    def __init__(self, d):
        super().__init__(
            f"d={d} is even; the classification covers odd degrees only")


@dataclass(frozen=True)
class TorsionGroup:
    kind: Kind
    ell: int = 0
    n: int = 0

    def __post_init__(self):
        if self.kind in (Kind.CYCLIC, Kind.TWO_CYCLIC):
            if self.ell % 4 != 3 or self.n < 1 or not is_prime(self.ell):
                raise ValueError(f"illegal group parameters l={self.ell}, n={self.n}")

    @classmethod
    def cyclic(cls, ell, n=1):
        return cls(Kind.CYCLIC, ell, n)

    @classmethod
    def two_cyclic(cls, ell, n=1):
        return cls(Kind.TWO_CYCLIC, ell, n)

    def order(self) -> int:
        if self.kind == Kind.CYCLIC:
            return self.ell**self.n
        if self.kind == Kind.TWO_CYCLIC:
            return 2 * self.ell**self.n
        return (1, 2, 4, 4)[self.kind]

    def sort_key(self):
        return (self.order(), int(self.kind), self.ell)

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def tag(self) -> tuple[int, int, int]:
        return (int(self.kind), self.ell, self.n)

    def __str__(self):
        if self.kind == Kind.Z2xZ2:
            return "Z/2⊕Z/2"
        return f"Z/{self.order()}"


UNIVERSAL = (
    TorsionGroup(Kind.TRIVIAL),
    TorsionGroup(Kind.Z2),
    TorsionGroup(Kind.Z4),
    TorsionGroup(Kind.Z2xZ2),
)
OLSON_GROUPS = tuple(sorted(UNIVERSAL + (TorsionGroup.cyclic(3, 1), TorsionGroup.two_cyclic(3, 1))))


@dataclass(frozen=True)
class Threshold:
    group: TorsionGroup
    value: int
    always_realizable: bool


def delta(ell: int, n: int) -> int:
    if ell % 4 != 3:
        raise ValueError(f"l={ell} is not 3 mod 4")
    if n < 1:
        raise ValueError("n must be >= 1")
    if ell > 3:
        return 3 * n // 2 - 1
    return 0 if n == 1 else 3 * n // 2 - 2


def _cache(cache):
    return cache if cache is not None else shared_cache()


def base_value(ell: int, cache: ClassNumberCache | None = None) -> int:
    """g_l = h(-l) (l-1)/2."""
    return _cache(cache).get(ell) * (ell - 1) // 2


def threshold(group: TorsionGroup, cache: ClassNumberCache | None = None) -> Threshold:
    if group.kind in (Kind.TRIVIAL, Kind.Z2, Kind.Z4, Kind.Z2xZ2):
        return Threshold(group, 1, True)
    ell, n = group.ell, group.n
    if (ell, n) == (3, 1):
        return Threshold(group, 1, True)
    mod8 = ell % 8
    if group.kind == Kind.CYCLIC and mod8 == 7:
        raise NeverRealizableInOddDegree(f"Z/{ell}^{n}: l = 7 (mod 8) never occurs in odd degree")
    value = base_value(ell, cache) * ell ** delta(ell, n)
    if group.kind == Kind.TWO_CYCLIC and mod8 == 3:
        value *= 3
    return Threshold(group, value, False)


def _check_odd(d: int) -> None:
    if d < 1:
        raise ValueError(f"degree must be positive, got {d}")
    if d % 2 == 0:
        raise EvenDegreeError(d)


def realizable(group: TorsionGroup, d: int, cache: ClassNumberCache | None = None) -> bool:
    _check_odd(d)
    try:
        t = threshold(group, cache)
    except NeverRealizableInOddDegree:
        return False
    return t.always_realizable or d % t.value == 0


def ladder(ell: int, base: int, limit: int) -> Iterable[tuple[TorsionGroup, int]]:
    """(group, threshold) for the groups attached to l with threshold <= limit.

    ``base`` is g_l; n runs upward until the smallest threshold passes limit.
    """
    mod8 = ell % 8
    n = 1
    while True:
        core = base * ell ** delta(ell, n)
        if core > limit:
            return
        if mod8 == 3:
            yield TorsionGroup.cyclic(ell, n), core
            two = core if (ell, n) == (3, 1) else 3 * core
            if two <= limit:
                yield TorsionGroup.two_cyclic(ell, n), two
        else:
            yield TorsionGroup.two_cyclic(ell, n), core
        n += 1


def ell_bound(x: int) -> int:
    """Largest l that can have g_l <= x.  Past WATKINS_BOUND every class
    number exceeds 100, which caps l far below the trivial 2x + 1."""
    trivial = 2 * x + 1
    if trivial <= WATKINS_BOUND:
        return trivial
    return max(WATKINS_BOUND, 2 * x // 101 + 1)


def groups(d: int, cache: ClassNumberCache | None = None) -> list[TorsionGroup]:
    """All groups in G_CM(d), sorted by (order, kind, l)."""
    _check_odd(d)
    cache = _cache(cache)
    found = list(UNIVERSAL)
    for e in divisors(d):
        ell = 2 * e + 1
        if not is_prime(ell):
            continue
        cofactor = d // e
        if ell > WATKINS_BOUND and cofactor < 101:
            continue
        h = cache.get(ell)
        if cofactor % h:
            continue
        for g, t in ladder(ell, e * h, d):
            if d % t == 0:
                found.append(g)
    return sorted(found)


def t_cm(d: int, cache: ClassNumberCache | None = None) -> int:
    return max(g.order() for g in groups(d, cache))


Fingerprint = tuple[tuple[int, int, int], ...]
_UNIVERSAL_TAGS = frozenset(g.tag() for g in OLSON_GROUPS)


def fingerprint(d: int, cache: ClassNumberCache | None = None) -> Fingerprint:
    return tuple(sorted(g.tag() for g in groups(d, cache) if g.tag() not in _UNIVERSAL_TAGS))


def fingerprint_string(fp: Fingerprint) -> str:
    return ";".join(f"{k}:{l}:{n}" for k, l, n in fp)


def is_olson(d: int, cache: ClassNumberCache | None = None) -> bool:
    return not fingerprint(d, cache)


def equivalent(d1: int, d2: int, cache: ClassNumberCache | None = None) -> bool:
    return fingerprint(d1, cache) == fingerprint(d2, cache)


def class_representative(d: int, cache: ClassNumberCache | None = None) -> int:
    """Smallest degree with the same group list: the lcm of the thresholds
    dividing d (every equivalent degree is a multiple of it)."""
    return math.lcm(1, *(threshold(g, cache).value for g in groups(d, cache)))


@dataclass
class GeneratorSet:
    elements: list[tuple[int, tuple[int, ...]]]
    limit: int

    def values(self) -> list[int]:
        return [v for v, _ in self.elements]


def olson_generators(limit: int, cache: ClassNumberCache | None = None) -> GeneratorSet:
    """Divisibility-minimal members of {2} u {g_l : 3 < l <= limit}.

    Primes are visited in increasing order and g_l is kept unless an earlier
    kept element divides it.
    """
    cache = _cache(cache)
    if cache.covered_limit < limit:
        raise ValueError(f"class-number cache covers {cache.covered_limit} < {limit}")
    kept: dict[int, list[int]] = {2: []}
    for ell in cache.ells():
        if ell <= 3 or ell > limit:
            continue
        g = cache[ell] * (ell - 1) // 2
        if g in kept:
            kept[g].append(ell)
        elif all(g % e for e in kept):
            kept[g] = [ell]
    return GeneratorSet([(v, tuple(w)) for v, w in sorted(kept.items())], limit)


def r_count(d: int, cache: ClassNumberCache | None = None) -> int:
    """Number of divisors e of d with e = h(-l) (l-1)/2 for some prime l = 3 (mod 4).

    A witness l for e has (l-1)/2 | e, so only l = 2m + 1 with m | e are tried.
    """
    _check_odd(d)
    cache = _cache(cache)
    divs = divisors(d)
    hits = 0
    for e in divs:
        for m in divisors(e):
            ell = 2 * m + 1
            if not is_prime(ell):
                continue
            if ell > WATKINS_BOUND and e // m < 101:
                continue
            if cache.get(ell) * m == e:
                hits += 1
                break
    return hits


def tau_cap(d: int) -> int:
    """6 + 2 tau(d) (floor(log_3 d) + 1), the finite-range group-count cap."""
    k = 0
    while 3 ** (k + 1) <= d:
        k += 1
    return 6 + 2 * factorize(d).num_divisors() * (k + 1)


@dataclass
class ThresholdFamily:
    """Non-universal thresholds up to ``limit``: value -> groups with it."""

    limit: int
    by_value: dict[int, list[TorsionGroup]] = field(default_factory=dict)

    def values(self) -> list[int]:
        return sorted(self.by_value)


def threshold_family(limit: int, cache: ClassNumberCache | None = None) -> ThresholdFamily:
    top = ell_bound(limit)
    cache = _cache(cache) if cache is not None else shared_cache(top)
    if cache.covered_limit < top:
        cache.extend(top)
    fam = ThresholdFamily(limit)
    for ell in cache.ells():
        if ell > top:
            break
        base = cache[ell] * (ell - 1) // 2
        if base > limit:
            continue
        for g, t in ladder(ell, base, limit):
            if t > 1:
                fam.by_value.setdefault(t, []).append(g)
    return fam
