"""
Exact densities of sets of multiples M(H) = {n : h | n for some h in H}.

The complement density 1 - d(M(H)) is what the recursion carries around
(called the *avoidance* density here).  Three reductions keep it cheap:

* dominance pruning: drop h whenever a proper divisor of h is in H;
* component splitting: if H splits into blocks sharing no prime factor,
  avoidance is multiplicative over the blocks (an element coprime to all
  others is a block of size one and contributes 1 - 1/h);
* prime splitting: for a prime p,
      d(M(H)) = (1/p) d(M(H_(p))) + (1 - 1/p) d(M(H^(p)))
  with H_(p) = {h / gcd(h, p)} and H^(p) = {h : p does not divide h}.

Small blocks are finished by inclusion-exclusion, accumulated as a map
lcm -> signed coefficient so that equal lcms merge early.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

from .numtheory import factorize, is_prime, lcm_all

IE_CAP = 8


class MultiplesSet(frozenset):
    """A finite set of positive integers, read as the set of its multiples."""

    def __new__(cls, elements: Iterable[int] = ()):
        elements = [int(e) for e in elements]
        if any(e <= 0 for e in elements):
            raise ValueError("elements must be positive integers")
        return super().__new__(cls, elements)

    def pruned(self) -> "MultiplesSet":
        return MultiplesSet(prune(self))

    def scaled(self, p: int) -> "MultiplesSet":
        return MultiplesSet(h // math.gcd(h, p) for h in self)

    def sieved(self, p: int) -> "MultiplesSet":
        return MultiplesSet(h for h in self if h % p)

    def __repr__(self):
        return f"MultiplesSet({sorted(self)})"


def prune(elements: Iterable[int]) -> list[int]:
    """Remove every element that is a multiple of a smaller kept one."""
    kept: list[int] = []
    for h in sorted(set(elements)):
        if all(h % k for k in kept):
            kept.append(h)
    return kept


def factor_out_relprime(H: Iterable[int]) -> tuple[list[int], list[int]]:
    """Split H into elements coprime to every other element, and the rest."""
    H = sorted(set(H))
    rel, rest = [], []
    for i, h in enumerate(H):
        if all(math.gcd(h, k) == 1 for j, k in enumerate(H) if j != i):
            rel.append(h)
        else:
            rest.append(h)
    return rel, rest


def p_split(H: Iterable[int], p: int) -> tuple[MultiplesSet, MultiplesSet]:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    H = MultiplesSet(H)
    return H.scaled(p), H.sieved(p)


def components(H: Iterable[int]) -> list[list[int]]:
    """Blocks of H under the relation 'shares a prime factor' (transitively)."""
    H = sorted(set(H))
    parent = list(range(len(H)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner: dict[int, int] = {}
    for i, h in enumerate(H):
        for p in factorize(h).primes:
            if p in owner:
                a, b = find(i), find(owner[p])
                if a != b:
                    parent[a] = b
            else:
                owner[p] = i
    blocks: dict[int, list[int]] = {}
    for i, h in enumerate(H):
        blocks.setdefault(find(i), []).append(h)
    return sorted(blocks.values())


def inclusion_exclusion(H: Iterable[int]) -> Fraction:
    """d(M(H)) by inclusion-exclusion over all nonempty subsets.

    Coefficients of equal lcm are merged as the subsets grow, which keeps
    the table far smaller than 2^|H| when the elements share factors.
    """
    terms: dict[int, int] = {1: -1}
    for h in H:
        new = dict(terms)
        for m, c in terms.items():
            key = math.lcm(m, h)
            new[key] = new.get(key, 0) - c
        terms = {m: c for m, c in new.items() if c}
    terms.pop(1, None)
    total = Fraction(0)
    for m, c in terms.items():
        total += Fraction(c, m)
    return total


def split_prime(H: Iterable[int]) -> int:
    """Prime dividing the most elements; ties go to the smaller prime."""
    counts = Counter(p for h in H for p in factorize(h).primes)
    return min(counts, key=lambda p: (-counts[p], p))


@lru_cache(maxsize=None)
def _avoid(H: frozenset, cap: int) -> Fraction:
    if not H:
        return Fraction(1)
    if 1 in H:
        return Fraction(0)
    H = prune(H)
    result = Fraction(1)
    for block in components(H):
        if len(block) == 1:
            result *= 1 - Fraction(1, block[0])
        elif len(block) <= cap:
            result *= 1 - inclusion_exclusion(block)
        else:
            scaled, sieved = p_split(block, p := split_prime(block))
            result *= (Fraction(1, p) * _avoid(frozenset(scaled), cap)
                       + Fraction(p - 1, p) * _avoid(frozenset(sieved), cap))
        if not result:
            break
    return result


def avoidance(H: Iterable[int], cap: int = IE_CAP) -> Fraction:
    """1 - d(M(H))."""
    return _avoid(frozenset(MultiplesSet(H)), cap)


def density_of_multiples(H: Iterable[int], universe: str = "all", cap: int = IE_CAP) -> Fraction:
    """Exact d(M(H)).

    ``universe="odd"`` measures odd multiples only (still as a density among
    all integers), so it never exceeds 1/2.
    """
    H = MultiplesSet(H)
    if universe == "all":
        return 1 - avoidance(H, cap)
    if universe == "odd":
        # even elements never divide an odd n
        return Fraction(1, 2) * (1 - avoidance([h for h in H if h % 2], cap))
    raise ValueError(f"unknown universe {universe!r}")


@dataclass(frozen=True)
class DensityInterval:
    lower: Fraction
    upper: Fraction

    def __post_init__(self):
        if not (0 <= self.lower <= self.upper <= 1):
            raise ValueError(f"bad interval [{self.lower}, {self.upper}]")

    def contains(self, x) -> bool:
        return self.lower <= x <= self.upper

    def inside(self, lo, hi) -> bool:
        """Open containment: lo < lower and upper < hi."""
        return lo < self.lower and self.upper < hi


@dataclass
class OlsonChain:
    """The upper bound 1 - d(M(H)) and the values met on the way down."""

    H: list[int]
    H_rel: list[int]
    H1: list[int]             # H' = H minus H_rel
    split_prime: int
    H1_sieved: list[int]      # H'^(p)
    H1_sieved_density: Fraction
    H2: list[int]             # H'' = H'_(p)
    H2_rel: list[int]
    H3: list[int]             # H'' minus H''_rel, then pruned
    H3_avoid: Fraction        # 1 - d(M(H'''))
    H2_avoid: Fraction        # 1 - d(M(H''))
    H1_density: Fraction      # d(M(H'))
    value: Fraction           # 1 - d(M(H))


def olson_chain(H: Iterable[int], p: int = 11) -> OlsonChain:
    """Evaluate 1 - d(M(H)) through one relatively-prime factor-out, a split
    at p, and a second factor-out; the two leaves go to :func:`avoidance`."""
    H = prune(H)
    rel, rest = factor_out_relprime(H)
    scaled, sieved = p_split(rest, p)
    sieved_d = 1 - avoidance(sieved)
    h2 = sorted(scaled)
    # factor out before pruning: 83 stays behind with its multiple 4067
    rel2, rest2 = factor_out_relprime(h2)
    h3 = prune(rest2)
    h3_avoid = avoidance(h3)
    h2_avoid = h3_avoid * math.prod((1 - Fraction(1, h) for h in rel2), start=Fraction(1))
    h1_density = Fraction(1, p) * (1 - h2_avoid) + Fraction(p - 1, p) * sieved_d
    value = (1 - h1_density) * math.prod((1 - Fraction(1, h) for h in rel), start=Fraction(1))
    return OlsonChain(H, rel, rest, p, sorted(sieved), sieved_d, h2, rel2, h3,
                      h3_avoid, h2_avoid, h1_density, value)


def olson_density_upper(limit: int = 10**5, take: int = 38, cache=None) -> Fraction:
    """1 - d(M(H)) for H = the first ``take`` Olson generators up to ``limit``."""
    from .odt import olson_generators
    from .classnum import shared_cache
    cache = cache if cache is not None else shared_cache(limit)
    gens = olson_generators(limit, cache).values()
    if take > len(gens):
        raise ValueError(f"only {len(gens)} generators up to {limit}")
    return avoidance(gens[:take])


@dataclass
class StratumResult:
    """Certified density of the odd n equivalent to ``d``."""

    d: int
    z: int
    L: int                      # lcm of the thresholds dividing d
    divisors: list[int]         # thresholds <= z dividing d (1 excluded)
    forbidden: list[int]        # pruned, already divided by gcd with L
    interval: DensityInterval
    tail_bound: float | None    # relative mass S the tail may remove
    inconsistent: bool = False


def stratum_density(d: int, z: int, tail: bool = True, explicit_limit: int | None = None,
                    cache=None, long_run: bool = False, progress: bool = False) -> StratumResult:
    """Density interval for {odd n : n has the same groups as d}.

    The upper end is the exact density of the truncated stratum
    A_z = {odd n : L | n and no threshold g <= z with g not dividing d divides n}.
    The lower end is upper * (1 - S) with S from :func:`bounds.stratum_tail`;
    without ``tail`` the lower end is 0.
    """
    from . import bounds
    from .odt import groups, threshold, threshold_family
    from .classnum import shared_cache

    cache = cache if cache is not None else shared_cache()
    own = [threshold(g, cache).value for g in groups(d, cache)]
    if max(own) > z:
        raise ValueError(f"z={z} is below the largest threshold {max(own)} dividing {d}")
    values = threshold_family(z, cache).values()
    divs = [t for t in values if d % t == 0]
    L = lcm_all(divs)
    scaled = [t // math.gcd(t, L) for t in values if d % t]
    if 1 in scaled:
        zero = DensityInterval(Fraction(0), Fraction(0))
        return StratumResult(d, z, L, divs, [], zero, None, inconsistent=True)
    forbidden = prune(scaled)
    upper = Fraction(1, 2 * L) * avoidance(forbidden)
    if not tail:
        return StratumResult(d, z, L, divs, forbidden, DensityInterval(Fraction(0), upper), None)
    limit = explicit_limit if explicit_limit is not None else bounds.DEFAULT_EXPLICIT
    est = bounds.stratum_tail(z, L, forbidden, limit, cache, long_run, progress)
    S = Fraction(est.total_upper)
    lower = max(Fraction(0), upper * (1 - S))
    return StratumResult(d, z, L, divs, forbidden, DensityInterval(lower, upper), est.total_upper)
