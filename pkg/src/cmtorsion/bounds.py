"""
Reciprocal sums over g_l = h(-l) (l - 1)/2 and certified tails for them.

The sums split into three ranges of l:

1. l up to an explicit limit, where every class number is computed;
2. up to 2.8e9, where only h > 100 is used (true for every prime
   discriminant past 2383747);
3. beyond, where an effective Siegel-type bound gives

       h > 0.041 sqrt(l) / log l        for l <= 1e115,
       h > 3e4 l^(1/2 - eps0)           for l > 1e115, eps0 = 0.999 / log 1e6,

   with at most one exceptional l (which still has h > 100).  The count of
   admissible primes is bounded by Brun-Titchmarsh,
   Pi(t) <= 2 k t / (phi(q) log(t/q)) for k admissible classes mod q, and
   the sums become Stieltjes integrals evaluated by adaptive Simpson.

Finite sums are carried as exact rationals.  Long ranges use fixed point:
floor and ceiling of SCALE/denominator summed as integers, which brackets
the true value by two exact rationals.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable

import mpmath
import numpy as np

from .classnum import (CLASSNUM_CEILING, LONG_RUN_CEILING, WATKINS_BOUND, ClassNumberCache,
                       ClassNumberError, shared_cache)
from .numtheory import factorize, sieve_segmented, SEGMENT_SIZE

SCALE = 10**18
WATKINS_H = 100                 # h > 100 past WATKINS_BOUND
SIEGEL_START = 2_800_000_000    # start of the analytic range
SIEGEL_SPLIT = mpmath.mpf(10) ** 115
C_SMALL = 2 / 0.041             # 1 / (0.041 / 2)
C_LARGE = 2 / 3e4
WHEEL = 4 * 3 * 5 * 7 * 11 * 13  # residue table modulus for the h > 100 range

mpmath.mp.prec = 96
EPS0 = mpmath.mpf("0.999") / mpmath.log(10**6)


def _progress(k: int, total: int, enabled: bool) -> None:
    if enabled:
        print(f"segment {k}/{total}", file=sys.stderr, flush=True)


@dataclass(frozen=True)
class SumBound:
    """Exact rationals lower <= true sum <= upper, over ``terms`` primes."""

    lower: Fraction
    upper: Fraction
    terms: int

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    def __float__(self):
        return float(self.upper)


def _fixed_point(denoms: np.ndarray, weight: int = 1) -> tuple[int, int]:
    """Sum of floor and ceiling of weight * SCALE / denom as Python ints."""
    if denoms.size == 0:
        return 0, 0
    q, r = np.divmod(np.int64(SCALE), denoms)
    lo = sum(q.tolist())
    hi = lo + int(np.count_nonzero(r))
    return weight * lo, weight * hi


def _exact_sum(denoms: Iterable[int]) -> Fraction:
    # one common denominator keeps this linear in the number of terms
    denoms = list(denoms)
    if not denoms:
        return Fraction(0)
    common = math.lcm(*denoms)
    return Fraction(sum(common // d for d in denoms), common)


# ---------------------------------------------------------------------------
# range 1: explicit class numbers

def _class_arrays(cutoff: int, cache: ClassNumberCache | None, long_run: bool):
    if cutoff > CLASSNUM_CEILING and not long_run:
        raise ClassNumberError(
            f"cutoff {cutoff} above {CLASSNUM_CEILING}; pass long_run=True to go further")
    if cutoff > LONG_RUN_CEILING:
        raise ClassNumberError(f"cutoff {cutoff} above the long-run ceiling {LONG_RUN_CEILING}")
    if cache is None:
        cache = shared_cache()
    if cache.covered_limit < cutoff:
        cache.extend(cutoff, long_run=long_run)
    ells, hs = cache.arrays()
    keep = (ells > 3) & (ells <= cutoff)
    return ells[keep], hs[keep]


def generator_values(cutoff: int, cache=None, long_run: bool = False):
    """(l, g_l) arrays for 3 < l <= cutoff."""
    ells, hs = _class_arrays(cutoff, cache, long_run)
    return ells, hs * ((ells - 1) // 2)


def sum1_partial(cutoff: int, cache: ClassNumberCache | None = None,
                 long_run: bool = False, exact: bool | None = None) -> SumBound:
    """Sum of 1/g_l over 3 < l <= cutoff with gcd(g_l, 30) = 1.

    Exact for cutoff <= 10^5 (or when ``exact`` is set); otherwise a pair of
    exact rationals within terms / 10^18 of each other.
    """
    if cutoff <= 3:
        return SumBound(Fraction(0), Fraction(0), 0)
    _, g = generator_values(cutoff, cache, long_run)
    g = g[np.gcd(g, 30) == 1]
    if exact or (exact is None and cutoff <= 10**5):
        s = _exact_sum(g.tolist())
        return SumBound(s, s, int(g.size))
    lo, hi = _fixed_point(g)
    return SumBound(Fraction(lo, SCALE), Fraction(hi, SCALE), int(g.size))


# ---------------------------------------------------------------------------
# range 2: h > 100

def _admissible(modulus: int, avoid_one_mod: Iterable[int]) -> list[int]:
    """Residues r mod ``modulus`` with r = 3 (mod 4), r coprime to the
    modulus and r != 1 (mod p) for the listed primes p."""
    avoid = tuple(avoid_one_mod)
    return [r for r in range(modulus)
            if r % 4 == 3 and math.gcd(r, modulus) == 1 and all(r % p != 1 for p in avoid)]


def sum2(lo: int = 10**9, hi: int = SIEGEL_START, exact: bool = False,
         segment_size: int = SEGMENT_SIZE, progress: bool = False) -> SumBound:
    """Sum of 1/(100 (l-1)/2) over primes lo < l <= hi with gcd((l-1)/2, 30) = 1."""
    if hi <= lo:
        return SumBound(Fraction(0), Fraction(0), 0)
    allowed = _admissible(60, (3, 5))
    stream = sieve_segmented(lo + 1, hi, (60, allowed), segment_size=segment_size)
    total = stream.num_segments()
    lo_sum = hi_sum = terms = 0
    denoms_all: list[int] = []
    for k, ps in enumerate(stream.chunks(), 1):
        d = WATKINS_H // 2 * (ps - 1)
        terms += int(d.size)
        if exact:
            denoms_all.extend(d.tolist())
        else:
            a, b = _fixed_point(d)
            lo_sum += a
            hi_sum += b
        _progress(k, total, progress)
    if exact:
        s = _exact_sum(denoms_all)
        return SumBound(s, s, terms)
    return SumBound(Fraction(lo_sum, SCALE), Fraction(hi_sum, SCALE), terms)


@dataclass(frozen=True)
class ResidueTable:
    """Ceiling sums of SCALE/(l - 1) over primes lo < l <= hi, l = 3 (mod 4),
    split by l mod WHEEL.  Any union of classes then costs nothing."""

    lo: int
    hi: int
    sums: np.ndarray        # int64, length WHEEL

    def upper(self, residues: Iterable[int]) -> int:
        return int(sum(int(self.sums[r]) for r in residues))


@lru_cache(maxsize=8)
def residue_table(lo: int, hi: int = SIEGEL_START, progress: bool = False) -> ResidueTable:
    sums = np.zeros(WHEEL, dtype=np.int64)
    if hi > lo:
        stream = sieve_segmented(lo + 1, hi, segment_size=SEGMENT_SIZE)
        total = stream.num_segments()
        for k, ps in enumerate(stream.chunks(), 1):
            ps = ps[ps % 4 == 3]
            q, r = np.divmod(np.int64(SCALE), ps - 1)
            c = q + (r != 0)
            res = ps % WHEEL
            order = np.argsort(res, kind="stable")
            res, c = res[order], c[order]
            starts = np.flatnonzero(np.r_[True, res[1:] != res[:-1]])
            if starts.size:
                sums[res[starts]] += np.add.reduceat(c, starts)
            _progress(k, total, progress)
    return ResidueTable(lo, hi, sums)


# ---------------------------------------------------------------------------
# range 3: Brun-Titchmarsh and quadrature

class QuadratureError(ArithmeticError):
    pass


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-12, max_depth: int = 60) -> float:
    """Adaptive Simpson with Richardson correction."""

    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6 * (fa + 4 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = (a + b) / 2
        lm, rm = (a + m) / 2, (m + b) / 2
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        err = left + right - whole
        # halving tol must not push it under the rounding noise of the estimate
        if abs(err) <= 15 * max(tol, 1e-15 * abs(left + right)):
            return left + right + err / 15
        if depth >= max_depth:
            raise QuadratureError(f"no convergence on [{a}, {b}]")
        return (recurse(a, m, fa, flm, fm, left, tol / 2, depth + 1)
                + recurse(m, b, fm, frm, fb, right, tol / 2, depth + 1))

    fa, fb, fm = f(a), f(b), f((a + b) / 2)
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 0)


def _ratio(u: float) -> float:
    """t / (t - 1) at t = e^u, without overflow."""
    return -1.0 / math.expm1(-u)


def small_integrand(u: float, coef: float, log_q: float) -> float:
    """Pi(t) (-f1'(t)) dt/du with f1 = log t / ((t - 1) sqrt t), t = e^u,
    and Pi(t) replaced by coef t / log(t/q)."""
    r = _ratio(u)
    return coef / (u - log_q) * math.exp(-u / 2) * (u * (r * r + r / 2) - r)


def large_integrand(u: float, coef: float, log_q: float) -> float:
    """The same for f2 = 1 / ((t - 1) t^beta), beta = 1/2 - eps0."""
    beta = 0.5 - float(EPS0)
    r = _ratio(u)
    return coef / (u - log_q) * math.exp(-beta * u) * (r * r + beta * r)


@dataclass(frozen=True)
class Sum3:
    exceptional: float
    main: float
    small_range: float
    large_range: float


def _bt_coef(q: int, k: int) -> float:
    phi = q
    for p in factorize(q).primes:
        phi = phi // p * (p - 1)
    return 2 * k / phi


def sum3_tail(q: int = 60, k: int = 3, start: int = SIEGEL_START,
              tol: float = 1e-13) -> Sum3:
    """Bound on the sum over l > start of 1/g_l restricted to k classes mod q.

    ``main`` integrates the small-l regime up to 1e115 and the large-l regime
    beyond; the large-l integral is truncated 2000 units of log t later with
    a geometric remainder bound (the integrand times e^(beta u) decreases).
    """
    coef = _bt_coef(q, k)
    log_q = math.log(q)
    u0 = math.log(start)
    u1 = float(mpmath.log(SIEGEL_SPLIT))
    _check_boundary()
    small = C_SMALL * adaptive_simpson(lambda u: small_integrand(u, coef, log_q), u0, u1, tol)
    u2 = u1 + 2000.0
    beta = 0.5 - float(EPS0)
    large = adaptive_simpson(lambda u: large_integrand(u, coef, log_q), u1, u2, tol * 1e-40)
    large += large_integrand(u2, coef, log_q) / beta
    large *= C_LARGE
    exceptional = 1 / ((start - 1) / 2 * WATKINS_H)
    return Sum3(exceptional, small + large, small, large)


def _check_boundary() -> None:
    """Splitting the Stieltjes integral at 1e115 leaves the boundary term
    (C_SMALL f1(B) - C_LARGE f2(B)) Pi(B); it must not be positive."""
    B = SIEGEL_SPLIT
    f1 = mpmath.log(B) / ((B - 1) * mpmath.sqrt(B))
    f2 = 1 / ((B - 1) * B ** (mpmath.mpf(1) / 2 - EPS0))
    if C_SMALL * f1 > C_LARGE * f2:
        raise QuadratureError("boundary term at 1e115 is positive")


def aggregate_bound(sum1: float = 0.00788, s2: float | None = None,
                    s3: Sum3 | None = None) -> float:
    """(4/15)(Sigma_1 + Sigma_2 + Sigma_3), Sigma_1 taken as given."""
    s2 = float(sum2().upper) if s2 is None else s2
    s3 = sum3_tail() if s3 is None else s3
    return 4 / 15 * (sum1 + s2 + s3.exceptional + s3.main)


# ---------------------------------------------------------------------------
# certified tails

@dataclass(frozen=True)
class TailEstimate:
    """Pieces of a tail bound; ``total_upper`` is their sum rounded upward."""

    z: int
    explicit_part: Fraction = field(repr=False)
    watkins_part: float
    siegel_part: float
    total_upper: float
    explicit_limit: int = 0


DEFAULT_EXPLICIT = 10**7


def _round_up(explicit: Fraction, *parts: float) -> float:
    # the float parts are already upper bounds; pad the sum against rounding
    return (float(explicit) + sum(parts)) * (1 + 1e-12)


LADDER_CAP = 10**40


def _ladder_weights(ell: int, base: int, z: int, L: int, forbidden: list[int]) -> Fraction:
    """Sum of 1/t' over the thresholds t > z attached to l (with g_l = base),
    where t' = t / gcd(t, L), skipping t' divisible by a forbidden element.

    Rungs are walked up to LADDER_CAP; everything above it is charged 4 L / cap
    (cores grow by a factor >= 3 per step and each core has at most one
    companion three times larger).
    """
    from .odt import ladder
    total = Fraction(0)
    for _, t in ladder(ell, base, LADDER_CAP):
        if t <= z:
            continue
        tp = t // math.gcd(t, L)
        if all(tp % f for f in forbidden):
            total += Fraction(1, tp)
    return total + Fraction(4 * L, LADDER_CAP)


def _explicit_tail(z: int, L: int, forbidden: list[int], limit: int,
                   cache: ClassNumberCache | None, long_run: bool,
                   full_ladder: bool) -> Fraction:
    """Contribution of primes l <= limit.

    With ``full_ladder`` every threshold above z is summed (weights 1/t);
    otherwise one union-bound weight per prime whose g_l exceeds z suffices.
    """
    ells, g = generator_values(limit, cache, long_run)
    total = Fraction(0)
    small = g <= z
    pairs = [(3, 1)] + list(zip(ells[small].tolist(), g[small].tolist()))
    for ell, base in pairs:
        gp = base // math.gcd(base, L)
        # thresholds of l are multiples of g_l, so t' is a multiple of g'
        if any(gp % f == 0 for f in forbidden):
            continue
        total += _ladder_weights(ell, base, z, L, forbidden)
    big_e, big_g = ells[~small], g[~small]
    if big_g.size == 0:
        return total
    if full_ladder:
        # ladder of l sums to (1/g_l)(1 + [l = 3 mod 8]/3) sum_n l^-delta,
        # and sum_n l^-delta <= 1 + 2/l^2
        _, hi = _fixed_point(big_g)
        _, hi3 = _fixed_point(big_g[big_e % 8 == 3])
        l0 = int(big_e.min())
        return total + Fraction(3 * hi + hi3, 3 * SCALE) * (1 + Fraction(2, l0 * l0))
    gp = big_g // np.gcd(big_g, L)
    ok = np.ones(gp.size, dtype=bool)
    for f in forbidden:
        ok &= gp % f != 0
    _, hi = _fixed_point(gp[ok])
    return total + Fraction(hi, SCALE)


def _analytic_tail(L: int, avoid_primes: list[int], explicit_limit: int,
                   multiplier: float, progress: bool) -> tuple[float, float, float]:
    """(watkins, siegel, exceptional) parts for l > explicit_limit.

    Every term is at most L / g_l <= 2 L / (h (l - 1)); l is restricted to
    l != 1 (mod p) for the primes p in ``avoid_primes`` (all <= 13).
    """
    if explicit_limit < WATKINS_BOUND:
        raise ValueError(f"explicit limit must be >= {WATKINS_BOUND}")
    table = residue_table(explicit_limit, SIEGEL_START, progress)
    residues = _admissible(WHEEL, avoid_primes)
    watkins = multiplier * L * 2 * table.upper(residues) / (WATKINS_H * SCALE)
    q = 4 * math.prod(avoid_primes)
    k = len(_admissible(q, avoid_primes))
    s3 = sum3_tail(q, k)
    return watkins, multiplier * L * s3.main, multiplier * L * s3.exceptional


def certified_tail(z: int, explicit_limit: int = DEFAULT_EXPLICIT,
                   cache: ClassNumberCache | None = None, long_run: bool = False,
                   progress: bool = False) -> TailEstimate:
    """Upper bound on the sum of 1/g over every threshold g > z.

    Primes up to ``explicit_limit`` contribute their exact ladders; beyond,
    each prime's ladder is charged 8/3 times 1/g_l.
    """
    if z < 1000:
        raise ValueError("z must be at least 1000")
    explicit = _explicit_tail(z, 1, [], explicit_limit, cache, long_run, full_ladder=True)
    w, s, e = _analytic_tail(1, [], explicit_limit, 8 / 3, progress)
    return TailEstimate(z, explicit, w, s + e, _round_up(explicit, w, s, e), explicit_limit)


def stratum_tail(z: int, L: int, forbidden: Iterable[int],
                 explicit_limit: int = DEFAULT_EXPLICIT,
                 cache: ClassNumberCache | None = None, long_run: bool = False,
                 progress: bool = False) -> TailEstimate:
    """Bound S on the relative mass that thresholds above z can remove from
    a truncated stratum.

    The stratum at z is {n odd : L | n, no f in ``forbidden`` divides n / L}
    (forbidden already divided by its gcd with L).  If a threshold t > z
    divides such an n then t' = t / gcd(t, L) divides n / L and n / (L t')
    still avoids the forbidden set, so the removed density is at most
    upper / t', and zero when some forbidden element divides t'.  Thresholds
    of one prime l are all multiples of g_l, so past z only g_l is charged.
    """
    forbidden = sorted(set(forbidden))
    explicit = _explicit_tail(z, L, forbidden, explicit_limit, cache, long_run,
                              full_ladder=False)
    avoid = [p for p in (3, 5, 7, 11, 13) if p in forbidden and L % p]
    w, s, e = _analytic_tail(L, avoid, explicit_limit, 1.0, progress)
    return TailEstimate(z, explicit, w, s + e, _round_up(explicit, w, s, e), explicit_limit)


# ---------------------------------------------------------------------------
# ratio records

@dataclass(frozen=True)
class RatioRecord:
    ell: int
    d: int
    h: int
    t_cm: int
    ratio: float
    l_value_product: float


def record_search(limit: int, cache: ClassNumberCache | None = None) -> list[RatioRecord]:
    """Primes where L(1) log log l reaches a new running minimum.

    Each such l gives the odd degree d = g_l, in which Z/l or Z/2l occurs,
    so T_CM(d) >= l; ``ratio`` is T_CM(d) / (d log log d)^(2/3).
    """
    from .odt import t_cm
    cache = cache if cache is not None else shared_cache(limit)
    if cache.covered_limit < limit:
        raise ClassNumberError(f"class-number cache covers {cache.covered_limit} < {limit}")
    out = []
    best = math.inf
    for ell in cache.ells():
        if ell <= 3 or ell > limit:
            continue
        h = cache[ell]
        prod = math.pi * h / math.sqrt(ell) * math.log(math.log(ell))
        if prod >= best:
            continue
        best = prod
        d = h * (ell - 1) // 2
        t = t_cm(d, cache)
        ratio = t / (d * math.log(math.log(d))) ** (2 / 3) if d >= 3 else math.nan
        out.append(RatioRecord(ell, d, h, t, ratio, prod))
    return out
