"""Slow, independent reference implementations the tests compare against.

None of these import the package; they are deliberately naive.
"""

import math
from fractions import Fraction


def naive_primes(n):
    return [p for p in range(2, n + 1) if all(p % q for q in range(2, math.isqrt(p) + 1))]


def trial_factor(n):
    out, p = [], 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            out.append((p, e))
        p += 1
    if n > 1:
        out.append((n, 1))
    return out


def brute_class_number(ell):
    """Count reduced forms (a, b, c) of discriminant -ell: |b| <= a <= c,
    b >= 0 whenever |b| = a or a = c, gcd(a, b, c) = 1."""
    h = 0
    a = 1
    while 3 * a * a <= ell:
        for b in range(-a, a + 1):
            num = b * b + ell
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a:
                continue
            if b < 0 and (-b == a or a == c):
                continue
            if math.gcd(math.gcd(a, abs(b)), c) != 1:
                continue
            h += 1
        a += 1
    return h


def transcribed_threshold(kind, ell, n, h):
    """Threshold of Z/l^n ('C') or Z/2l^n ('2C'); None if never realizable."""
    if ell == 3:
        dlt = 0 if n == 1 else (3 * n) // 2 - 2
    else:
        dlt = (3 * n) // 2 - 1
    base = h * (ell - 1) // 2 * ell**dlt
    if kind == "C":
        return base if ell % 8 == 3 else None
    if ell % 8 == 7:
        return base
    return 1 if (ell, n) == (3, 1) else 3 * base


def oracle_group_orders(dmax, class_numbers):
    """For every odd d <= dmax, the sorted list of cyclic orders realized
    (plus the tag 'V' for Z/2 x Z/2), by testing every candidate group with
    l <= 2 dmax + 1 and l^n <= 9 dmax^2 against its threshold."""
    found = {d: [1, 2, 4, "V"] for d in range(1, dmax + 1, 2)}
    for ell, h in class_numbers.items():
        if ell > 2 * dmax + 1:
            continue
        n = 1
        while ell**n <= 9 * dmax * dmax:
            for kind, order in (("C", ell**n), ("2C", 2 * ell**n)):
                t = transcribed_threshold(kind, ell, n, h)
                if t is None or t > dmax:
                    continue
                for d in range(t, dmax + 1, 2 * t):
                    found[d].append(order)
            n += 1
    return {d: sorted(x for x in v if x != "V") for d, v in found.items()}


def count_multiples_density(H, N):
    """#{1 <= n <= N : some h in H divides n} / N, by direct counting."""
    hits = sum(1 for n in range(1, N + 1) if any(n % h == 0 for h in H))
    return Fraction(hits, N)


def subset_inclusion_exclusion(H):
    H = list(H)
    total = Fraction(0)
    for mask in range(1, 1 << len(H)):
        m, bits = 1, 0
        for i, h in enumerate(H):
            if mask >> i & 1:
                m = math.lcm(m, h)
                bits += 1
        total += Fraction((-1) ** (bits - 1), m)
    return total
