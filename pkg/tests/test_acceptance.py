"""Acceptance criteria 1-9, one pass/fail line each on the terminal.

Run alone with ``pytest tests/test_acceptance.py -s`` for the report; the
lines are printed even under capture.
"""

import io
import math
import random
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from cmtorsion import bounds, census, cli, density, odt
from cmtorsion.classnum import ClassNumberCache, class_number
from cmtorsion.numtheory import divisor_count_table, primes_up_to, truncated_decimal
from oracles import brute_class_number, oracle_group_orders

DATA = Path(__file__).parent / "data"

DISPLAYED_GENERATORS = [
    2, 3, 5, 913, 1631, 1703, 2051, 2891, 3247, 3401, 3619, 4067, 5327, 6251, 6617, 7051, 7183,
    7429, 9737, 10829, 11129, 11143, 12389, 12463, 12673, 12847, 17611, 18403, 19253, 19931,
    20033, 22211, 22747, 23351, 27491, 28237, 30173, 32927, 33541, 38171, 38641, 39311, 39689,
    40687, 42601, 45103,
]


@pytest.fixture
def report(capsys):
    """report(n, title) is a context manager printing PASS/FAIL for criterion n."""

    class _Report:
        def __init__(self, n, title):
            self.n, self.title, self.notes = n, title, []

        def note(self, text):
            self.notes.append(text)

        def __enter__(self):
            self.t0 = time.perf_counter()
            return self

        def __exit__(self, exc_type, exc, tb):
            secs = time.perf_counter() - self.t0
            status = "PASS" if exc_type is None else "FAIL"
            detail = "; ".join(self.notes)
            with capsys.disabled():
                print(f"\ncriterion {self.n} [{status}] {self.title} ({secs:.1f} s) {detail}")
            return False

    return _Report


def _cli(*argv):
    buf = io.StringIO()
    from contextlib import redirect_stdout
    with redirect_stdout(buf):
        code = cli.main(list(argv))
    return code, buf.getvalue()


def test_criterion_1_degree_table(report):
    with report(1, "table 99 matches the 50 transcribed rows") as r:
        t0 = time.perf_counter()
        code, out = _cli("table", "99")
        secs = time.perf_counter() - t0
        want = (DATA / "degree_table_99.txt").read_text(encoding="utf-8")
        assert code == 0 and out == want
        assert len(out.splitlines()) == 50
        r.note(f"table {secs:.2f} s")
        assert secs < 1.0


def test_criterion_2_olson_upper_bound(report):
    with report(2, "olson-upper chain digits") as r:
        fresh = ClassNumberCache().extend(10**5)
        gens = odt.olson_generators(10**5, fresh).values()
        ch = density.olson_chain(gens[:38])
        assert truncated_decimal(ch.H1_sieved_density) == "0.004217267361708"
        assert truncated_decimal(ch.H3_avoid) == "0.979914305743609"
        assert truncated_decimal(ch.H2_avoid) == "0.974452539520107"
        assert truncated_decimal(ch.H1_density) == "0.006156375826997"
        assert truncated_decimal(ch.value) == "0.264991512979231"
        code, out = _cli("olson-upper")
        assert (code, out) == (0, "0.264991512979231\n")
        r.note(f"value {truncated_decimal(ch.value)}")


def test_criterion_3_generator_set(report, hcache):
    with report(3, "generator list and relatively prime parts") as r:
        gens = odt.olson_generators(10**5, hcache).values()
        assert gens[:46] == DISPLAYED_GENERATORS
        ch = density.olson_chain(gens[:38])
        assert ch.H_rel == [2, 3, 5, 11129, 27491]
        assert ch.H2_rel == [641, 653, 1013, 1133, 1601]
        r.note(f"{len(gens)} generators up to 1e5")


def test_criterion_4_lower_bound_pipeline(report, hcache):
    with report(4, "tail sums for the lower bound") as r:
        s2 = bounds.sum2(10**9, bounds.SIEGEL_START)
        assert s2.upper < Fraction(1819, 10**7)
        t0 = time.perf_counter()
        s3 = bounds.sum3_tail()
        assert time.perf_counter() - t0 < 5
        assert s3.main < 0.001220 and s3.exceptional < 1e-11
        agg = bounds.aggregate_bound(0.00788, float(s2.upper), s3)
        assert agg < 0.00248
        # tripwire substitute for the first sum
        partial = [bounds.sum1_partial(c, hcache).upper for c in (10**3, 10**4, 10**5)]
        partial.append(bounds.sum1_partial(10**7).upper)
        assert partial == sorted(partial) and partial[-1] < Fraction(788, 10**5)
        r.note(f"sum2 {float(s2.upper):.7f}, sum3 {s3.main:.7f}, aggregate {agg:.6f}, "
               f"sum1(1e7) {float(partial[-1]):.6f}")


def test_criterion_5_strata(report):
    with report(5, "Olson and 3-Olson intervals") as r:
        olson = density.stratum_density(1, 32927, explicit_limit=3 * 10**7, long_run=True)
        iv = olson.interval
        r.note(f"Olson [{float(iv.lower):.6f}, {float(iv.upper):.6f}]")
        assert iv.inside(Fraction(264, 1000), Fraction(265, 1000))
        three = density.stratum_density(3, 32927)
        iv3 = three.interval
        r.note(f"3-Olson [{float(iv3.lower):.6f}, {float(iv3.upper):.6f}] at z=32927")
        assert iv3.inside(Fraction(62, 1000), Fraction(64, 1000))


def _pattern_mass_above(level, hcache):
    """Exact density of odd n whose thresholds <= level have lcm > level,
    counted over one period."""
    vals = odt.threshold_family(level, hcache).values()
    period = 2 * math.lcm(*vals)
    n = np.arange(1, period, 2, dtype=np.int64)
    L = np.ones_like(n)
    for t in vals:
        hit = n % t == 0
        L[hit] = np.lcm(L[hit], t)
    return Fraction(int(np.count_nonzero(L > level)), period)


def test_criterion_6_stratification_sum(report, hcache, strata_1000):
    with report(6, "stratification sum over classes with representative <= 99") as r:
        uppers = sum((s.interval.upper for s in strata_1000.values()), Fraction(0))
        lowers = sum((s.interval.lower for s in strata_1000.values()), Fraction(0))
        # odd n outside these classes: either the thresholds <= 99 dividing n
        # already have lcm > 99, or some threshold > 99 divides n
        pattern = _pattern_mass_above(99, hcache)
        mid = sum((Fraction(1, 2 * g) for g in odt.threshold_family(1000, hcache).values()
                   if g > 99), Fraction(0))
        far = Fraction(bounds.certified_tail(1000).total_upper) / 2
        tail = pattern + mid + far
        r.note(f"{len(strata_1000)} classes, sum lower {float(lowers):.6f}, "
               f"sum upper {float(uppers):.6f}, tail {float(tail):.6f}")
        assert lowers <= Fraction(1, 2)
        assert uppers + tail >= Fraction(1, 2)


def test_criterion_7_oracles(report, hcache):
    with report(7, "brute-force oracles") as r:
        primes = [int(p) for p in primes_up_to(20001) if p % 4 == 3]
        brute = {p: brute_class_number(p) for p in primes}
        for p in primes:
            if p <= 10**4:
                assert class_number(p) == brute[p]
        oracle = oracle_group_orders(10**4, brute)
        for d in range(1, 10**4, 2):
            got = sorted(g.order() for g in odt.groups(d, hcache) if g.kind != odt.Kind.Z2xZ2)
            assert got == oracle[d], d
        rng = random.Random(7)
        small_primes = [int(p) for p in primes_up_to(50)]
        for _ in range(1000):
            H = [rng.randint(1, 500) for _ in range(rng.randint(0, 8))]
            p = rng.choice(small_primes)
            scaled, sieved = density.p_split(H, p)
            dm = density.density_of_multiples
            assert dm(H) == Fraction(1, p) * dm(scaled) + Fraction(p - 1, p) * dm(sieved)
            rel, rest = density.factor_out_relprime(H)
            prod = math.prod((1 - Fraction(1, h) for h in rel), start=Fraction(1))
            assert density.avoidance(H) == density.avoidance(rest) * prod
        r.note(f"{sum(1 for p in primes if p <= 10**4)} class numbers, 5000 degrees, 1000 sets")


def test_criterion_8_growth_properties(report, hcache):
    with report(8, "T_CM records and group-count cap") as r:
        recs = bounds.record_search(10**5, hcache)
        for rec in recs:
            assert rec.d % 2 == 1 and rec.d == rec.h * (rec.ell - 1) // 2
            assert rec.t_cm >= rec.ell
        N = 10**6
        rows, _ = census.scan_records(1, N - 1)
        counts = np.array([x.group_count for x in rows], dtype=np.int64)
        d = np.arange(1, N, 2, dtype=np.int64)
        tau = divisor_count_table(N)[d]
        log3 = np.zeros_like(d)
        p = np.full_like(d, 3)
        while (hit := p <= d).any():
            log3 += hit
            p *= 3
        cap = 6 + 2 * tau * (log3 + 1)
        assert (counts <= cap).all()
        r.note(f"{len(recs)} records, max count {counts.max()} on d <= 1e6")


def test_criterion_9_scan_performance(report):
    with report(9, "scan of odd d < 2e7") as r:
        hi = 2 * 10**7 - 1
        t0 = time.perf_counter()
        one, state = census.scan_digest(1, hi, workers=1)
        secs = time.perf_counter() - t0
        four, _ = census.scan_digest(1, hi, workers=4)
        assert one == four
        assert secs < 600
        r.note(f"workers 1: {secs:.1f} s, digest {one[:12]}, {len(state.reps)} classes")
