"""Command line front end: ``cmtorsion <subcommand> ...`` (see ``--help``)."""

from __future__ import annotations

import argparse
import sys

from . import bounds, census, density, odt
from .classnum import ClassNumberError, class_number, shared_cache
from .numtheory import format_rational, truncated_decimal


class UsageError(Exception):
    pass


def _odd(text: str) -> int:
    try:
        d = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if d < 1:
        raise argparse.ArgumentTypeError("degree must be positive")
    if d % 2 == 0:
        raise argparse.ArgumentTypeError(
            f"{d} is even; CM torsion is classified here for odd degrees only")
    return d


def _positive(text: str) -> int:
    try:
        v = int(float(text)) if "e" in text.lower() else int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _group_list(d: int) -> str:
    gs = odt.groups(d)
    cyc = [str(g) for g in gs if g.kind != odt.Kind.Z2xZ2]
    return ",".join(cyc + ["Z/2⊕Z/2"])


def cmd_groups(a):
    print(_group_list(a.d))


def cmd_tcm(a):
    print(odt.t_cm(a.d))


def cmd_table(a):
    sys.stdout.write(census.table(a.dmax))


def cmd_scan(a):
    if a.lo > a.hi:
        raise UsageError("lo must not exceed hi")
    if a.checkpoint and not a.output:
        raise UsageError("--checkpoint needs --output so the record file can be resumed")
    out = None if a.output else sys.stdout
    state = census.scan(a.lo, a.hi, out, a.workers, a.format, a.checkpoint, a.output)
    size = state.range_size()
    print(f"degrees={sum(state.counts)} classes={len(state.reps)} "
          f"olson={state.counts[0]} olson_fraction={state.counts[0] / size:.6f} "
          f"max_group_count={state.best_count} at d={state.best_d}", file=sys.stderr)
    if a.aggregates:
        with open(a.aggregates, "w", encoding="ascii", newline="\n") as fh:
            fh.write("fingerprint_id,representative,count,empirical_density\n")
            for agg in state.aggregates():
                fh.write(f"{agg.fingerprint_id},{agg.representative},{agg.count},"
                         f"{agg.empirical_density:.9f}\n")


def cmd_olson_upper(a):
    cache = shared_cache(a.limit)
    gens = odt.olson_generators(a.limit, cache).values()
    if a.take > len(gens):
        raise UsageError(f"only {len(gens)} generators up to {a.limit}")
    H = gens[: a.take]
    if a.chain:
        ch = density.olson_chain(H)
        for label, value in (("d(M(H'^(p)))", ch.H1_sieved_density),
                             ("1-d(M(H'''))", ch.H3_avoid),
                             ("1-d(M(H''))", ch.H2_avoid),
                             ("d(M(H'))", ch.H1_density)):
            print(f"{label} = {truncated_decimal(value)}")
        value = ch.value
    else:
        value = density.avoidance(H)
    print(format_rational(value) if a.exact else truncated_decimal(value))


def cmd_stratum(a):
    res = density.stratum_density(a.d, a.z, tail=not a.no_tail, explicit_limit=a.explicit_limit,
                                  long_run=a.long_run, progress=a.progress)
    if res.inconsistent:
        print("inconsistent stratum: density 0")
        return
    print(f"L={res.L} forbidden={len(res.forbidden)}")
    print(f"upper {format_rational(res.interval.upper)}")
    print(f"lower {format_rational(res.interval.lower)}")
    if res.tail_bound is not None:
        print(f"tail S <= {res.tail_bound:.12g}")


def cmd_classnum(a):
    print(class_number(a.ell))


def cmd_sums(a):
    if a.which == "s1":
        cutoff = a.cutoff or 10**7
        s = bounds.sum1_partial(cutoff, long_run=a.long_run)
        print(f"partial sum1 (l <= {cutoff}, {s.terms} terms)")
        print(f"upper {format_rational(s.upper)}")
        if not s.exact:
            print(f"lower {format_rational(s.lower)}")
    elif a.which == "s2":
        s = bounds.sum2(a.lo, a.hi, progress=a.progress)
        print(f"sum2 ({a.lo}, {a.hi}], {s.terms} terms")
        print(f"upper {format_rational(s.upper)}")
    else:
        s3 = bounds.sum3_tail()
        print(f"exceptional {s3.exceptional:.6e}")
        print(f"main {s3.main:.12f}")


def cmd_records(a):
    shared_cache(a.limit)
    print("ell,d,h,t_cm,ratio,l_value_product")
    for r in bounds.record_search(a.limit):
        print(f"{r.ell},{r.d},{r.h},{r.t_cm},{r.ratio:.6f},{r.l_value_product:.6f}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cmtorsion", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("groups", help="torsion groups in odd degree d")
    s.add_argument("d", type=_odd)
    s.set_defaults(func=cmd_groups)

    s = sub.add_parser("tcm", help="largest torsion order in odd degree d")
    s.add_argument("d", type=_odd)
    s.set_defaults(func=cmd_tcm)

    s = sub.add_parser("table", help="group lists for odd d <= dmax")
    s.add_argument("dmax", type=_positive)
    s.set_defaults(func=cmd_table)

    s = sub.add_parser("scan", help="per-degree statistics for odd d in [lo, hi]")
    s.add_argument("lo", type=_odd)
    s.add_argument("hi", type=_odd)
    s.add_argument("--workers", type=_positive, default=1)
    s.add_argument("--checkpoint")
    s.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    s.add_argument("--output", help="record file (default: stdout)")
    s.add_argument("--aggregates", help="write per-class counts to this CSV")
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("olson-upper", help="upper bound for the density of Olson degrees")
    s.add_argument("--limit", type=_positive, default=10**5)
    s.add_argument("--take", type=_positive, default=38)
    s.add_argument("--chain", action="store_true", help="also print intermediate values")
    s.add_argument("--exact", action="store_true", help="print the exact rational")
    s.set_defaults(func=cmd_olson_upper)

    s = sub.add_parser("stratum", help="density interval of the degrees equivalent to d")
    s.add_argument("d", type=_odd)
    s.add_argument("--z", type=_positive, default=32927)
    s.add_argument("--explicit-limit", type=_positive, default=bounds.DEFAULT_EXPLICIT)
    s.add_argument("--no-tail", action="store_true")
    s.add_argument("--long-run", action="store_true")
    s.add_argument("--progress", action="store_true")
    s.set_defaults(func=cmd_stratum)

    s = sub.add_parser("classnum", help="class number of Q(sqrt(-l))")
    s.add_argument("ell", type=_positive)
    s.set_defaults(func=cmd_classnum)

    s = sub.add_parser("sums", help="reciprocal sums behind the Olson lower bound")
    s.add_argument("which", choices=("s1", "s2", "s3"))
    s.add_argument("--cutoff", type=_positive)
    s.add_argument("--lo", type=_positive, default=10**9)
    s.add_argument("--hi", type=_positive, default=bounds.SIEGEL_START)
    s.add_argument("--long-run", action="store_true")
    s.add_argument("--progress", action="store_true")
    s.set_defaults(func=cmd_sums)

    s = sub.add_parser("records", help="small L(1) records and their T_CM ratios")
    s.add_argument("--limit", type=_positive, default=10**5)
    s.set_defaults(func=cmd_records)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except (UsageError, odt.EvenDegreeError) as exc:
        print(f"cmtorsion: error: {exc}", file=sys.stderr)
        return 2
    except (ClassNumberError, ArithmeticError, census.CheckpointError, ValueError,
            OSError) as exc:
        print(f"cmtorsion: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
