"""Density intervals for a few torsion-equivalence classes.

Run:  python3 demos/strata.py          (about half a minute)
      python3 demos/strata.py --long   (Olson interval inside (0.264, 0.265))
"""

import argparse

from cmtorsion import density, odt

ap = argparse.ArgumentParser()
ap.add_argument("--long", action="store_true", help="explicit class numbers to 3e7")
args = ap.parse_args()

for d in (3, 5, 9, 15):
    print(f"{d}: groups {', '.join(map(str, odt.groups(d)))}")

# The truncated stratum at level z is exact; the tail only shrinks it.
z = 32927
for d in (1, 3, 5, 9):
    kw = dict(explicit_limit=3 * 10**7, long_run=True) if (d == 1 and args.long) else {}
    res = density.stratum_density(d, z, **kw)
    iv = res.interval
    print(f"class of {d}: L={res.L}, {len(res.forbidden)} forbidden, "
          f"[{float(iv.lower):.6f}, {float(iv.upper):.6f}]")
