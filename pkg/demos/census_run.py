"""A resumable census: scan, stop part way, resume, compare with a clean run.

Run:  python3 demos/census_run.py /tmp/census
"""

import filecmp
import sys
from pathlib import Path

from cmtorsion import census

work = Path(sys.argv[1] if len(sys.argv) > 1 else "census-demo")
work.mkdir(parents=True, exist_ok=True)
hi = 2 * 10**5 - 1

clean = work / "clean.csv"
census.scan(1, hi, output_path=str(clean), workers=2, width=1 << 12)

# stop after five chunks, as if the process had been killed
part, ck = work / "resumed.csv", work / "scan.ck"
ck.unlink(missing_ok=True)
census.scan(1, hi, output_path=str(part), checkpoint=str(ck), width=1 << 12, stop_after=5)
print("checkpoint head:", ck.read_text().splitlines()[:2])
state = census.scan(1, hi, output_path=str(part), checkpoint=str(ck), width=1 << 12)

print("identical output:", filecmp.cmp(clean, part, shallow=False))
print(f"{len(state.reps)} classes; Olson fraction {state.counts[0] / state.range_size():.4f}")
print(f"most groups: d={state.best_d} with {state.best_count}")
for agg in sorted(state.aggregates(), key=lambda a: -a.count)[:5]:
    print(f"  class of {agg.representative}: {agg.empirical_density:.4f}")
