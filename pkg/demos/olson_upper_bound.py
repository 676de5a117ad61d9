"""Walk through the exact upper bound for the density of Olson degrees.

Run:  python3 demos/olson_upper_bound.py
"""

from fractions import Fraction

from cmtorsion import density, odt
from cmtorsion.classnum import shared_cache
from cmtorsion.numtheory import truncated_decimal

cache = shared_cache(10**5)

# Three small thresholds already give the classical 4/15.
print("1 - d(M({2,3,5})) =", density.avoidance([2, 3, 5]))

# Every prime l = 3 (mod 4) up to 1e5 contributes g_l unless an earlier
# element divides it.  The sorted list starts like this:
gens = odt.olson_generators(10**5, cache).values()
print(f"{len(gens)} generators; first ten: {gens[:10]}")

# Keep the first 38 and reduce the 38-element inclusion-exclusion to two
# manageable pieces: factor out the coprime elements, split at p = 11,
# then factor out again.
chain = density.olson_chain(gens[:38])
print("coprime part:", chain.H_rel)
print("split prime:", chain.split_prime)
print("sieved side, 23 elements, density", truncated_decimal(chain.H1_sieved_density))
print("scaled side coprime part:", chain.H2_rel)
print("remaining 26 elements, avoidance", truncated_decimal(chain.H3_avoid))
print("upper bound:", truncated_decimal(chain.value))

# The greedy engine (components + prime splits) lands on the same rational.
assert density.avoidance(gens[:38]) == chain.value
print("denominator has", len(str(chain.value.denominator)), "digits")
print("bound is below 0.265:", chain.value < Fraction(265, 1000))
