"""SU(2) elements as unit quaternions: algebra, metric, Haar sampling.

Run: python demos/01_group_algebra.py
"""

import numpy as np

from su2lat import SplitMix64, su2

rng = SplitMix64(1)

g = su2.haar_sample(rng)
h = su2.haar_sample(rng)
print("two Haar-random elements:")
print("  g =", np.round(g, 4), " |g| =", su2.norm(g))
print("  h =", np.round(h, 4))

gh = su2.multiply(g, h)
print("g h =", np.round(gh, 4), " (still unit norm:", f"{su2.norm(gh):.15f})")
print("g g^+ =", np.round(su2.multiply(g, su2.dagger(g)), 15))
print("Re Tr g = 2a =", su2.re_trace(g))

# the metric is two-sided invariant: moving both points by any group
# element leaves their separation unchanged
k = su2.haar_sample(rng)
d0 = su2.distance_sq(g, h)
d1 = su2.distance_sq(su2.multiply(k, g), su2.multiply(k, h))
print(f"distance_sq(g, h) = {d0:.6f}; after left shift: {d1:.6f}")

# Haar moments: <Tr U> = 0 and <(Tr U)^2> = 1
n = 200_000
tr = su2.re_trace(su2.haar_sample(rng, n))
print(f"\n{n} Haar samples: <Tr U> = {tr.mean():+.4f} (expect 0), "
      f"<(Tr U)^2> = {(tr ** 2).mean():.4f} (expect 1)")

# staple-like sums normalize back onto the group
total = su2.haar_sample(rng, 6).sum(axis=0)
unit, norm = su2.normalize(total)
print(f"\nsum of six elements has norm {norm:.4f}; normalized part is again SU(2):"
      f" |u| = {su2.norm(unit):.15f}")
