"""Project a thermalized field onto coarse codebooks and watch the
Wilson loops shrink.

Projection displaces each link, which acts like incoherent noise on the
gauge field: every loop observable is suppressed toward zero, more so
for coarser codebooks.  Action-preserving rounding (APR) picks codebook
elements that keep the local plaquettes close to their original values
and roughly halves the error of plain nearest-neighbor (L2) projection.

Run: python demos/04_projection_error.py
"""

from su2lat import GaugeField, LatticeGeometry, SplitMix64
from su2lat import digitize as dg, montecarlo as mc
from su2lat.observables import avg_plaquette, loops6

geom = LatticeGeometry((6, 6, 6, 6))
rng = SplitMix64(4)
field = GaugeField.cold(geom)
for _ in range(80):
    mc.trajectory(field, 2.0, rng)

p0 = avg_plaquette(field)
print(f"thermalized 6^4 field at beta = 2.0: <plaq> = {p0:.5f}\n")
print("scheme          bits/link   plaq(L2)  rel.err   plaq(APR)  rel.err")

schemes = [dg.gen_edgewise_mesh(k) for k in (1, 2, 3, 4, 6, 8)]
schemes += [dg.gen_subgroup(n) for n in ("2T", "2O", "2I")]
for mesh in sorted(schemes, key=lambda m: m.bits_per_link):
    l2 = avg_plaquette(dg.project_l2(field, mesh))
    apr = avg_plaquette(dg.project_apr(field, mesh))
    print(f"{mesh.label:14s} {mesh.bits_per_link:9.3f}   {l2:8.5f} {l2 / p0 - 1:+8.1%}"
          f"   {apr:8.5f}  {apr / p0 - 1:+8.1%}")

print("\nfixed point (3p bits/link):")
for p in (3, 4, 5, 6):
    trunc = avg_plaquette(dg.project_fixed_point(field, dg.FixedPointSpec(p)))
    print(f"  p = {p} ({3 * p:2d} bits): plaq = {trunc:8.5f}  rel.err {trunc / p0 - 1:+8.1%}")

mesh = dg.gen_subgroup("2I")
p1, p2, p3 = loops6(field)
q1, q2, q3 = loops6(dg.project_apr(field, mesh))
print(f"\nperimeter-six loops under 2I + APR: "
      f"{p1:.4f}->{q1:.4f}, {p2:.4f}->{q2:.4f}, {p3:.4f}->{q3:.4f}")
