"""The digitization codebooks: discrete subgroups and geodesic meshes.

Run: python demos/03_codebooks.py
"""

import numpy as np

from su2lat import digitize as dg, su2

print("discrete subgroups of SU(2):")
for name in ("2T", "2O", "2I"):
    mesh = dg.gen_subgroup(name)
    prods = su2.multiply(mesh.elements[:, None, :], mesh.elements[None, :, :])
    gap = 2 - 2 * (prods.reshape(-1, 4) @ mesh.elements.T).max(axis=1)
    print(f"  {name}: v = {mesh.size:4d}, {mesh.bits_per_link:6.3f} bits/link, "
          f"closure defect {gap.max():.2e}")

print("\nedgewise geodesic meshes (integer points of the L1 sphere, inflated):")
print("  level    v     bits/link   index bits")
for k in range(1, 9):
    mesh = dg.gen_edgewise_mesh(k)
    print(f"  {k:3d}   {mesh.size:5d}   {mesh.bits_per_link:8.3f}   {mesh.index_bits:6d}")

print("\nfixed-point truncation of the quaternion components:")
g = np.array([0.7, 0.1, 0.1, np.sqrt(1 - 0.51)])
for p in (2, 4, 8):
    spec = dg.FixedPointSpec(p)
    out = dg.fixed_point_truncate(g, spec)
    norm2 = float(np.sum(out * out))
    print(f"  p = {p}: {np.round(out, 5)}  |q|^2 = {norm2:.5f} "
          f"({spec.bits_per_link} bits/link)")
print("  (the truncated point sits off the unit sphere; meshes never do)")
