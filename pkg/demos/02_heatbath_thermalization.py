"""Thermalize a small lattice with the heat-bath + overrelaxation chain.

A trajectory is four overrelaxation sweeps plus one heat-bath sweep.  At
strong coupling the plaquette approaches the single-link Bessel ratio
I2(beta)/I1(beta); at beta = 2.0 it lands near 0.5.

Run: python demos/02_heatbath_thermalization.py
"""

from scipy.special import iv

from su2lat import GaugeField, LatticeGeometry, SplitMix64, montecarlo as mc
from su2lat.observables import avg_plaquette

geom = LatticeGeometry((6, 6, 6, 6))

for beta in (0.5, 2.0):
    rng = SplitMix64(20)
    start = mc.resolve_start(beta)
    field = GaugeField.cold(geom) if start == "cold" else GaugeField.hot(geom, rng)
    print(f"\nbeta = {beta} ({start} start), 6^4 lattice")
    print(" traj   <plaq>")
    history = []
    for traj in range(1, 61):
        mc.trajectory(field, beta, rng)
        if traj % 10 == 0:
            print(f"  {traj:4d}   {avg_plaquette(field):.5f}")
        if traj > 30:
            history.append(avg_plaquette(field))
    mean = sum(history) / len(history)
    if beta == 0.5:
        print(f"  equilibrium ~ {mean:.5f}; strong-coupling ratio "
              f"I2/I1({beta}) = {iv(2, beta) / iv(1, beta):.5f}")
    else:
        print(f"  equilibrium ~ {mean:.5f}")
