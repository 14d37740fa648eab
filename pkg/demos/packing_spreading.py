"""
Liquid spreading over a regular packing simulated as a random walk.

Shows the profile below a single central source, the unevenness coefficient
at depth, and how the spreading zone shortens as sources are added.
"""

import numpy as np

from reactorscale import packing as pk

g = pk.PackingGeometry(1.0, 0.05, 0.1, 200)
field = pk.random_walk_simulate(g, pk.IrrigationLayout(((0.0, 1e-3),)), 200_000, seed=1)
for level in (5, 20, 80, 200):
    u = pk.unevenness_coefficient(field, level)
    print(f"depth {g.depths[level]:5.1f} m   k_u = {u.k_u:.3f}")

x = g.centers[g.centers >= 0]
sim = field.intensity[40, g.centers >= 0]
ana = pk.superpose_sources(pk.IrrigationLayout(((0.0, 1e-3),)), g, g.depths[40], x)
print("L1 gap to the image solution at 4 m:", round(pk.l1_discrepancy(sim, ana), 4))

for n in (1, 2, 4):
    sz = pk.spreading_zone_height(g, pk.IrrigationLayout.equally_spaced(g, n), walkers=200_000, seed=2)
    print(f"n = {n}   spreading zone {sz.height:.2f} m   fitted estimate {pk.spreading_zone_approx(1.0, 0.05, n):.2f} m")

print(f"characteristic radius for D = 2 m: {pk.characteristic_radius(2.0, 0.05):.4f} m")
