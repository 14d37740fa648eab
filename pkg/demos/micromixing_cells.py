"""
Transfer from segregated flow to micromixing, and responses of cell sequences.

A fluid element that waited lambda before mixing leaves the segregated state
at a rate that depends on the residence time distribution and on gamma.
"""

import numpy as np

from reactorscale import micromixing as mm

for gamma in (0.0, 0.1, 1.0):
    m = mm.MixingModel(1.0, 10.0, gamma)
    q = [mm.segregation_transfer_rate(m, lam, 0.1) for lam in (0.0, 5.0, 20.0)]
    print(f"gamma = {gamma:4.1f}   dV at lambda = 0, 5, 20:", np.array2string(np.array(q), precision=4))

tri = mm.TabulatedRTD([0.0, 5.0, 10.0], [0.0, 0.2, 0.0])
m = mm.MixingModel(1.0, 5.0, 0.1, rtd=tri)
print("triangular RTD, lambda = 2:",
      mm.segregation_transfer_rate(m, 2.0, 0.1),
      mm.segregation_transfer_rate(m, 2.0, 0.1, method="analytic"))

dt = 0.05
cells = [mm.Cell("mixed", 5.0), mm.Cell("segregated", 5.0, rtd=tri, crucial_age=3.0)]
r = mm.cell_sequence_response(cells, [1.0 / dt], dt)
print(f"pulse response: integral {r.integral():.12f}, mean time {r.mean_time():.6f}")
peak = int(np.argmax(r.response))
print(f"peak outlet concentration {r.response[peak]:.4f} at t = {r.times[peak]:.2f}")
