"""
Efficiency loss of an absorber caused by its spreading zone.
"""

import numpy as np

from reactorscale import scale_effect as se

base = dict(k_ms=0.8, k_m=1.0, I=1e-4, a=0.05, d0=0.2, G=1.0, F=2.0, K_bar=0.5, H=10.0, H_s=2.0,
            lambda_abs=0.8, h_star=0.5)
p = se.ScaleEffectParams(**base)
print(se.scale_effect_report(p).as_dict())

print("gamma   chi      N        dh [m]")
for gamma in np.linspace(0.2, 1.0, 5):
    r = se.scale_effect_report(p, gamma)
    print(f"{gamma:4.2f}  {r.chi:.5f}  {r.N:7.4f}  {r.delta_h:.5f}")

for d0 in (0.1, 0.2, 0.4):
    print(f"source step {d0} m   i_min = {se.min_local_intensity(1e-4, 0.05, d0):.3e}")
