"""
Absorption of A into a liquid with reactant B and an instantaneous reaction.

Before t* the surface concentrations follow a closed form from the Laplace
solution. After t* the reaction plane leaves the surface and the moving-plane
solver tracks its position, velocity and the surface product concentration.
"""

import numpy as np

from reactorscale import chemisorption as cs

p = cs.default_params()
co = cs.derive_laplace_coefficients(p)
t_star = cs.compute_tstar(p, co)
print(f"t* = {t_star:.6f} s")

for t in np.linspace(0.2, 1.0, 5) * t_star:
    B, E = cs.surface_concentrations(p, co, t, t_star)
    print(f"t = {t:6.3f} s   C_BS = {B:.4f}  C_ES = {E:.4f}  mol/m^3")

sol = cs.solve_moving_plane(p, co, t_end=6.0 * t_star, n_zone1=100, n_zone2=400)
k = int(np.argmax(sol.velocity))
print(f"peak plane velocity {sol.velocity[k]:.4e} m/s at t = {sol.times[k]:.3f} s")
print(f"t_p = {sol.t_p:.4f} s   h_p = {sol.h_p:.4e} m")
for i in np.linspace(0, sol.times.size - 1, 6).astype(int):
    print(f"t = {sol.times[i]:7.3f} s   y = {sol.trajectory[i]:.4e} m   C_E,surface = {sol.surface_E[i]:.4f}")

tp = cs.correlation_tp(p.C_B_inf, p.henry, p.p_A, p.D_AA, p.D_BB)
print(f"fitted t_p correlation: {float(tp):.4f} s (extrapolated: {tp.extrapolated})")
