"""Quick oracle suites run by ``reactorscale verify <model>``."""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    limit: float

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag}  {self.name}: {self.value:.3e} (limit {self.limit:.1e})"


def _check(name, value, limit):
    return Check(name, bool(value < limit), float(value), float(limit))


def unstable_reactor_config(boundary="periodic"):
    """A reactor whose uniform state has a finite unstable band of wavenumbers."""
    from reactorscale.kinetics_reactor import GAS_CONSTANT, ArrheniusKinetics, ReactorConfig

    T0 = 500.0
    kin = ArrheniusKinetics(0.5 * math.exp(8e4 / (GAS_CONSTANT * T0)), 8e4,
                            0.5 * math.exp(4e4 / (GAS_CONSTANT * T0)), 4e4)
    return ReactorConfig(D_X=1e-4, D_Y=1e-4, chi_bar=1e-5, j_over_S=0.0, rho_bar=1000.0, cp_bar=1000.0,
                         delta_H=1.663e6, length=0.1, C_X0=100.0, kinetics=kin, adiabatic=False,
                         wall_heat_coefficient=0.01, T_wall=T0, boundary=boundary)


def reactor_suite():
    from reactorscale import kinetics_reactor as kr

    out = []
    cfg = unstable_reactor_config().replace(delta_H=0.0)
    st = kr.equilibrium_state(cfg, 100.0)
    n = 64
    z = kr.reactor_grid(cfg, n)
    init = (st[0] * (1 + 0.1 * np.sin(2 * np.pi * z / cfg.length)), np.full(n, st[1]), np.full(n, st[2]))
    res = kr.simulate_transient(cfg, init, dt=0.05, t_end=2.0)
    m = res.total_moles()
    out.append(_check("mass drift (periodic, no heat release)", abs(m[-1] - m[0]) / m[0], 1e-8))

    cfg = unstable_reactor_config()
    st = kr.equilibrium_state(cfg, 100.0)
    k = 2 * np.pi * 2 / cfg.length
    sigma = kr.max_growth_rate(cfg, st, k)
    n = 96
    z = kr.reactor_grid(cfg, n)
    eps = 1e-4
    ev = np.linalg.eig(kr.dispersion_matrix(cfg, st, k))
    vec = ev[1][:, np.argmax(ev[0].real)]
    vec = vec / vec[np.argmax(np.abs(vec))]
    phase = np.exp(1j * k * z)
    init = tuple(s + eps * np.real(v * phase) for s, v in zip(st, vec))
    res = kr.simulate_transient(cfg, init, dt=0.01, t_end=3.0, save_every=50)
    amp = np.abs(np.fft.rfft(res.T - st[2], axis=1)[:, 2])
    rate = np.polyfit(res.times[1:], np.log(amp[1:]), 1)[0]
    out.append(_check("transient growth vs dispersion relation", abs(rate - sigma) / abs(sigma), 0.02))
    return out


def sorption_suite():
    from reactorscale.chemisorption import (DiffusionMatrix, compute_tstar, default_params,
                                            derive_laplace_coefficients, pre_tstar_profiles)
    from reactorscale.chemisorption.oracle import fd_surface_phase

    out = []
    p = default_params()
    c = derive_laplace_coefficients(p)
    ts = compute_tstar(p, c)
    times = np.array([0.25, 0.5, 0.9]) * ts
    x, B, E = fd_surface_phase(p, times, n_nodes=1201, n_steps=1500)
    err = 0.0
    for i, t in enumerate(times):
        sel = slice(0, x.size // 4, x.size // 40)
        b, e = pre_tstar_profiles(p, c, x[sel], t, ts)
        scale = max(p.C_B_inf, np.max(np.abs(E[i])))
        err = max(err, np.max(np.abs(b - B[i, sel])) / scale, np.max(np.abs(e - E[i, sel])) / scale)
    out.append(_check("closed-form profiles vs finite differences", err, 1e-3))
    d = p.replace(D=DiffusionMatrix(1.0e-9, 0.0, 0.0, 0.4e-9))
    cd = derive_laplace_coefficients(d)
    ref = math.pi * d.D_BB * d.C_B_inf ** 2 / (4 * d.alpha ** 2 * d.C_A_inf ** 2)
    out.append(_check("diagonal breakthrough time closed form", abs(compute_tstar(d, cd) / ref - 1), 1e-10))
    return out


def mixing_suite():
    from reactorscale import micromixing as mm

    out = []
    worst = 0.0
    for g in (0.0, 0.1, 1.0, 10.0):
        for lam in (0.0, 0.5, 2.0, 8.0):
            m = mm.MixingModel(1.5, 2.0, g)
            q = mm.segregation_transfer_rate(m, lam, 0.01)
            ref = 1.5 * 0.01 * math.exp(-lam / 2.0) / (4.0 * g + 2.0)
            worst = max(worst, abs(q / ref - 1))
    out.append(_check("transfer rate vs exponential closed form", worst, 1e-8))
    dt = 0.01
    r = mm.cell_sequence_response([mm.Cell("mixed", 1.0), mm.Cell("segregated", 0.5)], [1.0 / dt], dt)
    out.append(_check("cell sequence mean residence time", abs(r.mean_time() - 1.5), 1e-6))
    out.append(_check("cell sequence integral", abs(r.integral() - 1.0), 1e-6))
    return out


def packing_suite():
    from reactorscale import packing as pk

    out = []
    g = pk.PackingGeometry(2.0, 0.05, 0.1, 20)
    lay = pk.IrrigationLayout(((0.0, 1.0),))
    f = pk.random_walk_simulate(g, lay, 400_000, 11)
    r = np.abs(f.centers)
    worst = max(pk.l1_discrepancy(f.intensity[lv], pk.analytic_intensity(r, lv * 0.1, 1.0, 0.1, 0.05, 2.0))
                for lv in (5, 10, 20))
    out.append(_check("Monte Carlo vs image-source profile (L1)", worst, 0.03))
    out.append(_check("per-level flow conservation", float(np.max(np.abs(f.level_flow() / f.total_flow - 1))), 1e-9))
    f2 = pk.random_walk_simulate(g, lay, 400_000, 11)
    out.append(_check("seed determinism (max difference)", float(np.max(np.abs(f.intensity - f2.intensity))), 1e-300))
    return out


def scale_suite():
    from reactorscale import scale_effect as se

    out = []
    p = se.ScaleEffectParams(0.8, 1.0, 1e-4, 0.05, 0.2, 1.0, 2.0, 0.5, 10.0, 2.0, 2.0, 0.5)
    worst = 0.0
    for gamma in (0.3, 0.8, 1.0):
        chi = se.conversion_degree(p, gamma)
        worst = max(worst, abs(se.ntu_from_conversion(chi, p.lambda_abs) / se.transfer_units(p, gamma) - 1))
    out.append(_check("conversion/transfer-unit round trip", worst, 1e-10))
    full = se.conversion_from_ntu(p.F * p.K_bar * p.H / p.G, p.lambda_abs)
    out.append(_check("gamma = 1 collapse", abs(se.conversion_degree(p, 1.0) - full), 1e-300))
    _, dh = se.transfer_unit_height(0.5, 0.8, 2.0, 4.0)
    out.append(_check("transfer-unit height penalty anchor", abs(dh - 0.1), 1e-15))
    return out


SUITES = {"reactor": reactor_suite, "sorption": sorption_suite, "mixing": mixing_suite,
          "packing": packing_suite, "scale": scale_suite}


def run_suite(model):
    if model not in SUITES:
        raise ValueError(f"no verification suite for {model!r}; choose from {sorted(SUITES)}")
    return SUITES[model]()
