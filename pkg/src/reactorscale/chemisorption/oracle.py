"""
Brute-force finite-difference solve of the surface-reaction phase.

Independent of the modal closed form: the coupled (B, E) system is
discretised directly with finite volumes on a uniform grid and integrated
with Crank-Nicolson after implicit-Euler start-up steps.
"""

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .params import NU_E


def _operator(Dm, n, dx):
    # interleaved unknowns [B0, E0, B1, E1, ...]; the last node is Dirichlet.
    lap = sp.diags([np.ones(n - 1), -2.0 * np.ones(n), np.ones(n - 1)], [-1, 0, 1], format="lil")
    lap[0, 1] = 2.0  # half cell at the interface: 2/dx^2 * (c1 - c0)
    lap = lap.tocsr() / (dx * dx)
    return sp.kron(lap, sp.csr_matrix(Dm), format="csc")


def fd_surface_phase(params, times, n_nodes=2001, depth=None, n_steps=4000, startup=4):
    """
    Integrate the interface-reaction phase and return snapshots.

    Parameters
    ----------
    params : SorptionParams
    times : array_like
        Increasing output times [s].
    n_nodes : int
        Grid nodes on ``[0, depth]``.
    depth : float, optional
        Domain depth; defaults to twelve diffusion lengths at ``max(times)``.
    n_steps : int
        Time steps up to ``max(times)``.
    startup : int
        Number of implicit Euler quarter steps before switching to CN.

    Returns
    -------
    x : ndarray
    B, E : ndarray
        Arrays of shape (len(times), n_nodes).
    """
    times = np.asarray(times, dtype=float)
    Dm = params.D.matrix
    mu_max = np.max(np.abs(np.linalg.eigvals(Dm)))
    if depth is None:
        depth = 12.0 * np.sqrt(mu_max * times.max())
    x = np.linspace(0.0, depth, n_nodes)
    dx = x[1] - x[0]
    m = n_nodes - 1  # active nodes; node m held at the far-field value
    A = _operator(Dm, m, dx)
    I = sp.identity(2 * m, format="csc")
    q = params.surface_flux
    src = np.zeros(2 * m)
    # boundary flux enters the half cell: -(2/dx) * (D dc/dx)(0)
    src[0] = -2.0 / dx * q
    src[1] = 2.0 / dx * NU_E * q
    # far-field coupling into the last active node
    far = np.zeros(2 * m)
    far[-2:] = Dm @ np.array([params.C_B_inf, 0.0]) / (dx * dx)
    forcing = src + far

    u = np.zeros(2 * m)
    u[0::2] = params.C_B_inf
    t_grid = np.linspace(0.0, times.max(), n_steps + 1)
    dt = t_grid[1] - t_grid[0]

    out_B = np.empty((times.size, n_nodes))
    out_E = np.empty((times.size, n_nodes))

    def record(u_prev, t_prev, u_next, t_next, k0):
        k = k0
        while k < times.size and times[k] <= t_next + 1e-12 * t_next:
            w = 0.0 if t_next == t_prev else (times[k] - t_prev) / (t_next - t_prev)
            uk = (1.0 - w) * u_prev + w * u_next
            out_B[k, :m] = uk[0::2]
            out_E[k, :m] = uk[1::2]
            out_B[k, m] = params.C_B_inf
            out_E[k, m] = 0.0
            k += 1
        return k

    k = 0
    be = splu((I - (dt / 4.0) * A).tocsc())
    t = 0.0
    for _ in range(startup):
        u_new = be.solve(u + (dt / 4.0) * forcing)
        k = record(u, t, u_new, t + dt / 4.0, k)
        u, t = u_new, t + dt / 4.0
    cn_lhs = splu((I - (dt / 2.0) * A).tocsc())
    cn_rhs = (I + (dt / 2.0) * A).tocsr()
    n_cn = n_steps - startup // 4
    for _ in range(n_cn):
        u_new = cn_lhs.solve(cn_rhs @ u + dt * forcing)
        k = record(u, t, u_new, t + dt, k)
        u, t = u_new, t + dt
    if k < times.size:
        k = record(u, t, u, times.max(), k)
    return x, out_B, out_E


def fd_breakthrough_time(params, t_guess, n_nodes=2001, n_steps=4000):
    """Zero crossing of the FD surface B, interpolated linearly in sqrt(t)."""
    times = np.linspace(0.5, 1.5, 41) * t_guess
    _, B, _ = fd_surface_phase(params, times, n_nodes=n_nodes, n_steps=n_steps)
    cbs = B[:, 0]
    idx = np.nonzero(np.diff(np.sign(cbs)))[0]
    if idx.size == 0:
        raise RuntimeError("surface B does not cross zero in the probe window")
    i = idx[0]
    s0, s1 = np.sqrt(times[i]), np.sqrt(times[i + 1])
    s = s0 + (s1 - s0) * cbs[i] / (cbs[i] - cbs[i + 1])
    return float(s * s)
