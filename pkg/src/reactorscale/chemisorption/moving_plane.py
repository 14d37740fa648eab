"""
Reaction-plane phase (t > t*) of chemisorption with an instantaneous reaction.

Zone I (0 < x < y) carries the absorbed gas A and product E, zone II
(y < x < L) carries the liquid reactant B and E. Each zone is mapped onto a
fixed unit interval (xi = x / y, eta = (x - y) / (L - y)) so the plane stays
on a grid node while it moves; zone II nodes are clustered exponentially
toward the plane where the B gradient is steepest. A time step is Crank-Nicolson on both zones:

* separate driving: A (zone I) and B (zone II) are swept with the Thomas
  algorithm holding E at its latest iterate, then E is swept over the chain
  zone I -> plane -> zone II holding A and B; repeated until the fields stop
  changing;
* interface coordination: the plane position is bracketed and refined by a
  Brent-Dekker iteration until the A flux arriving from the left equals the B flux arriving from the
  right; the plane row of the E sweep carries the E flux jump (twice the
  reaction rate) and C_E continuity.
"""

from dataclasses import dataclass, field

import numpy as np

from .._tridiag import solve_tridiagonal
from .laplace import (
    compute_tstar,
    derive_laplace_coefficients,
    max_product_surface_conc,
    pre_tstar_profiles,
)
from .params import NU_E


class InterfaceConvergenceError(RuntimeError):
    """Interface iterations failed even after step-size halving."""


class DomainTruncationError(RuntimeError):
    """The reaction plane or the depletion layer reached the end of the layer."""


@dataclass
class MovingPlaneSolution:
    """Run record of the reaction-plane phase; arrays are indexed by accepted step."""

    t_star: float
    times: np.ndarray
    trajectory: np.ndarray
    velocity: np.ndarray
    t_p: float
    h_p: float
    surface_A: np.ndarray
    surface_E: np.ndarray
    surface_E_at_plane: np.ndarray
    surface_B: np.ndarray
    flux_A: np.ndarray
    flux_B: np.ndarray
    flux_E_jump: np.ndarray
    plane_A: np.ndarray
    plane_B: np.ndarray
    absorbed_A: np.ndarray
    consumed_B: np.ndarray
    stored_A: np.ndarray
    stored_E: np.ndarray
    C_ES_star: float
    snapshots: list = field(default_factory=list, repr=False)
    stats: dict = field(default_factory=dict)

    @property
    def stoichiometry_residual(self):
        """
        Per accepted step ``(|j_A - j_B| / max, |j_E - 2 j_B| / |j_E|)`` at the plane.

        Row 0 of the record is the start-up state and is excluded.
        """
        jA, jB, jE = self.flux_A[1:], self.flux_B[1:], self.flux_E_jump[1:]
        r1 = np.abs(jA - jB) / np.maximum(np.abs(jA), np.abs(jB))
        r2 = np.abs(jE - NU_E * jB) / np.abs(jE)
        return r1, r2

    @property
    def accounting_error(self):
        """Relative closure of the A balance and of the E balance at each accepted step."""
        a = np.abs(self.absorbed_A - self.consumed_B - self.stored_A) / self.absorbed_A
        e = np.abs(self.stored_E - NU_E * self.consumed_B) / self.stored_E
        return a[1:], e[1:]

    def summary_rows(self):
        return np.column_stack(
            [self.times, self.trajectory, self.velocity, self.surface_A, self.surface_B, self.surface_E]
        )


def _d1_centered(u, h):
    d = np.zeros_like(u)
    d[1:-1] = (u[2:] - u[:-2]) / (2.0 * h)
    return d


def _d2_centered(u, h):
    d = np.zeros_like(u)
    d[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (h * h)
    return d


def _grad_left(u, h):
    # one-sided second-order derivative at the last node
    return (3.0 * u[-1] - 4.0 * u[-2] + u[-3]) / (2.0 * h)


def _nonuniform_stencils(s):
    """First/second-derivative weights (left, centre, right) at interior points of ``s``."""
    hm = s[1:-1] - s[:-2]
    hp = s[2:] - s[1:-1]
    cx = np.stack([-hp / (hm * (hm + hp)), (hp - hm) / (hm * hp), hm / (hp * (hm + hp))])
    cxx = np.stack([2.0 / (hm * (hm + hp)), -2.0 / (hm * hp), 2.0 / (hp * (hm + hp))])
    return cx, cxx


def _apply(c, u):
    out = np.zeros_like(u)
    out[1:-1] = c[0] * u[:-2] + c[1] * u[1:-1] + c[2] * u[2:]
    return out


class _Solver:
    def __init__(self, params, n1, n2, theta, inner_tol, inner_max, stretch):
        self.p = params
        self.n1 = n1
        self.n2 = n2
        self.theta = theta
        self.inner_tol = inner_tol
        self.inner_max = inner_max
        self.xi = np.linspace(0.0, 1.0, n1 + 1)
        self.dxi = 1.0 / n1
        eta = np.linspace(0.0, 1.0, n2 + 1)
        if stretch > 0.0:
            self.phi = np.expm1(stretch * eta) / np.expm1(stretch)
        else:
            self.phi = eta
        self.cx2, self.cxx2 = _nonuniform_stencils(self.phi)
        h1 = self.phi[1] - self.phi[0]
        h2 = self.phi[2] - self.phi[1]
        # one-sided derivative at the plane from the zone II side
        self.g2 = np.array([-(2 * h1 + h2) / (h1 * (h1 + h2)), (h1 + h2) / (h1 * h2), -h1 / (h2 * (h1 + h2))])
        self.L = params.layer_depth
        self.last_inner = 0

    # -- operators ---------------------------------------------------------
    def _zone1_rates(self, A, E, y, ydot):
        """Explicit right-hand sides (dA/dt, dE/dt) in zone I at nodes 0..n1-1."""
        p = self.p
        h = self.dxi
        adv = self.xi * ydot / y
        Axx = _d2_centered(A, h)
        Exx = _d2_centered(E, h)
        Ax = _d1_centered(A, h)
        Ex = _d1_centered(E, h)
        J = p.gas_film_flux(A[0])
        Axx[0] = 2.0 * (A[1] - A[0]) / (h * h)
        Exx[0] = 2.0 * (E[1] - E[0]) / (h * h)
        rA = adv * Ax + (p.D_AA * Axx + p.D_AE * Exx) / (y * y)
        rE = adv * Ex + (p.D_EA * Axx + p.D_EE * Exx) / (y * y)
        rA[0] += 2.0 * J / (h * y)
        return rA[:-1], rE[:-1]

    def _zone2_rates(self, B, E, y, ydot):
        p = self.p
        w = self.L - y
        adv = (1.0 - self.phi) * ydot / w
        Bxx = _apply(self.cxx2, B)
        Exx = _apply(self.cxx2, E)
        rB = adv * _apply(self.cx2, B) + (p.D_BB * Bxx + p.D_BE * Exx) / (w * w)
        rE = adv * _apply(self.cx2, E) + (p.D_EB * Bxx + p.D_EE * Exx) / (w * w)
        return rB[1:-1], rE[1:-1]

    def plane_fluxes(self, A, B, E1, E2, y):
        p = self.p
        hl = self.dxi * y
        w = self.L - y
        Ax = _grad_left(A, hl)
        Exl = _grad_left(E1, hl)
        Bx = self.g2 @ B[:3] / w
        Exr = self.g2 @ E2[:3] / w
        jA = -(p.D_AA * Ax + p.D_AE * Exl)  # toward +x, arriving at the plane
        jB = p.D_BB * Bx + p.D_BE * Exr  # toward -x, arriving at the plane
        jE_left = -(p.D_EA * Ax + p.D_EE * Exl)
        jE_right = -(p.D_EB * Bx + p.D_EE * Exr)
        return jA, jB, jE_right - jE_left

    # -- sweeps ------------------------------------------------------------
    def _zone1_band(self, Dself, y, ydot, dt, th):
        n = self.n1
        h = self.dxi
        adv = self.xi[:n] * ydot / y
        d = Dself / (y * y * h * h)
        lower = -th * dt * (d - adv / (2.0 * h))
        diag = np.full(n, 1.0 + 2.0 * th * dt * d)
        upper = -th * dt * (d + adv / (2.0 * h))
        upper[0] = -2.0 * th * dt * d
        lower[0] = 0.0
        return lower, diag, upper

    def _zone2_band(self, Dself, y, ydot, dt, th):
        n = self.n2
        w = self.L - y
        adv = (1.0 - self.phi[1:n]) * ydot / w
        cx, cxx = self.cx2, self.cxx2
        lower = -th * dt * (Dself * cxx[0] / (w * w) + adv * cx[0])
        diag = 1.0 - th * dt * (Dself * cxx[1] / (w * w) + adv * cx[1])
        upper = -th * dt * (Dself * cxx[2] / (w * w) + adv * cx[2])
        return lower, diag, upper

    def _sweep_zone1_A(self, A_old, rhs_old, E, y, ydot, dt, th):
        p = self.p
        n = self.n1
        h = self.dxi
        lower, diag, upper = self._zone1_band(p.D_AA, y, ydot, dt, th)
        Exx = _d2_centered(E, h)
        Exx[0] = 2.0 * (E[1] - E[0]) / (h * h)
        rhs = A_old[:n] + (1.0 - th) * dt * rhs_old + th * dt * p.D_AE * Exx[:n] / (y * y)
        # surface row: ghost node from the gas-film flux (linear in A_0)
        q = p.alpha * p.C_A_inf
        k = p.henry / p.p_A
        diag[0] += th * dt * 2.0 * q * k / (h * y)
        rhs[0] += th * dt * 2.0 * q / (h * y)
        upper[-1] = 0.0  # A = 0 at the plane (node n)
        out = np.empty(n + 1)
        out[:n] = solve_tridiagonal(lower, diag, upper, rhs)
        out[n] = 0.0
        return out

    def _sweep_zone2_B(self, B_old, rhs_old, E, y, ydot, dt, th):
        p = self.p
        n = self.n2
        w = self.L - y
        lower, diag, upper = self._zone2_band(p.D_BB, y, ydot, dt, th)
        Exx = _apply(self.cxx2, E)
        rhs = B_old[1:n] + (1.0 - th) * dt * rhs_old + th * dt * p.D_BE * Exx[1:n] / (w * w)
        # B = 0 at the plane, far-field value at L
        rhs[-1] -= upper[-1] * p.C_B_inf
        lower[0] = 0.0
        upper[-1] = 0.0
        out = np.empty(n + 1)
        out[0] = 0.0
        out[1:n] = solve_tridiagonal(lower, diag, upper, rhs)
        out[n] = p.C_B_inf
        return out

    def _sweep_E(self, E1_old, E2_old, rE1_old, rE2_old, A, B, y, ydot, dt, th):
        """E over zone I nodes 0..n1-1, the plane, and zone II nodes 1..n2-1."""
        p = self.p
        n1, n2 = self.n1, self.n2
        h1 = self.dxi
        w = self.L - y
        size = n1 + n2  # zone I (n1) + plane (1) + zone II interior (n2 - 1)
        lower = np.zeros(size)
        diag = np.zeros(size)
        upper = np.zeros(size)
        rhs = np.zeros(size)

        l1, d1, u1 = self._zone1_band(p.D_EE, y, ydot, dt, th)
        lower[:n1], diag[:n1], upper[:n1] = l1, d1, u1
        Axx = _d2_centered(A, h1)
        Axx[0] = 2.0 * (A[1] - A[0]) / (h1 * h1)
        rhs[:n1] = E1_old[:n1] + (1.0 - th) * dt * rE1_old + th * dt * p.D_EA * Axx[:n1] / (y * y)

        s = slice(n1 + 1, size)
        l2, d2, u2 = self._zone2_band(p.D_EE, y, ydot, dt, th)
        lower[s], diag[s], upper[s] = l2, d2, u2
        Bxx = _apply(self.cxx2, B)
        rhs[s] = E2_old[1:n2] + (1.0 - th) * dt * rE2_old + th * dt * p.D_EB * Bxx[1:n2] / (w * w)
        upper[-1] = 0.0  # E = 0 at L

        # plane row: jE_right - jE_left - 2 jA = 0 with one-sided gradients
        #   jA = -(D_AA Ax + D_AE Ex-), jE_left = -(D_EA Ax + D_EE Ex-),
        #   jE_right = -(D_EB Bx + D_EE Ex+)
        hl = h1 * y
        cl = p.D_EE + NU_E * p.D_AE  # multiplies Ex-
        cr = -p.D_EE  # multiplies Ex+
        Ax = _grad_left(A, hl)
        Bx = self.g2 @ B[:3] / w
        known = (p.D_EA + NU_E * p.D_AA) * Ax - p.D_EB * Bx
        g = self.g2 / w
        row = {
            n1 - 2: cl / (2 * hl),
            n1 - 1: -4 * cl / (2 * hl),
            n1: 3 * cl / (2 * hl) + cr * g[0],
            n1 + 1: cr * g[1],
            n1 + 2: cr * g[2],
        }
        rp = -known
        # eliminate the n1-2 entry with row n1-1 (entries n1-2, n1-1, n1)
        f = row[n1 - 2] / lower[n1 - 1]
        row[n1 - 1] -= f * diag[n1 - 1]
        row[n1] -= f * upper[n1 - 1]
        rp -= f * rhs[n1 - 1]
        # eliminate the n1+2 entry with row n1+1 (entries n1, n1+1, n1+2)
        f = row[n1 + 2] / upper[n1 + 1]
        row[n1] -= f * lower[n1 + 1]
        row[n1 + 1] -= f * diag[n1 + 1]
        rp -= f * rhs[n1 + 1]
        lower[n1] = row[n1 - 1]
        diag[n1] = row[n1]
        upper[n1] = row[n1 + 1]
        rhs[n1] = rp

        sol = solve_tridiagonal(lower, diag, upper, rhs)
        E1 = sol[: n1 + 1].copy()
        E2 = np.empty(n2 + 1)
        E2[0] = sol[n1]
        E2[1:n2] = sol[n1 + 1 :]
        E2[n2] = 0.0
        return E1, E2

    # -- one step ------------------------------------------------------------
    def trial(self, state, y_new, dt, th, E_guess=None):
        """Fields at ``t + dt`` for a trial plane position; returns (fields, mismatch)."""
        A0, B0, E10, E20, y0 = state
        ydot = (y_new - y0) / dt
        rA_old, rE1_old = self._zone1_rates(A0, E10, y0, ydot)
        rB_old, rE2_old = self._zone2_rates(B0, E20, y0, ydot)
        if E_guess is None:
            E1, E2 = E10.copy(), E20.copy()
        else:
            E1, E2 = E_guess[0].copy(), E_guess[1].copy()
        A, B = A0, B0
        scale = max(self.p.C_B_inf, 1.0e-300)
        for it in range(self.inner_max):
            A = self._sweep_zone1_A(A0, rA_old, E1, y_new, ydot, dt, th)
            B = self._sweep_zone2_B(B0, rB_old, E2, y_new, ydot, dt, th)
            E1n, E2n = self._sweep_E(E10, E20, rE1_old, rE2_old, A, B, y_new, ydot, dt, th)
            change = max(np.abs(E1n - E1).max(), np.abs(E2n - E2).max())
            E1, E2 = E1n, E2n
            if change <= self.inner_tol * scale:
                break
        else:
            raise InterfaceConvergenceError("separate-driving iterations did not converge")
        self.last_inner = it + 1
        jA, jB, _ = self.plane_fluxes(A, B, E1, E2, y_new)
        return (A, B, E1, E2, y_new), jA - jB, max(abs(jA), abs(jB))

    def step(self, state, dt, th, y_guess, tol, max_iters):
        """Locate the plane position balancing the A and B fluxes (bracket + Brent)."""
        y0 = state[4]
        cache = {}
        guess = [None]

        def g(y):
            st, f, sc = self.trial(state, y, dt, th, guess[0])
            guess[0] = (st[2], st[3])
            cache[y] = (st, f, sc)
            return f / sc

        # bracket in s = log(y / y0); the residual decreases with y. The plane
        # may hold or retreat while B still arrives faster than A.
        iters = 0
        s_a = np.log(max(y_guess, y0 * (1.0 + 1e-6)) / y0)
        fa = g(y0 * np.exp(s_a))
        iters += 1
        s_b, fb = s_a, fa
        width = s_a
        while fa * fb > 0.0:
            if iters >= max_iters or s_b < np.log(1e-8):
                raise InterfaceConvergenceError("could not bracket the plane position")
            s_a, fa = s_b, fb
            if fb > 0.0:
                width *= 2.0
                s_b = s_a + width
            else:
                width = max(abs(width), 1e-4) * 2.0
                s_b = min(s_a, 0.0) - width
            yb = y0 * np.exp(s_b)
            fb = g(yb)
            iters += 1
            if abs(fb) <= tol:
                return cache[yb][0], iters
        ya = y0 * np.exp(s_a)
        yb = y0 * np.exp(s_b)
        if abs(fa) <= tol:
            return cache[ya][0], iters
        # Brent-Dekker style safeguarded secant on [ya, yb]
        a, b, fa_, fb_ = ya, yb, fa, fb
        c, fc = a, fa_
        d = e = b - a
        while True:
            if fb_ * fc > 0.0:
                c, fc = a, fa_
                d = e = b - a
            if abs(fc) < abs(fb_):
                a, b, c = b, c, b
                fa_, fb_, fc = fb_, fc, fb_
            m = 0.5 * (c - b)
            if abs(fb_) <= tol or abs(m) <= 1e-12 * abs(b):
                return cache[b][0], iters
            if iters >= max_iters:
                raise InterfaceConvergenceError(
                    f"interface residual {abs(fb_):.3e} after {iters} iterations"
                )
            if abs(e) >= 1e-14 * abs(b) and abs(fa_) > abs(fb_):
                s_ = fb_ / fa_
                if a == c:
                    pp = 2.0 * m * s_
                    qq = 1.0 - s_
                else:
                    qa = fa_ / fc
                    r = fb_ / fc
                    pp = s_ * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0))
                    qq = (qa - 1.0) * (r - 1.0) * (s_ - 1.0)
                if pp > 0.0:
                    qq = -qq
                else:
                    pp = -pp
                if 2.0 * pp < min(3.0 * m * qq - abs(1e-14 * b * qq), abs(e * qq)):
                    e, d = d, pp / qq
                else:
                    d = e = m
            else:
                d = e = m
            a, fa_ = b, fb_
            b = b + d if abs(d) > 1e-15 * abs(b) else b + np.copysign(1e-15 * abs(b), m)
            fb_ = g(b)
            iters += 1


def _integrate(u, h):
    return h * (np.sum(u) - 0.5 * (u[0] + u[-1]))


def solve_moving_plane(
    params,
    coeffs=None,
    t_end=None,
    n_zone1=400,
    n_zone2=1600,
    dt_initial=None,
    dt_max=None,
    growth=1.08,
    theta=0.5,
    n_implicit_start=4,
    interface_tol=1e-8,
    inner_tol=1e-13,
    inner_max=200,
    max_iters=80,
    snapshot_times=(),
    y_start=None,
    stretch=6.0,
):
    """
    Advance the reaction-plane phase from t* to ``t_end``.

    Parameters
    ----------
    params : SorptionParams
    coeffs : LaplaceCoefficients, optional
        Surface-phase coefficients; derived when omitted.
    t_end : float
        Final time [s]; must exceed t*.
    n_zone1, n_zone2 : int
        Grid intervals in the A/E and B/E zones (total nodes ``n_zone1 +
        n_zone2``).
    dt_initial : float, optional
        First step, default ``t*/200``.
    dt_max : float, optional
        Largest step, default ``(t_end - t*)/400``.
    growth : float
        Step growth factor per accepted step.
    theta : float
        Time-weighting (0.5 is Crank-Nicolson); the first ``n_implicit_start``
        steps are fully implicit to damp the start-up transient.
    interface_tol : float
        Relative tolerance on the A/B flux balance at the plane.
    snapshot_times : sequence of float
        Times at which (x, C_A, C_B, C_E, zone) snapshots on the physical
        axis are stored.

    Returns
    -------
    MovingPlaneSolution
    """
    params.validate()
    if coeffs is None:
        coeffs = derive_laplace_coefficients(params)
    t_star = compute_tstar(params, coeffs)
    if t_end is None or t_end <= t_star:
        raise ValueError(f"t_end must exceed t* = {t_star:.6g} s")
    L = params.layer_depth
    n1, n2 = int(n_zone1), int(n_zone2)
    if n1 < 3 or n2 < 3:
        raise ValueError("each zone needs at least 3 intervals")
    solver = _Solver(params, n1, n2, theta, inner_tol, inner_max, stretch)
    cell = L / (n1 + n2)
    if dt_initial is None:
        dt_initial = t_star / 200.0
    if dt_max is None:
        dt_max = (t_end - t_star) / 400.0

    # start-up: a thin zone I with a quasi-steady A profile
    if y_start is None:
        y_start = 1e-4 * np.sqrt(params.D_AA * t_star)
    y = y_start
    q = params.surface_flux
    A_s = q * y / (params.D_AA + q * params.henry * y / params.p_A)
    A = A_s * (1.0 - solver.xi)
    x2 = y + solver.phi * (L - y)
    B, E2 = pre_tstar_profiles(params, coeffs, x2, t_star, t_star)
    B = np.array(B, dtype=float)
    E2 = np.array(E2, dtype=float)
    B[0] = 0.0
    B[-1] = params.C_B_inf
    E2[-1] = 0.0
    _, E_surf = pre_tstar_profiles(params, coeffs, solver.xi * y, t_star, t_star)
    E1 = np.array(E_surf, dtype=float)
    E1[-1] = E2[0]
    state = (A, B, E1, E2, y)

    snaps = sorted(float(s) for s in snapshot_times)
    rec = {k: [] for k in ("t", "y", "A_s", "E_s", "E_p", "B_s", "jA", "jB", "jE", "Ap", "Bp", "abs", "cB", "sA", "sE")}

    def record(t, st, absorbed):
        A, B, E1, E2, y = st
        jA, jB, jE = solver.plane_fluxes(A, B, E1, E2, y)
        h1 = solver.dxi * y
        rec["t"].append(t)
        rec["y"].append(y)
        rec["A_s"].append(A[0])
        rec["E_s"].append(E1[0])
        rec["E_p"].append(E2[0])
        rec["B_s"].append(0.0)
        rec["jA"].append(jA)
        rec["jB"].append(jB)
        rec["jE"].append(jE)
        rec["Ap"].append(A[-1])
        rec["Bp"].append(B[0])
        rec["abs"].append(absorbed)
        rec["cB"].append(params.C_B_inf * y + np.trapezoid(params.C_B_inf - B, y + solver.phi * (L - y)))
        rec["sA"].append(_integrate(A, h1))
        rec["sE"].append(_integrate(E1, h1) + np.trapezoid(E2, y + solver.phi * (L - y)))

    snapshots = []

    def snapshot(t, st):
        A, B, E1, E2, y = st
        x1 = solver.xi * y
        x2 = y + solver.phi * (L - y)
        x = np.concatenate([x1, x2[1:]])
        snapshots.append(
            {
                "t": t,
                "x": x,
                "C_A": np.concatenate([A, np.zeros(n2)]),
                "C_B": np.concatenate([np.zeros(n1 + 1), B[1:]]),
                "C_E": np.concatenate([E1, E2[1:]]),
                "zone": np.concatenate([np.ones(n1 + 1, dtype=int), 2 * np.ones(n2, dtype=int)]),
            }
        )

    t = t_star
    absorbed = q * t_star
    record(t, state, absorbed)
    dt = dt_initial
    v = 0.0
    n_steps = 0
    total_iters = 0
    halvings = 0
    J_prev = params.gas_film_flux(state[0][0])
    while t < t_end * (1.0 - 1e-12):
        dt = min(dt, dt_max, t_end - t)
        if snaps and t + dt > snaps[0] and t < snaps[0]:
            dt = snaps[0] - t
        th = 1.0 if n_steps < n_implicit_start else theta
        y_guess = state[4] + max(v, 0.0) * dt
        if y_guess <= state[4]:
            y_guess = state[4] * 1.05 + 1e-3 * cell
        for attempt in range(6):
            try:
                new_state, iters = solver.step(state, dt, th, y_guess, interface_tol, max_iters)
                break
            except InterfaceConvergenceError:
                dt *= 0.5
                halvings += 1
                y_guess = state[4] + max(v, 0.0) * dt
                if y_guess <= state[4]:
                    y_guess = state[4] * 1.02 + 1e-4 * cell
        else:
            raise InterfaceConvergenceError(
                f"interface iterations failed at t = {t:.6g} s after step-size halving"
            )
        dy = new_state[4] - state[4]
        if dy > cell and dt > 1e-6 * dt_initial:
            # plane may cross at most one lattice cell per step
            dt *= 0.5 * cell / dy
            continue
        J_new = params.gas_film_flux(new_state[0][0])
        absorbed += 0.5 * dt * (J_prev + J_new)
        J_prev = J_new
        v = dy / dt
        t += dt
        state = new_state
        n_steps += 1
        total_iters += iters
        record(t, state, absorbed)
        if snaps and abs(t - snaps[0]) <= 1e-12 * max(t, 1.0):
            snapshot(t, state)
            snaps.pop(0)
        if state[4] > 0.5 * L:
            raise DomainTruncationError(
                f"reaction plane reached {state[4]:.3e} m of a {L:.3e} m layer; enlarge layer_depth"
            )
        if state[1][-2] < params.C_B_inf * (1.0 - 1e-5):
            raise DomainTruncationError("B depletion reached the end of the layer; enlarge layer_depth")
        dt *= growth

    times = np.asarray(rec["t"])
    traj = np.asarray(rec["y"])
    vel = np.gradient(traj, times)
    vel[0] = 0.0 if traj.size < 2 else (traj[1] - traj[0]) / (times[1] - times[0])
    i_max = int(np.argmax(vel))
    return MovingPlaneSolution(
        t_star=t_star,
        times=times,
        trajectory=traj,
        velocity=vel,
        t_p=float(times[i_max]),
        h_p=float(traj[i_max]),
        surface_A=np.asarray(rec["A_s"]),
        surface_E=np.asarray(rec["E_s"]),
        surface_E_at_plane=np.asarray(rec["E_p"]),
        surface_B=np.asarray(rec["B_s"]),
        flux_A=np.asarray(rec["jA"]),
        flux_B=np.asarray(rec["jB"]),
        flux_E_jump=np.asarray(rec["jE"]),
        plane_A=np.asarray(rec["Ap"]),
        plane_B=np.asarray(rec["Bp"]),
        absorbed_A=np.asarray(rec["abs"]),
        consumed_B=np.asarray(rec["cB"]),
        stored_A=np.asarray(rec["sA"]),
        stored_E=np.asarray(rec["sE"]),
        C_ES_star=max_product_surface_conc(params, coeffs),
        snapshots=snapshots,
        stats={"steps": n_steps, "interface_iterations": total_iters, "halvings": halvings},
    )
