"""
Non-isothermal tubular through-reactor with a reversible first-order reaction X <-> Y.

State variables C_X(z, t), C_Y(z, t) and T(z, t) obey

    dC_X/dt = D_X C_X'' - s u C_X' - r
    dC_Y/dt = D_Y C_Y'' - s u C_Y' + r
    dT/dt   = chi T''   - s u T'   + q r - w (T - T_wall)

with r = k1(T) C_X - k2(T) C_Y, q = dH / (rho c_p) and w = 0 for an adiabatic
reactor. ``s = +1`` transports material toward increasing z; set
``advection_convention="printed"`` for the opposite sign.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg
import scipy.optimize
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fields import ScalarField1D

GAS_CONSTANT = 8.314462618
NO_STRUCTURE = "no structure"
BOUNDARY_KINDS = ("danckwerts", "dirichlet", "neumann", "periodic")
STRUCTURE_LABELS = ("stationary", "stable_oscillation", "decaying_oscillation", "destroying")


class SingularBoundaryError(ValueError):
    """The steady two-point boundary problem has no unique solution."""


class SteadyStateError(ValueError):
    """The supplied uniform state is not a steady state of the source terms."""


class TimeStepInstabilityError(RuntimeError):
    """Field norm grew past the configured bound."""


class NegativeConcentrationError(RuntimeError):
    """A concentration dropped below the clipping tolerance."""


class NewtonConvergenceError(RuntimeError):
    """The implicit step did not converge."""


# -- parameters --------------------------------------------------------------


@dataclass(frozen=True)
class ArrheniusKinetics:
    k0_forward: float
    Ea_forward: float
    k0_reverse: float
    Ea_reverse: float
    gas_constant: float = GAS_CONSTANT

    def validate(self):
        for name in ("k0_forward", "Ea_forward", "k0_reverse", "Ea_reverse"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value >= 0.0):
                raise ValueError(f"{name} must be finite and non-negative, got {value!r}")
        if not self.gas_constant > 0.0:
            raise ValueError("gas_constant must be positive")

    def _branch(self, branch):
        if branch == "forward":
            return self.k0_forward, self.Ea_forward
        if branch == "reverse":
            return self.k0_reverse, self.Ea_reverse
        raise ValueError(f"branch must be 'forward' or 'reverse', got {branch!r}")

    def rate(self, T, branch):
        k0, Ea = self._branch(branch)
        T = np.asarray(T, dtype=float)
        if np.any(T <= 0.0):
            raise ValueError("temperature must be positive")
        return k0 * np.exp(-Ea / (self.gas_constant * T))

    def rate_derivative(self, T, branch):
        """dk/dT = k Ea / (R T^2)."""
        _, Ea = self._branch(branch)
        T = np.asarray(T, dtype=float)
        return self.rate(T, branch) * Ea / (self.gas_constant * T * T)


def arrhenius_rate(kinetics, T, branch="forward"):
    """
    Rate constant ``k0 exp(-Ea / (R T))`` [1/s].

    Raises
    ------
    ValueError
        For non-positive temperature or an unknown branch.
    """
    value = kinetics.rate(T, branch)
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class ReactorConfig:
    """
    Tubular reactor parameters (SI units).

    ``j_over_S`` is the signed superficial velocity u [m/s]. ``T_inlet``
    defaults to ``T_wall``. ``dirichlet_right`` holds the outlet values
    (C_X, C_Y, T) used by the pure Dirichlet boundary kind; it defaults to
    (0, 0, T_inlet).
    """

    D_X: float
    D_Y: float
    chi_bar: float
    j_over_S: float
    rho_bar: float
    cp_bar: float
    delta_H: float
    length: float
    C_X0: float
    kinetics: ArrheniusKinetics
    adiabatic: bool = True
    wall_heat_coefficient: float = 0.0
    T_wall: float = 300.0
    T_inlet: float = None
    boundary: str = "danckwerts"
    advection_convention: str = "downstream"
    dirichlet_right: tuple = None

    def validate(self):
        for name in ("D_X", "D_Y", "chi_bar", "length", "rho_bar", "cp_bar"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.C_X0 < 0.0:
            raise ValueError("C_X0 must be non-negative")
        if self.wall_heat_coefficient < 0.0:
            raise ValueError("wall_heat_coefficient must be non-negative")
        if self.T_wall <= 0.0 or self.inlet_temperature <= 0.0:
            raise ValueError("temperatures must be positive")
        if self.boundary not in BOUNDARY_KINDS:
            raise ValueError(f"boundary must be one of {BOUNDARY_KINDS}, got {self.boundary!r}")
        if self.advection_convention not in ("downstream", "printed"):
            raise ValueError("advection_convention must be 'downstream' or 'printed'")
        self.kinetics.validate()
        return self

    @property
    def inlet_temperature(self):
        return self.T_wall if self.T_inlet is None else self.T_inlet

    @property
    def velocity(self):
        """Advection velocity in the downstream convention."""
        return self.j_over_S if self.advection_convention == "downstream" else -self.j_over_S

    @property
    def heat_factor(self):
        """q = dH / (rho c_p) [K m^3 / mol]."""
        return self.delta_H / (self.rho_bar * self.cp_bar)

    @property
    def cooling(self):
        return 0.0 if self.adiabatic else self.wall_heat_coefficient

    @property
    def outlet_values(self):
        if self.dirichlet_right is not None:
            return tuple(float(v) for v in self.dirichlet_right)
        return (0.0, 0.0, self.inlet_temperature)

    def replace(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class StabilityResult:
    """Three growth rates sigma(k) of the linearised system at one wavenumber."""

    wavenumber: float
    growth_rate_real: np.ndarray
    growth_rate_imag: np.ndarray

    @property
    def eigenvalues(self):
        return self.growth_rate_real + 1j * self.growth_rate_imag

    @property
    def max_real(self):
        return float(np.max(self.growth_rate_real))


# -- steady isothermal profiles ------------------------------------------------


def _steady_matrix(config, T_fixed):
    k1 = float(config.kinetics.rate(T_fixed, "forward"))
    k2 = float(config.kinetics.rate(T_fixed, "reverse"))
    u = config.velocity
    K = np.array([[-k1, k2], [k1, -k2]])
    Dinv = np.diag([1.0 / config.D_X, 1.0 / config.D_Y])
    M = np.zeros((4, 4))
    M[:2, 2:] = np.eye(2)
    M[2:, :2] = -Dinv @ K
    M[2:, 2:] = u * Dinv
    return M


def _boundary_rows(config, kind):
    """Rows (B_L, g_L, B_R, g_R) with B_L y(0) = g_L and B_R y(L) = g_R, y = (C, C')."""
    u = config.velocity
    DX, DY = config.D_X, config.D_Y
    if kind == "danckwerts":
        BL = np.array([[-u, 0.0, DX, 0.0], [0.0, -u, 0.0, DY]])
        gL = np.array([-u * config.C_X0, 0.0])
        BR = np.array([[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]])
        gR = np.zeros(2)
    elif kind == "dirichlet":
        BL = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]])
        gL = np.array([config.C_X0, 0.0])
        BR = BL.copy()
        gR = np.array(config.outlet_values[:2])
    else:
        raise ValueError(kind)
    return BL, gL, BR, gR


def _check_degenerate(config, kind):
    if kind in ("neumann", "periodic"):
        raise SingularBoundaryError(
            f"boundary={kind!r}: gradient-only ends leave the total amount of X+Y undetermined"
        )
    if kind == "danckwerts" and config.velocity == 0.0:
        raise SingularBoundaryError(
            "j_over_S = 0 with a Danckwerts inlet reduces both ends to zero flux; "
            "total amount of X+Y is undetermined"
        )


def steady_state_isothermal(config, T_fixed, boundary=None, n_nodes=201, grid=None):
    """
    Steady C_X(z), C_Y(z) at a fixed temperature.

    The linear constant-coefficient problem is solved as a first-order system
    y' = M y, y = (C_X, C_Y, C_X', C_Y'), over short segments whose
    propagators ``expm(M h)`` stay well conditioned; continuity between
    segments and the two end conditions form one sparse linear system.

    Parameters
    ----------
    config : ReactorConfig
    T_fixed : float
        Temperature [K].
    boundary : str, optional
        ``"danckwerts"`` or ``"dirichlet"``; defaults to ``config.boundary``.
    n_nodes : int
        Number of output nodes on a uniform grid (ignored when ``grid`` is given).

    Returns
    -------
    (ScalarField1D, ScalarField1D)
        C_X and C_Y.

    Raises
    ------
    SingularBoundaryError
        When the end conditions do not pin down a unique profile.
    """
    config.validate()
    kind = config.boundary if boundary is None else boundary
    if kind not in BOUNDARY_KINDS:
        raise ValueError(f"unknown boundary kind {kind!r}")
    _check_degenerate(config, kind)
    L = config.length
    z = np.linspace(0.0, L, int(n_nodes)) if grid is None else np.asarray(grid, dtype=float)
    M = _steady_matrix(config, T_fixed)
    rho = max(np.max(np.abs(np.linalg.eigvals(M))), 1.0 / L)
    m = int(min(max(math.ceil(rho * L / 2.0), 1), 20000))
    h = L / m
    P = scipy.linalg.expm(M * h)
    BL, gL, BR, gR = _boundary_rows(config, kind)

    size = 4 * (m + 1)
    rows, cols, vals = [], [], []
    rhs = np.zeros(size)

    def put(r, c, block):
        rr, cc = np.nonzero(np.abs(block) > 0.0)
        rows.extend(r + rr)
        cols.extend(c + cc)
        vals.extend(block[rr, cc])

    put(0, 0, BL)
    rhs[0:2] = gL
    for i in range(m):
        r = 2 + 4 * i
        put(r, 4 * i, P)
        put(r, 4 * (i + 1), -np.eye(4))
    put(size - 2, 4 * m, BR)
    rhs[size - 2 :] = gR
    A = sp.csc_matrix((vals, (rows, cols)), shape=(size, size))
    try:
        nodes = spla.splu(A).solve(rhs).reshape(m + 1, 4)
    except RuntimeError as exc:
        raise SingularBoundaryError(f"boundary system is singular: {exc}") from exc
    if not np.all(np.isfinite(nodes)):
        raise SingularBoundaryError("boundary system produced non-finite values")

    seg = np.minimum((z / h).astype(int), m - 1)
    out = np.empty((z.size, 4))
    cache = {}
    for j, (zj, sj) in enumerate(zip(z, seg)):
        off = zj - sj * h
        key = round(off / h, 12)
        if key not in cache:
            cache[key] = scipy.linalg.expm(M * off)
        out[j] = cache[key] @ nodes[sj]
    return (
        ScalarField1D(z, out[:, 0], "concentration"),
        ScalarField1D(z, out[:, 1], "concentration"),
    )


# -- linear stability ------------------------------------------------------------


def source_terms(config, C_X, C_Y, T):
    """Local source vector (R_X, R_Y, R_T) at a state."""
    k1 = config.kinetics.rate(T, "forward")
    k2 = config.kinetics.rate(T, "reverse")
    r = k1 * C_X - k2 * C_Y
    R_T = config.heat_factor * r - config.cooling * (T - config.T_wall)
    return -r, r, R_T


def source_jacobian(config, C_X, C_Y, T):
    """3x3 Jacobian of (R_X, R_Y, R_T) with respect to (C_X, C_Y, T)."""
    kin = config.kinetics
    k1 = float(kin.rate(T, "forward"))
    k2 = float(kin.rate(T, "reverse"))
    rT = float(kin.rate_derivative(T, "forward")) * C_X - float(kin.rate_derivative(T, "reverse")) * C_Y
    q = config.heat_factor
    return np.array(
        [
            [-k1, k2, -rT],
            [k1, -k2, rT],
            [q * k1, -q * k2, q * rT - config.cooling],
        ]
    )


def _check_uniform_state(config, state, tol):
    C_X, C_Y, T = (float(v) for v in state)
    k1 = float(config.kinetics.rate(T, "forward"))
    k2 = float(config.kinetics.rate(T, "reverse"))
    gross = k1 * abs(C_X) + k2 * abs(C_Y)
    rate_res = abs(k1 * C_X - k2 * C_Y) / gross if gross > 0.0 else 0.0
    w = config.cooling
    heat_res = abs(T - config.T_wall) / T if w > 0.0 else 0.0
    res = max(rate_res, heat_res)
    if res > tol:
        raise SteadyStateError(f"uniform state is not steady: relative source residual {res:.3e}")
    return res


def equilibrium_state(config, C_total, T=None):
    """Uniform steady state with C_X + C_Y = C_total at T (default T_wall)."""
    T = config.T_wall if T is None else float(T)
    k1 = float(config.kinetics.rate(T, "forward"))
    k2 = float(config.kinetics.rate(T, "reverse"))
    if k1 + k2 == 0.0:
        return (C_total, 0.0, T)
    return (C_total * k2 / (k1 + k2), C_total * k1 / (k1 + k2), T)


def dispersion_matrix(config, state, k):
    """Complex 3x3 matrix whose eigenvalues are sigma(k) for modes exp(ikz + sigma t)."""
    J = source_jacobian(config, *state).astype(complex)
    D = np.array([config.D_X, config.D_Y, config.chi_bar])
    J[np.diag_indices(3)] += -D * k * k - 1j * config.velocity * k
    return J


def linear_stability(config, uniform_state, wavenumbers, tol=1e-8):
    """
    Growth rates of Fourier modes about a uniform steady state.

    Parameters
    ----------
    config : ReactorConfig
    uniform_state : tuple
        (C_X, C_Y, T) satisfying the source balance to relative ``tol``.
    wavenumbers : sequence of float
        k [1/m].

    Returns
    -------
    list of StabilityResult
        Eigenvalues sorted by decreasing real part.
    """
    config.validate()
    _check_uniform_state(config, uniform_state, tol)
    out = []
    for k in np.atleast_1d(np.asarray(wavenumbers, dtype=float)):
        ev = np.linalg.eigvals(dispersion_matrix(config, uniform_state, k))
        ev = ev[np.lexsort((ev.imag, -ev.real))]
        out.append(StabilityResult(float(k), ev.real.copy(), ev.imag.copy()))
    return out


def max_growth_rate(config, state, k):
    return float(np.max(np.linalg.eigvals(dispersion_matrix(config, state, k)).real))


def min_reactor_length(config, uniform_state, n_scan=4000, k_range=None):
    """
    Shortest reactor admitting a growing spatial mode.

    Scans k > 0 for Re sigma(k) > 0 and returns ``2 pi / k_plus`` where k_plus
    is the upper edge of the unstable band (refined by root finding), or
    ``NO_STRUCTURE`` when no wavenumber is unstable.
    """
    config.validate()
    _check_uniform_state(config, uniform_state, 1e-8)
    J = source_jacobian(config, *uniform_state)
    d_min = min(config.D_X, config.D_Y, config.chi_bar)
    scale = max(np.max(np.abs(J)), 1e-300)
    if k_range is None:
        k_hi = math.sqrt(100.0 * scale / d_min)
        k_lo = 1e-6 * k_hi
    else:
        k_lo, k_hi = k_range
    ks = np.geomspace(k_lo, k_hi, int(n_scan))
    g = np.array([max_growth_rate(config, uniform_state, k) for k in ks])
    tol = 1e-12 * scale
    unstable = np.nonzero(g > tol)[0]
    if unstable.size == 0:
        return NO_STRUCTURE
    i = unstable[-1]
    if i == ks.size - 1:
        raise ValueError("unstable band extends past the scanned range; widen k_range")
    k_plus = scipy.optimize.brentq(
        lambda k: max_growth_rate(config, uniform_state, k), ks[i], ks[i + 1], xtol=1e-14 * ks[i], rtol=1e-14
    )
    return 2.0 * math.pi / k_plus


# -- transient solver ------------------------------------------------------------


@dataclass
class TransientResult:
    """Stored time levels of a transient run; arrays are (n_saved, n_nodes)."""

    times: np.ndarray
    z: np.ndarray
    C_X: np.ndarray
    C_Y: np.ndarray
    T: np.ndarray
    boundary: str
    status: str = "completed"
    stats: dict = field(default_factory=dict)

    def weights(self):
        """Quadrature weights consistent with the discrete conservation law."""
        n = self.z.size
        if self.boundary == "periodic":
            return np.full(n, self.z[1] - self.z[0])
        h = self.z[1] - self.z[0]
        w = np.full(n, h)
        w[0] = w[-1] = 0.5 * h
        return w

    def total_moles(self):
        return (self.C_X + self.C_Y) @ self.weights()

    def fields_at(self, index):
        return tuple(ScalarField1D(self.z, a[index], kind) for a, kind in (
            (self.C_X, "concentration"), (self.C_Y, "concentration"), (self.T, "temperature")))

    def rows(self):
        """Long-format rows (t, z, C_X, C_Y, T)."""
        nt, nz = self.C_X.shape
        t = np.repeat(self.times, nz)
        z = np.tile(self.z, nt)
        return np.column_stack([t, z, self.C_X.ravel(), self.C_Y.ravel(), self.T.ravel()])


def reactor_grid(config, n_nodes):
    n = int(n_nodes)
    if n < 16:
        raise ValueError("grid needs at least 16 nodes")
    if config.boundary == "periodic":
        return np.arange(n) * (config.length / n)
    return np.linspace(0.0, config.length, n)


def _transport_operator(n, h, d, u, kind, feed):
    """Sparse second-order operator A and affine vector b for d c'' - u c'."""
    lo = d / (h * h) + u / (2.0 * h)
    di = -2.0 * d / (h * h)
    up = d / (h * h) - u / (2.0 * h)
    A = sp.lil_matrix((n, n))
    for i in range(n):
        A[i, i] = di
        if i > 0:
            A[i, i - 1] = lo
        if i < n - 1:
            A[i, i + 1] = up
    b = np.zeros(n)
    if kind == "periodic":
        A[0, n - 1] = lo
        A[n - 1, 0] = up
    elif kind in ("neumann", "danckwerts"):
        # mirrored ghost nodes; the Danckwerts inlet adds the feed flux
        A[0, 1] = lo + up
        A[n - 1, n - 2] = lo + up
        if kind == "danckwerts":
            g = 2.0 * h * u / d
            A[0, 0] = di - lo * g
            b[0] = lo * g * feed
    elif kind == "dirichlet":
        A[0, :] = 0.0
        A[n - 1, :] = 0.0
    return A.tocsr(), b


class _ReactorSystem:
    def __init__(self, config, z):
        self.c = config
        self.n = n = z.size
        h = z[1] - z[0]
        u = config.velocity
        kind = config.boundary
        Tin = config.inlet_temperature
        ops = [
            _transport_operator(n, h, config.D_X, u, kind, config.C_X0),
            _transport_operator(n, h, config.D_Y, u, kind, 0.0),
            _transport_operator(n, h, config.chi_bar, u, kind, Tin),
        ]
        self.A = sp.block_diag([o[0] for o in ops], format="csr")
        self.b = np.concatenate([o[1] for o in ops])
        self.fixed = np.zeros(3 * n, dtype=bool)
        if kind == "dirichlet":
            for s in range(3):
                self.fixed[s * n] = True
                self.fixed[s * n + n - 1] = True
        self.live = (~self.fixed).astype(float)

    def split(self, U):
        n = self.n
        return U[:n], U[n : 2 * n], U[2 * n :]

    def source(self, U):
        cx, cy, T = self.split(U)
        R = np.concatenate(source_terms(self.c, cx, cy, T))
        return R * self.live

    def jacobian(self, U):
        cx, cy, T = self.split(U)
        kin = self.c.kinetics
        k1 = kin.rate(T, "forward")
        k2 = kin.rate(T, "reverse")
        rT = kin.rate_derivative(T, "forward") * cx - kin.rate_derivative(T, "reverse") * cy
        q = self.c.heat_factor
        w = self.c.cooling
        n = self.n
        blocks = [
            [-k1, k2, -rT],
            [k1, -k2, rT],
            [q * k1, -q * k2, q * rT - w],
        ]
        live = self.live
        rows = [
            sp.hstack([sp.diags(blocks[r][c] * live[r * n : (r + 1) * n]) for c in range(3)])
            for r in range(3)
        ]
        return sp.vstack(rows, format="csr")

    def rhs(self, U):
        return self.A @ U + self.b + self.source(U)


def simulate_transient(
    config,
    initial,
    n_nodes=None,
    dt=None,
    t_end=None,
    save_every=1,
    newton_tol=1e-10,
    newton_max=30,
    norm_bound=1e3,
    on_bound="raise",
    clip_tol=1e-12,
):
    """
    Advance C_X, C_Y, T with Crank-Nicolson transport and trapezoidal sources.

    Each step solves ``U - U_n - dt/2 (F(U) + F(U_n)) = 0`` by Newton
    iteration (Jacobian refreshed every iteration) until the residual is
    below ``newton_tol`` relative to the state norm.

    Parameters
    ----------
    config : ReactorConfig
    initial : tuple of array_like
        (C_X, C_Y, T) on the grid returned by ``reactor_grid(config, n)``.
    n_nodes : int, optional
        Grid size; inferred from ``initial`` when omitted.
    dt, t_end : float
        Step and final time [s].
    save_every : int
        Store every n-th step (the initial and final levels are always kept).
    norm_bound : float
        Allowed growth of the max-norm of the fields relative to the initial
        state; exceeded -> ``TimeStepInstabilityError`` (``on_bound="raise"``)
        or early return with ``status="blowup"`` (``on_bound="stop"``).
    clip_tol : float
        Negative concentrations above ``-clip_tol C_X0`` are clipped to zero,
        lower values raise ``NegativeConcentrationError``.

    Returns
    -------
    TransientResult
    """
    config.validate()
    if dt is None or not dt > 0.0:
        raise ValueError("dt must be positive")
    if t_end is None or t_end < 0.0:
        raise ValueError("t_end must be non-negative")
    if on_bound not in ("raise", "stop"):
        raise ValueError("on_bound must be 'raise' or 'stop'")
    cx0, cy0, T0 = (np.asarray(a, dtype=float) for a in initial)
    n = cx0.size if n_nodes is None else int(n_nodes)
    if not (cx0.size == cy0.size == T0.size == n):
        raise ValueError("initial fields must share the grid size")
    z = reactor_grid(config, n)
    sysm = _ReactorSystem(config, z)
    U = np.concatenate([cx0, cy0, T0])
    if config.boundary == "dirichlet":
        right = config.outlet_values
        left = (config.C_X0, 0.0, config.inlet_temperature)
        for s in range(3):
            U[s * n] = left[s]
            U[s * n + n - 1] = right[s]
    norm0 = max(np.max(np.abs(U)), 1e-300)
    I = sp.identity(3 * n, format="csr")
    neg_tol = clip_tol * max(config.C_X0, 1e-300)

    n_steps = int(math.ceil(t_end / dt - 1e-9))
    saved_t = [0.0]
    saved = [U.copy()]
    status = "completed"
    newton_total = 0
    F_old = sysm.rhs(U)
    t = 0.0
    for step in range(1, n_steps + 1):
        h = min(dt, t_end - t)
        base = U + 0.5 * h * F_old
        V = U.copy()
        scale = max(np.max(np.abs(U)), 1e-300)
        for it in range(newton_max):
            F_new = sysm.rhs(V)
            G = V - base - 0.5 * h * F_new
            if np.max(np.abs(G)) <= newton_tol * scale and it > 0:
                break
            Jm = I - 0.5 * h * (sysm.A + sysm.jacobian(V))
            V = V - spla.spsolve(Jm.tocsc(), G)
            newton_total += 1
        else:
            raise NewtonConvergenceError(f"Newton iteration did not converge at t = {t + h:.6g} s")
        conc = V[: 2 * n]
        if np.any(conc < -neg_tol):
            raise NegativeConcentrationError(
                f"concentration {conc.min():.3e} below clipping tolerance at t = {t + h:.6g} s"
            )
        np.maximum(conc, 0.0, out=conc)
        U = V
        F_old = sysm.rhs(U)
        t += h
        if not np.all(np.isfinite(U)) or np.max(np.abs(U)) > norm_bound * norm0:
            if on_bound == "raise":
                raise TimeStepInstabilityError(
                    f"field norm exceeded {norm_bound:g} x initial at t = {t:.6g} s; reduce dt"
                )
            status = "blowup"
            saved_t.append(t)
            saved.append(U.copy())
            break
        if step % save_every == 0 or step == n_steps:
            saved_t.append(t)
            saved.append(U.copy())
    arr = np.array(saved)
    return TransientResult(
        times=np.array(saved_t),
        z=z,
        C_X=arr[:, :n],
        C_Y=arr[:, n : 2 * n],
        T=arr[:, 2 * n :],
        boundary=config.boundary,
        status=status,
        stats={"steps": step if n_steps else 0, "newton_iterations": newton_total},
    )


# -- structure classification ------------------------------------------------


def dominant_mode(result, probe="T"):
    """
    Complex amplitude history of the strongest non-uniform Fourier mode.

    Returns
    -------
    (mode_index, amplitudes)
    """
    field_ = {"T": result.T, "C_X": result.C_X, "C_Y": result.C_Y}[probe]
    dev = field_ - field_.mean(axis=1, keepdims=True)
    spec = np.fft.rfft(dev, axis=1) / field_.shape[1]
    power = np.mean(np.abs(spec[:, 1:]) ** 2, axis=0)
    m = int(np.argmax(power)) + 1
    return m, spec[:, m]


def classify_structures(
    result,
    probe="T",
    min_periods=5.0,
    detection_floor=1e-10,
    blowup_factor=1e3,
    slope_tol=1e-3,
    min_samples=16,
):
    """
    Classify a transient run by the envelope of its dominant spatial mode.

    ``destroying``: blow-up status, loss of positivity, amplitude growth past
    ``blowup_factor`` or a growing envelope. ``stationary``: amplitude below
    the detection floor, or a non-oscillating mode that does not grow. For
    oscillating modes the envelope slope per period separates
    ``stable_oscillation`` (|slope| < ``slope_tol``) from
    ``decaying_oscillation``.

    Raises
    ------
    ValueError
        If the series is too short for ``min_periods`` periods.
    """
    if result.times.size < min_samples:
        raise ValueError(f"time series has {result.times.size} samples, need at least {min_samples}")
    if result.status == "blowup":
        return "destroying"
    if np.any(result.C_X < 0.0) or np.any(result.C_Y < 0.0):
        return "destroying"
    field_ = {"T": result.T, "C_X": result.C_X, "C_Y": result.C_Y}[probe]
    ref = max(np.max(np.abs(field_)), 1e-300)
    m, amp = dominant_mode(result, probe)
    mag = np.abs(amp)
    if np.max(mag) <= detection_floor * ref:
        return "stationary"
    first = mag[0] if mag[0] > detection_floor * ref else np.max(mag[: max(2, mag.size // 10)])
    if np.max(mag) > blowup_factor * max(first, detection_floor * ref):
        return "destroying"
    t = result.times
    phase = np.unwrap(np.angle(amp))
    omega = np.polyfit(t, phase, 1)[0]
    duration = t[-1] - t[0]
    late = (t >= t[0] + 0.5 * duration) & (mag > detection_floor * ref)
    if np.count_nonzero(late) < 2:
        return "stationary"
    slope = np.polyfit(t[late], np.log(mag[late]), 1)[0]
    if abs(omega) * duration < math.pi:
        # non-oscillating mode: no period, judge the trend over the record
        return "destroying" if slope * duration > slope_tol else "stationary"
    period = 2.0 * math.pi / abs(omega)
    if duration < min_periods * period:
        raise ValueError(
            f"series spans {duration / period:.2f} periods of the dominant mode, need {min_periods}"
        )
    per_period = slope * period
    if abs(per_period) < slope_tol:
        return "stable_oscillation"
    return "decaying_oscillation" if per_period < 0.0 else "destroying"
