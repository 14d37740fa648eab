"""
Transfer from complete segregation to complete micromixing, and cell sequences.

The transfer rate over an expecting-time interval d_lambda is

    dG = V d_lambda / t_bar * int_0^inf exp(-gamma a) F(a + lambda) da

where F is the residence-time density. A cell sequence passes an inlet
signal through each cell's residence-time density in turn.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.integrate

_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(4)


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (error estimate {residual:.3e})")
        self.residual = residual


# -- residence-time densities ----------------------------------------------------


@dataclass(frozen=True)
class ExponentialRTD:
    """Perfectly mixed vessel: F(s) = exp(-s / t_bar) / t_bar."""

    t_bar: float

    def __post_init__(self):
        if not self.t_bar > 0.0:
            raise ValueError("t_bar must be positive")

    def density(self, s):
        s = np.asarray(s, dtype=float)
        return np.where(s >= 0.0, np.exp(-s / self.t_bar) / self.t_bar, 0.0)

    def survival(self, s):
        return float(math.exp(-max(s, 0.0) / self.t_bar))

    def mean(self):
        return self.t_bar

    def mean_residual_life(self, s):
        return self.t_bar

    @property
    def support_end(self):
        return math.inf

    def breakpoints(self):
        return np.array([0.0])

    def weighted_tail(self, lam, gamma):
        """Closed form of int_0^inf exp(-gamma a) F(a + lam) da."""
        return math.exp(-lam / self.t_bar) / (1.0 + gamma * self.t_bar)


@dataclass(frozen=True)
class TabulatedRTD:
    """
    Piecewise-linear density through (age, density) pairs, zero beyond the table.

    The table must start at age 0, be non-negative and integrate to 1 within
    ``tol``.
    """

    ages: np.ndarray
    values: np.ndarray
    tol: float = 1e-6

    def __post_init__(self):
        a = np.asarray(self.ages, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if a.ndim != 1 or a.size < 2 or a.shape != v.shape:
            raise ValueError("ages and values must be 1-D arrays of equal length >= 2")
        if np.any(np.diff(a) <= 0.0) or a[0] != 0.0:
            raise ValueError("ages must start at 0 and increase strictly")
        if np.any(v < 0.0):
            raise ValueError("tabulated density must be non-negative")
        total = np.trapezoid(v, a)
        if abs(total - 1.0) > self.tol:
            raise ValueError(f"tabulated density integrates to {total:.9g}, not 1")
        object.__setattr__(self, "ages", a)
        object.__setattr__(self, "values", v)

    def density(self, s):
        s = np.asarray(s, dtype=float)
        return np.interp(s, self.ages, self.values, left=0.0, right=0.0)

    def _moments_from(self, s0):
        """(zeroth, first) moments of the density over [s0, end]."""
        a, v = self.ages, self.values
        if s0 >= a[-1]:
            return 0.0, 0.0
        s0 = max(s0, 0.0)
        i = np.searchsorted(a, s0, side="right")
        pts = np.concatenate([[s0], a[i:]])
        vals = np.concatenate([[float(np.interp(s0, a, v))], v[i:]])
        x0, x1 = pts[:-1], pts[1:]
        f0, f1 = vals[:-1], vals[1:]
        h = x1 - x0
        m0 = np.sum(0.5 * h * (f0 + f1))
        m1 = np.sum(h * (f0 * (2 * x0 + x1) + f1 * (x0 + 2 * x1)) / 6.0)
        return float(m0), float(m1)

    def survival(self, s):
        return self._moments_from(s)[0]

    def mean(self):
        return self._moments_from(0.0)[1]

    def mean_residual_life(self, s):
        m0, m1 = self._moments_from(s)
        return m1 / m0 - s if m0 > 0.0 else 0.0

    @property
    def support_end(self):
        return float(self.ages[-1])

    def breakpoints(self):
        return self.ages

    def weighted_tail(self, lam, gamma):
        """
        int_0^inf exp(-gamma a) F(a + lam) da, exact for the linear segments.
        """
        a, v = self.ages, self.values
        if lam >= a[-1]:
            return 0.0
        i = np.searchsorted(a, lam, side="right")
        pts = np.concatenate([[lam], a[i:]]) - lam
        vals = np.concatenate([[float(np.interp(lam, a, v))], v[i:]])
        x0, x1 = pts[:-1], pts[1:]
        f0, f1 = vals[:-1], vals[1:]
        h = x1 - x0
        if gamma == 0.0:
            return float(np.sum(0.5 * h * (f0 + f1)))
        g = gamma
        gh = g * h
        # int_0^h exp(-g s) (f0 + (f1 - f0) s / h) ds, written to stay accurate
        # for small g h
        e = np.exp(-gh)
        small = gh < 1e-4
        A = np.where(small, h * (1 - gh / 2 + gh ** 2 / 6), -np.expm1(-gh) / np.where(small, 1.0, g))
        B = np.where(
            small,
            h * h * (0.5 - gh / 3 + gh ** 2 / 8),
            (1 - e * (1 + gh)) / np.where(small, 1.0, g * g),
        )
        seg = f0 * A + (f1 - f0) / h * B
        return float(np.sum(np.exp(-g * x0) * seg))


def make_rtd(spec, t_bar=None):
    """Build an RTD from ``"exponential"``, an RTD instance or (ages, density) pairs."""
    if spec is None or (isinstance(spec, str) and spec == "exponential"):
        if t_bar is None:
            raise ValueError("exponential RTD needs t_bar")
        return ExponentialRTD(t_bar)
    if isinstance(spec, (ExponentialRTD, TabulatedRTD, _CutoffRTD)):
        return spec
    pairs = np.asarray(spec, dtype=float)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ValueError("tabulated RTD must be a sequence of (age, density) pairs")
    return TabulatedRTD(pairs[:, 0], pairs[:, 1])


# -- transfer rate -------------------------------------------------------------------


@dataclass(frozen=True)
class MixingModel:
    """
    Parameters
    ----------
    volume : float
        Reactor volume V [m^3].
    t_bar : float
        Average life time of elements [s].
    gamma : float
        Specific rate parameter [1/s].
    rtd : RTD or str or sequence of (age, density)
        Defaults to an exponential density with mean ``t_bar``.
    crucial_age : float
        Elements older than this are handled as micromixed.
    """

    volume: float
    t_bar: float
    gamma: float = 0.0
    rtd: object = "exponential"
    crucial_age: float = math.inf

    def __post_init__(self):
        if not self.volume > 0.0 or not self.t_bar > 0.0:
            raise ValueError("volume and t_bar must be positive")
        if self.gamma < 0.0:
            raise ValueError("gamma must be non-negative")
        if self.crucial_age < 0.0:
            raise ValueError("crucial_age must be non-negative")
        object.__setattr__(self, "rtd", make_rtd(self.rtd, self.t_bar))


def _weighted_tail_quad(rtd, lam, gamma, epsrel):
    def f(a):
        return math.exp(-gamma * a) * float(rtd.density(a + lam))

    end = rtd.support_end
    if math.isfinite(end):
        if lam >= end:
            return 0.0
        pts = [p - lam for p in rtd.breakpoints() if lam < p < end]
        val, err = scipy.integrate.quad(
            f, 0.0, end - lam, points=pts or None, epsabs=0.0, epsrel=epsrel,
            limit=max(500, 4 * len(pts) + 50),
        )
    else:
        val, err = scipy.integrate.quad(f, 0.0, math.inf, epsabs=0.0, epsrel=epsrel, limit=500)
    if err > max(100.0 * epsrel * abs(val), 1e-300):
        raise QuadratureError("transfer-rate quadrature did not converge", err)
    return val


def segregation_transfer_rate(model, lambda_wait, d_lambda, method="quadrature", epsrel=1e-12):
    """
    Volume transferred from the segregated to the micromixed state [m^3].

    Parameters
    ----------
    model : MixingModel
    lambda_wait : float
        Expecting time lambda >= 0 [s].
    d_lambda : float
        Interval width [s].
    method : {"quadrature", "analytic"}
        ``"quadrature"`` integrates the density numerically (adaptive
        quadrature); ``"analytic"`` uses the closed form of the RTD
        (exponential) or the exact segment integrals of a tabulated density.
    """
    if lambda_wait < 0.0:
        raise ValueError("lambda_wait must be non-negative")
    if not d_lambda > 0.0:
        raise ValueError("d_lambda must be positive")
    if math.isinf(model.gamma):
        return 0.0
    if method == "analytic":
        tail = model.rtd.weighted_tail(lambda_wait, model.gamma)
    elif method == "quadrature":
        tail = _weighted_tail_quad(model.rtd, lambda_wait, model.gamma, epsrel)
    else:
        raise ValueError(f"unknown method {method!r}")
    return model.volume * d_lambda / model.t_bar * tail


# -- cell sequences ------------------------------------------------------------------


@dataclass(frozen=True)
class _CutoffRTD:
    """
    Density equal to ``base`` up to ``age``; the surviving fraction then
    leaves as a mixed vessel whose mean equals the conditional mean residual
    life, so both the total and the mean are preserved.
    """

    base: object
    age: float

    def __post_init__(self):
        object.__setattr__(self, "_surv", self.base.survival(self.age))
        object.__setattr__(self, "_mrl", max(self.base.mean_residual_life(self.age), 1e-300))

    def density(self, s):
        s = np.asarray(s, dtype=float)
        tail = self._surv / self._mrl * np.exp(-(s - self.age) / self._mrl)
        return np.where(s <= self.age, self.base.density(s), tail)

    def mean(self):
        return self.base.mean()

    @property
    def support_end(self):
        return math.inf if self._surv > 0.0 else min(self.age, self.base.support_end)

    def breakpoints(self):
        b = self.base.breakpoints()
        return np.unique(np.concatenate([b[b < self.age], [self.age]]))


@dataclass(frozen=True)
class Cell:
    """One vessel of a sequence: ``kind`` is ``"segregated"`` or ``"mixed"``."""

    kind: str
    t_bar: float
    rtd: object = None
    crucial_age: float = math.inf

    def __post_init__(self):
        if self.kind not in ("segregated", "mixed"):
            raise ValueError(f"cell kind must be 'segregated' or 'mixed', got {self.kind!r}")
        if not self.t_bar > 0.0:
            raise ValueError("cell t_bar must be positive")
        if self.crucial_age < 0.0:
            raise ValueError("crucial_age must be non-negative")
        if self.kind == "segregated" and self.rtd is not None:
            m = make_rtd(self.rtd, self.t_bar).mean()
            if abs(m - self.t_bar) > 1e-6 * self.t_bar:
                raise ValueError(f"RTD mean {m:.9g} disagrees with cell t_bar {self.t_bar:.9g}")

    def effective_rtd(self):
        if self.kind == "mixed":
            return ExponentialRTD(self.t_bar)
        base = make_rtd(self.rtd if self.rtd is not None else "exponential", self.t_bar)
        if math.isfinite(self.crucial_age) and self.crucial_age < base.support_end:
            return _CutoffRTD(base, self.crucial_age)
        return base


def _exponential_weights(tau, h, n):
    a = h / tau
    j = np.arange(n)
    w = np.exp(-a * j) * (4.0 * math.sinh(0.5 * a) ** 2 / a)
    w[0] = (a + math.expm1(-a)) / a
    return w


def _kernel_weights(rtd, h, tail_tol):
    """w_j = int F(s) hat(s / h - j) ds: total and mean of F are kept exactly."""
    if isinstance(rtd, ExponentialRTD):
        n = int(math.ceil(-math.log(tail_tol) * rtd.t_bar / h)) + 2
        return _exponential_weights(rtd.t_bar, h, n)
    if isinstance(rtd, _CutoffRTD) and rtd._surv > 0.0:
        end = rtd.age + (-math.log(tail_tol)) * rtd._mrl
    else:
        end = rtd.support_end
    n = int(math.ceil(end / h)) + 2
    grid_pts = np.arange(n + 1) * h
    pts = np.unique(np.concatenate([grid_pts, rtd.breakpoints(), [end]]))
    pts = pts[pts <= end]
    w = np.zeros(n + 1)
    for x0, x1 in zip(pts[:-1], pts[1:]):
        xm, xr = 0.5 * (x0 + x1), 0.5 * (x1 - x0)
        s = xm + xr * _GAUSS_X
        f = rtd.density(s) * _GAUSS_W * xr
        j = np.floor(xm / h).astype(int)
        frac = s / h - j
        w[j] += np.sum(f * (1.0 - frac))
        w[j + 1] += np.sum(f * frac)
    return np.trim_zeros(w, "b") if np.any(w) else w


@dataclass
class CellResponse:
    times: np.ndarray
    response: np.ndarray

    def integral(self, dt=None):
        h = self.times[1] - self.times[0] if dt is None else dt
        return float(np.sum(self.response) * h)

    def mean_time(self):
        return float(np.sum(self.times * self.response) / np.sum(self.response))

    def rows(self):
        return np.column_stack([self.times, self.response])


def cell_sequence_response(cells, inlet, dt, tail_tol=1e-14):
    """
    Outlet signal of an ordered sequence of cells.

    Parameters
    ----------
    cells : sequence of Cell
    inlet : array_like
        Inlet signal on a uniform grid with spacing ``dt``; an impulse of unit
        area is ``[1 / dt, 0, 0, ...]``.
    dt : float
        Grid spacing [s].
    tail_tol : float
        Each cell's density is followed until its remaining mass is below this.

    Returns
    -------
    CellResponse
        The grid is extended so that the response tail is kept; the discrete
        integral and mean of the signal are preserved exactly (up to
        ``tail_tol``).
    """
    cells = list(cells)
    if not cells:
        raise ValueError("cell sequence is empty")
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    signal = np.asarray(inlet, dtype=float)
    if signal.ndim != 1 or signal.size == 0:
        raise ValueError("inlet must be a non-empty 1-D series")
    for cell in cells:
        w = _kernel_weights(cell.effective_rtd(), dt, tail_tol)
        signal = np.convolve(signal, w)
    return CellResponse(np.arange(signal.size) * dt, signal)
