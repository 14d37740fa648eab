"""
Large-scale effect of uneven liquid distribution on absorption efficiency.

The spreading zone of height H_s works with a mass transfer coefficient
reduced by the coefficient of worsening gamma. Its unworsened fraction is lost
from the effective height, H_eff = H - (1 - gamma) H_s, and from the height of
a transfer unit, dh = (1 - gamma) H_s / N.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np

LAMBDA_ONE_TOL = 1e-8
MIN_INTENSITY_READINGS = ("product", "printed")


class ConfigurationError(ValueError):
    """The spreading-zone penalty leaves no effective height."""


def worsening_coefficient(k_ms, k_m):
    """gamma = k_ms / k_m."""
    if not k_m > 0.0:
        raise ValueError("k_m must be positive")
    return k_ms / k_m


def geometric_worsening(field, spreading_levels, dry_fraction=1e-3):
    """
    Watered share of the spreading zone.

    Counts cells of levels 1..``spreading_levels`` whose intensity exceeds
    ``dry_fraction`` times the cross-section mean.
    """
    spreading_levels = int(spreading_levels)
    if spreading_levels < 1:
        return 1.0
    block = field.intensity[1 : spreading_levels + 1]
    if block.shape[0] < spreading_levels:
        raise ValueError("field has fewer levels than the spreading zone")
    wet = block > dry_fraction * field.mean_intensity()
    return float(np.count_nonzero(wet)) / wet.size


def min_local_intensity(I, a, d0, reading="product"):
    """
    Local minimum of the liquid intensity between point sources.

    ``"product"`` gives 4 I sqrt(a / (pi d0)) exp(-d0 / (4 a)), which falls with
    the source step; ``"printed"`` keeps the exponential in the denominator.
    """
    if not (I > 0.0 and a > 0.0 and d0 > 0.0):
        raise ValueError("I, a and d0 must be positive")
    base = 4.0 * I * math.sqrt(a / (math.pi * d0))
    if reading == "product":
        return base * math.exp(-d0 / (4.0 * a))
    if reading == "printed":
        return base / math.exp(-d0 / (4.0 * a))
    raise ValueError(f"reading must be one of {MIN_INTENSITY_READINGS}")


def conversion_from_ntu(N, lam):
    """chi = (E - 1) / (lam E - 1), E = exp((lam - 1) N)."""
    if N < 0.0:
        raise ValueError("N must be non-negative")
    if not lam > 0.0:
        raise ValueError("absorption factor must be positive")
    eps = lam - 1.0
    if abs(eps) < LAMBDA_ONE_TOL:
        num = N + eps * N * N / 2.0 + eps * eps * N ** 3 / 6.0
        den = (N + 1.0) + eps * (N * N / 2.0 + N) + eps * eps * (N ** 3 / 6.0 + N * N / 2.0)
        return num / den
    x = eps * N
    if x > 0.0:
        # divide through by E so nothing overflows for large N
        em = -math.expm1(-x)
        return em / (em + eps)
    em = math.expm1(x)
    return em / (lam * em + eps)


def ntu_from_conversion(chi, lam):
    """N = ln((1 - chi) / (1 - lam chi)) / (lam - 1); chi / (1 - chi) at lam = 1."""
    if not 0.0 <= chi < 1.0:
        raise ValueError("chi must lie in [0, 1)")
    if not lam > 0.0:
        raise ValueError("absorption factor must be positive")
    if lam * chi >= 1.0:
        raise ValueError(f"lam * chi = {lam * chi:.6g} >= 1: driving force pinches")
    eps = lam - 1.0
    if abs(eps) < LAMBDA_ONE_TOL:
        u = chi / (1.0 - chi)
        return u + eps * u * u / 2.0 + eps * eps * u ** 3 / 3.0
    return math.log1p(eps * chi / (1.0 - lam * chi)) / eps


@dataclass(frozen=True)
class ScaleEffectParams:
    """
    Parameters
    ----------
    k_ms, k_m : float
        Mass transfer coefficients inside and outside the spreading zone [m/s].
    I : float
        Flow of one point source [m^3/s].
    a : float
        Packing unit radius [m].
    d0 : float
        Step between point sources [m].
    G : float
        Continuous-phase flow rate [m^3/s].
    F : float
        Cross-section surface [m^2].
    K_bar : float
        Average volumetric mass transfer coefficient [1/s].
    H, H_s : float
        Apparatus and spreading-zone heights [m].
    lambda_abs : float
        Absorption factor.
    h_star : float
        Height of a transfer unit under uniform distribution [m].
    """

    k_ms: float
    k_m: float
    I: float
    a: float
    d0: float
    G: float
    F: float
    K_bar: float
    H: float
    H_s: float
    lambda_abs: float
    h_star: float

    def __post_init__(self):
        if not self.k_m > 0.0:
            raise ValueError("k_m must be positive")
        if not 0.0 < self.H_s <= self.H:
            raise ValueError("need 0 < H_s <= H")
        if not self.lambda_abs > 0.0:
            raise ValueError("lambda_abs must be positive")
        if not (self.F > 0.0 and self.G > 0.0 and self.K_bar > 0.0):
            raise ValueError("F, G and K_bar must be positive")

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: float(d[k]) for k in cls.__dataclass_fields__})


def effective_height(params, gamma):
    h = params.H - (1.0 - gamma) * params.H_s
    if h <= 0.0:
        raise ConfigurationError(f"effective height {h:.6g} m is not positive")
    return h


def transfer_units(params, gamma):
    """N = F K_bar H_eff / G."""
    return params.F * params.K_bar * effective_height(params, gamma) / params.G


def conversion_degree(params, gamma):
    """Outlet conversion of the two-zone apparatus."""
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must lie in (0, 1]")
    return conversion_from_ntu(transfer_units(params, gamma), params.lambda_abs)


def transfer_unit_height(h_star, gamma, H_s, N):
    """(h, dh) with dh = (1 - gamma) H_s / N and h = h_star + dh."""
    if not N > 0.0:
        raise ValueError("N must be positive")
    dh = (1.0 - gamma) * H_s / N
    return h_star + dh, dh


@dataclass(frozen=True)
class ScaleEffectReport:
    gamma: float
    i_min: float
    chi: float
    N: float
    h_tilde: float
    delta_h: float
    min_intensity_reading: str = "product"
    height_reading: str = "H - (1 - gamma) H_s"

    def as_dict(self):
        return asdict(self)


def scale_effect_report(params, gamma=None, reading="product"):
    """All derived quantities; N is recovered from chi through the inverse."""
    if gamma is None:
        gamma = worsening_coefficient(params.k_ms, params.k_m)
    chi = conversion_degree(params, gamma)
    N = ntu_from_conversion(chi, params.lambda_abs)
    h, dh = transfer_unit_height(params.h_star, gamma, params.H_s, N)
    i_min = min_local_intensity(params.I, params.a, params.d0, reading)
    return ScaleEffectReport(gamma, i_min, chi, N, h, dh, reading)
