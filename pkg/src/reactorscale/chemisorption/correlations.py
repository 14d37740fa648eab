"""
Fitted correlations for the reaction-plane regime.

All inputs are SI (m, s, mol/m^3, Pa, Pa m^3/mol). The fits were built from
runs with diffusivities in ``DIFFUSIVITY_RANGE`` and partial pressures in
``PRESSURE_RANGE``; evaluations outside those ranges are returned with
``extrapolated = True`` rather than refused.
"""

import math

DIFFUSIVITY_RANGE = (0.04e-9, 5.73e-9)
PRESSURE_RANGE = (0.9e3, 1.3e3)
_SATURATION_BASE = 2.371


class CorrelationRangeError(ValueError):
    """Inputs outside the domain where a correlation is defined at all."""


class CorrelationValue(float):
    """A float carrying an ``extrapolated`` flag."""

    def __new__(cls, value, extrapolated=False):
        obj = super().__new__(cls, value)
        obj.extrapolated = bool(extrapolated)
        return obj

    def __repr__(self):
        tag = ", extrapolated" if self.extrapolated else ""
        return f"CorrelationValue({float(self)!r}{tag})"


def _outside(value, bounds):
    lo, hi = bounds
    return not (lo <= value <= hi)


def _flag(diffusivities=(), pressures=()):
    return any(_outside(d, DIFFUSIVITY_RANGE) for d in diffusivities) or any(
        _outside(p, PRESSURE_RANGE) for p in pressures
    )


def _positive(name, value):
    if not value > 0.0:
        raise ValueError(f"{name} must be positive, got {value!r}")


def _saturation_group(C_B, H, P):
    group = C_B * H / P
    if group >= _SATURATION_BASE:
        raise CorrelationRangeError(
            f"C_B*H/P = {group:.6g} must stay below {_SATURATION_BASE} for the surface-A fit"
        )
    return group


def correlation_tp(C_B, H, P, D_A, D_B):
    """
    Characteristic penetration time.

    ``t_p = 13.6 (1 + 0.018 C_B H / P)^0.786 (D_A / D_B)^-3.44`` [s].
    """
    _positive("P", P)
    _positive("D_B", D_B)
    _positive("D_A", D_A)
    value = 13.6 * (1.0 + 0.018 * C_B * H / P) ** 0.786 * (D_A / D_B) ** -3.44
    return CorrelationValue(value, _flag((D_A, D_B), (P,)))


def correlation_hp(D_E, D_B, D_A):
    """
    Characteristic penetration depth [m].

    ``h_p = 7.72e-5 (1 + D_E / D_B)^-0.18 (D_A / D_B)^0.781``.
    """
    _positive("D_B", D_B)
    _positive("D_A", D_A)
    if D_E < 0.0:
        raise ValueError("D_E must be non-negative")
    value = 7.72e-5 * (1.0 + D_E / D_B) ** -0.18 * (D_A / D_B) ** 0.781
    diffs = (D_A, D_B) + ((D_E,) if D_E > 0.0 else ())
    return CorrelationValue(value, _flag(diffs))


def correlation_surface_A(C_B, H, P, t, t_p):
    """
    Surface concentration of the absorbed gas relative to C_B.

    ``C_AS / C_B = (2.371 - C_B H / P)^0.802 (t / t_p)^0.408``.

    Raises
    ------
    CorrelationRangeError
        If ``C_B H / P >= 2.371`` (negative base).
    """
    _positive("P", P)
    _positive("t_p", t_p)
    if t < 0.0:
        raise ValueError("t must be non-negative")
    group = _saturation_group(C_B, H, P)
    value = (_SATURATION_BASE - group) ** 0.802 * (t / t_p) ** 0.408
    return CorrelationValue(value, _flag(pressures=(P,)))


def correlation_product_decay(D_E, D_A, t, t_p):
    """Decay of the surface product concentration, ``C_Efr / C_Efr(0)``."""
    _positive("D_A", D_A)
    _positive("t_p", t_p)
    if t < 0.0:
        raise ValueError("t must be non-negative")
    if D_E < 0.0:
        raise ValueError("D_E must be non-negative")
    value = math.exp(-((D_E / D_A) ** 0.45) * (t / t_p) ** 0.652)
    diffs = (D_A,) + ((D_E,) if D_E > 0.0 else ())
    return CorrelationValue(value, _flag(diffs))


def correlation_liquid_mtc(alpha, P, C_B, H):
    """
    Averaged liquid-side mass transfer coefficient.

    ``alpha_l = alpha [2.451 (P / C_B) (2.371 - C_B H / P)^-0.802 - H]``.
    A negative result has no physical meaning and raises
    ``CorrelationRangeError``.
    """
    _positive("C_B", C_B)
    _positive("P", P)
    group = _saturation_group(C_B, H, P)
    value = alpha * (2.451 * (P / C_B) * (_SATURATION_BASE - group) ** -0.802 - H)
    if value < 0.0:
        raise CorrelationRangeError(f"liquid mass transfer coefficient {value:.6g} is negative")
    return CorrelationValue(value, _flag(pressures=(P,)))
